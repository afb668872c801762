"""Shot-level Monte Carlo realization of the measurement protocol.

Number pairs are drawn from the loss-model joint distribution; homodyne
shots draw the a-mode X outcome by inverse CDF from a precomputed monotone
table, then the b-mode quadrature from the conditional density by rejection
against a Gaussian envelope. Conditioning on the continuous outcome is done
by binning, which the analytic pipeline never needs - that makes the sampler
an independent statistical oracle for every inferred quantity.

All estimators follow the analytic definitions: variances are occupancy-
weighted within-bin variances, and the modulus is applied to the per-bin
conditional mean, never per shot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateChannel,
    EnvelopeFailure,
    InsufficientBinOccupancy,
    UnsupportedOrder,
)
from .fock import wavefunction_stack
from .inferred import px_density
from .lossy import LossChannel, binomial_ladder

OBSERVABLE_THETA = {
    "X": 0.0,
    "P": math.pi / 2.0,
    "X_pi4": math.pi / 4.0,
    "P_pi4": 3.0 * math.pi / 4.0,
}

SETTING_NUMBER = "number-pair"

X_TABLE_NODES = 4096
X_RANGE = (-8.0, 8.0)
MIN_BIN_OCCUPANCY = 20
ENVELOPE_SAFETY = 1.2
MIN_ACCEPTANCE = 1e-4


def setting_label(name: str) -> str:
    """Wire name of a setting as written to shot logs."""
    return name if name == SETTING_NUMBER else f"x-then-{name}"


@dataclass(frozen=True)
class ShotRecord:
    """One measurement event: which local settings, and both outcomes."""

    setting: str
    outcome_a: float | int
    outcome_b: float | int

    def __post_init__(self):
        if self.setting == SETTING_NUMBER:
            if not (isinstance(self.outcome_a, int) and isinstance(self.outcome_b, int)):
                raise ValueError("number settings carry integer outcomes")
        elif not (math.isfinite(self.outcome_a) and math.isfinite(self.outcome_b)):
            raise ValueError("quadrature outcomes must be finite")


@dataclass(frozen=True)
class ComponentEstimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class SteeringEstimate:
    """Sampler-side steering evaluation with delta-method standard errors."""

    n_quanta: int
    phi: float
    channel: LossChannel
    which: str
    shots: int
    seed: int
    bins: int
    e_hat: float
    stderr: float
    var_number: ComponentEstimate
    var_quadrature_n: ComponentEstimate
    commutator_modulus: ComponentEstimate


def sample_number_pair(
    n_quanta: int, phi: float, channel: LossChannel, rng: np.random.Generator, size: int = 1
):
    """Joint (n_a, n_b) samples from the lossy NOON number distribution.

    The coherence terms carry no number weight, so the joint is an even
    mixture of the two surviving binomial ladders; phi is irrelevant here.
    """
    del phi
    n_a = np.zeros(size, dtype=np.int64)
    n_b = np.zeros(size, dtype=np.int64)
    a_branch = rng.random(size) < 0.5
    n_a[a_branch] = rng.binomial(n_quanta, channel.eta_a, size=int(a_branch.sum()))
    n_b[~a_branch] = rng.binomial(n_quanta, channel.eta_b, size=int((~a_branch).sum()))
    return n_a, n_b


@lru_cache(maxsize=None)
def _x_cdf_table(n_quanta: int, eta_a: float):
    xs = np.linspace(X_RANGE[0], X_RANGE[1], X_TABLE_NODES)
    dens = px_density(n_quanta, 0.0, LossChannel(eta_a, 1.0), xs)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
    return xs, cdf / cdf[-1]


def _draw_x(n_quanta, channel, rng, size):
    xs, cdf = _x_cdf_table(n_quanta, channel.eta_a)
    return np.interp(rng.random(size), cdf, xs)


def _conditional_profile(n_quanta, phi, channel, theta, x):
    """Per-shot coefficients of the conditional quadrature density.

    f(q | x) = [c0 psi_0(q)^2 + sum_k ck psi_k(q)^2 + cx psi_0(q) psi_N(q)]
    normalized by 2 P(x); the three coefficient groups depend on x only.
    """
    psi = wavefunction_stack(n_quanta, x)
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    ladder_b = binomial_ladder(n_quanta, channel.eta_b)
    branch_a = np.einsum("m,mx->x", ladder_a, psi**2)
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    coeff_diag = np.multiply.outer(ladder_b, psi[0] ** 2)  # (N+1, nx)
    coeff_diag[0] += branch_a
    coeff_cross = 2.0 * damping * math.cos(n_quanta * theta - phi) * psi[0] * psi[n_quanta]
    norm = 2.0 * px_density(n_quanta, 0.0, channel, x)
    return coeff_diag, coeff_cross, norm


def _conditional_density(n_quanta, coeff_diag, coeff_cross, norm, q):
    psi_q = wavefunction_stack(n_quanta, q)
    dens = np.einsum("kx,kx->x", coeff_diag, psi_q**2)
    dens += coeff_cross * psi_q[0] * psi_q[n_quanta]
    return np.maximum(dens, 0.0) / norm


@lru_cache(maxsize=None)
def _envelope_constant(n_quanta, phi, channel_key, theta):
    """Envelope scale from a coarse scan of density/envelope ratios."""
    channel = LossChannel(*channel_key)
    sigma = math.sqrt(2.0 * (n_quanta + 1.0))
    x_scan = np.linspace(X_RANGE[0], X_RANGE[1], 81)
    q_scan = np.linspace(-5.0 * sigma, 5.0 * sigma, 161)
    coeff_diag, coeff_cross, norm = _conditional_profile(n_quanta, phi, channel, theta, x_scan)
    ratio_max = 0.0
    envelope = np.exp(-0.5 * (q_scan / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    for i, q in enumerate(q_scan):
        dens = _conditional_density(
            n_quanta, coeff_diag, coeff_cross, norm, np.full_like(x_scan, q)
        )
        ratio_max = max(ratio_max, float(np.max(dens / envelope[i])))
    return ENVELOPE_SAFETY * ratio_max, sigma


def sample_quadrature_pair(
    n_quanta: int,
    phi: float,
    channel: LossChannel,
    observable: str,
    rng: np.random.Generator,
    size: int = 1,
):
    """(x_a, q_b) pairs: inverse-CDF x draw, then rejection-sampled q."""
    if observable not in OBSERVABLE_THETA:
        raise ValueError(f"observable must be one of {sorted(OBSERVABLE_THETA)}")
    theta = OBSERVABLE_THETA[observable]
    x = _draw_x(n_quanta, channel, rng, size)
    coeff_diag, coeff_cross, norm = _conditional_profile(n_quanta, phi, channel, theta, x)
    scale, sigma = _envelope_constant(
        n_quanta, phi, (channel.eta_a, channel.eta_b), theta
    )
    q = np.empty(size)
    pending = np.arange(size)
    proposals = 0
    accepted = 0
    while pending.size:
        prop = rng.normal(0.0, sigma, size=pending.size)
        envelope = np.exp(-0.5 * (prop / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
        dens = _conditional_density(
            n_quanta,
            coeff_diag[:, pending],
            coeff_cross[pending],
            norm[pending],
            prop,
        )
        keep = rng.random(pending.size) * scale * envelope <= dens
        q[pending[keep]] = prop[keep]
        proposals += pending.size
        accepted += int(keep.sum())
        pending = pending[~keep]
        if proposals >= 10_000 and accepted < MIN_ACCEPTANCE * proposals:
            raise EnvelopeFailure(
                f"acceptance {accepted / proposals:.2e} below {MIN_ACCEPTANCE}; "
                "envelope constant is wrong for this configuration"
            )
    return x, q


def envelope_acceptance_audit(
    n_quanta: int,
    phi: float,
    channel: LossChannel,
    observable: str,
    rng: np.random.Generator,
    proposals: int = 200_000,
) -> float:
    """Measured acceptance times envelope constant; 1 iff the conditional
    density is normalized (both densities integrate to one)."""
    theta = OBSERVABLE_THETA[observable]
    x = _draw_x(n_quanta, channel, rng, proposals)
    coeff_diag, coeff_cross, norm = _conditional_profile(n_quanta, phi, channel, theta, x)
    scale, sigma = _envelope_constant(n_quanta, phi, (channel.eta_a, channel.eta_b), theta)
    prop = rng.normal(0.0, sigma, size=proposals)
    envelope = np.exp(-0.5 * (prop / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    dens = _conditional_density(n_quanta, coeff_diag, coeff_cross, norm, prop)
    accepted = int(np.sum(rng.random(proposals) * scale * envelope <= dens))
    return scale * accepted / proposals


def _homodyne_settings(n_quanta: int, which: str):
    """Settings needed for the variance and commutator estimators.

    The first entry always measures the criterion quadrature itself (it
    feeds the variance estimator); the ``combo`` maps settings to the
    coefficients of the per-bin commutator combination of q^N means.
    """
    which = which.lower()
    quad = "P" if which == "p" else "X"
    if n_quanta == 1:
        combo = {("X" if which == "p" else "P"): 1.0}
    elif n_quanta == 2:
        combo = {"X_pi4": 2.0, "X": -1.0, "P": -1.0}
    elif n_quanta == 3:
        if which == "p":
            combo = {"X_pi4": math.sqrt(2.0), "P_pi4": -math.sqrt(2.0), "X": -1.0}
        else:
            combo = {"X_pi4": math.sqrt(2.0), "P_pi4": math.sqrt(2.0), "P": -1.0}
    else:
        raise UnsupportedOrder(
            f"shot-level commutator estimation uses the homodyne combination, "
            f"defined only for N <= 3 (got N={n_quanta})"
        )
    settings = [quad] + [s for s in combo if s != quad]
    return settings, combo


def _merged_partition(bin_counts: np.ndarray, edges: np.ndarray):
    """Greedy left-to-right merge until every kept bin is occupied enough.

    ``bin_counts`` is the minimum per-bin occupancy across settings. Returns
    the merged edge array; raises if even one merged bin cannot be filled.
    """
    merged_edges = [edges[0]]
    acc = 0
    for i, count in enumerate(bin_counts):
        acc += int(count)
        if acc >= MIN_BIN_OCCUPANCY:
            merged_edges.append(edges[i + 1])
            acc = 0
    if len(merged_edges) < 2:
        raise InsufficientBinOccupancy(
            f"fewer than {MIN_BIN_OCCUPANCY} shots per setting in every bin, "
            "even after merging the whole axis"
        )
    # fold the (underfull or empty) right tail into the last kept bin
    merged_edges[-1] = edges[-1]
    return np.array(merged_edges)


def _bin_moments(x, y, edges):
    """Counts and raw power sums of y per bin of x. Deterministic order."""
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    counts = np.bincount(idx, minlength=len(edges) - 1).astype(float)
    sums = {
        power: np.bincount(idx, weights=y**power, minlength=len(edges) - 1)
        for power in (1, 2, 3, 4)
    }
    return counts, sums


def _central_moments(counts, sums):
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums[1] / np.maximum(counts, 1), 0.0)
        raw2 = np.where(counts > 0, sums[2] / np.maximum(counts, 1), 0.0)
        raw3 = np.where(counts > 0, sums[3] / np.maximum(counts, 1), 0.0)
        raw4 = np.where(counts > 0, sums[4] / np.maximum(counts, 1), 0.0)
    m2 = np.maximum(raw2 - mean**2, 0.0)
    m4 = np.maximum(raw4 - 4 * mean * raw3 + 6 * mean**2 * raw2 - 3 * mean**4, 0.0)
    unbias = np.where(counts > 1, counts / np.maximum(counts - 1, 1), 1.0)
    return mean, m2 * unbias, m4


def estimate_steering(
    n_quanta: int,
    phi: float,
    channel: LossChannel,
    which: str = "p",
    shots: int = 1_000_000,
    bins: int = 40,
    seed: int = 0,
    bin_range: tuple[float, float] = X_RANGE,
    shot_log=None,
) -> SteeringEstimate:
    """Estimate E and its three components from simulated shots.

    Shots are split round-robin across the number setting and the homodyne
    settings the configuration needs; each setting draws from its own spawned
    substream, so runs are reproducible and mergeable. ``shot_log`` may be a
    path or file object; records are written interleaved in round-robin
    order as ``setting,outcome_a,outcome_b``.
    """
    if channel.eta_a * channel.eta_b == 0.0:
        raise DegenerateChannel("eta_a * eta_b = 0: nothing to estimate")
    which = which.lower()
    hom_settings, combo = _homodyne_settings(n_quanta, which)
    settings = [SETTING_NUMBER, *hom_settings]
    streams = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(len(settings))]
    per_setting = {
        name: shots // len(settings) + (1 if i < shots % len(settings) else 0)
        for i, name in enumerate(settings)
    }

    # number-pair shots -> var_number
    rng_num = streams[0]
    n_a, n_b = sample_number_pair(n_quanta, phi, channel, rng_num, per_setting[SETTING_NUMBER])
    n_num = n_a.size
    var_n, se2_between, se2_within = 0.0, 0.0, 0.0
    group_vars, group_weights = [], []
    for m in range(n_quanta + 1):
        sel = n_b[n_a == m].astype(float)
        if sel.size == 0:
            continue
        w = sel.size / n_num
        gvar = float(sel.var(ddof=1)) if sel.size > 1 else 0.0
        m4 = float(np.mean((sel - sel.mean()) ** 4)) if sel.size > 1 else 0.0
        var_n += w * gvar
        se2_within += w**2 * max(m4 - gvar**2, 0.0) / sel.size
        group_vars.append(gvar)
        group_weights.append(w)
    se2_between = sum(
        w * (gv - var_n) ** 2 for w, gv in zip(group_weights, group_vars)
    ) / n_num
    se_var_n = math.sqrt(se2_within + se2_between)

    # homodyne shots
    x_by, q_by = {}, {}
    for name, stream in zip(settings[1:], streams[1:]):
        x_by[name], q_by[name] = sample_quadrature_pair(
            n_quanta, phi, channel, name, stream, per_setting[name]
        )

    edges = np.linspace(bin_range[0], bin_range[1], bins + 1)
    raw_counts = {
        name: _bin_moments(x_by[name], q_by[name] ** n_quanta, edges)[0]
        for name in hom_settings
    }
    min_counts = np.min(np.stack([raw_counts[name] for name in hom_settings]), axis=0)
    merged = _merged_partition(min_counts, edges)
    n_merged = len(merged) - 1

    stats = {}
    for name in hom_settings:
        counts, sums = _bin_moments(x_by[name], q_by[name] ** n_quanta, edges=merged)
        mean, m2, m4 = _central_moments(counts, sums)
        stats[name] = {"counts": counts, "mean": mean, "m2": m2, "m4": m4}

    pooled = np.sum(np.stack([stats[name]["counts"] for name in hom_settings]), axis=0)
    weights = pooled / pooled.sum()
    n_hom_total = int(pooled.sum())

    # variance of Q^N: occupancy-weighted within-bin variance
    quad_name = hom_settings[0]
    counts_q = stats[quad_name]["counts"]
    m2_q = stats[quad_name]["m2"]
    m4_q = stats[quad_name]["m4"]
    var_q = float(np.dot(weights, m2_q))
    se2_q = float(
        np.dot(weights**2, np.maximum(m4_q - m2_q**2, 0.0) / np.maximum(counts_q, 1.0))
    )
    se2_q += float(np.dot(weights, (m2_q - var_q) ** 2)) / n_hom_total
    se_var_q = math.sqrt(se2_q)

    # commutator modulus: per-bin |combination of setting means|
    combo_mean = np.zeros(n_merged)
    combo_se2 = np.zeros(n_merged)
    for name, coeff in combo.items():
        s = stats[name]
        combo_mean += coeff * s["mean"]
        combo_se2 += coeff**2 * s["m2"] / np.maximum(s["counts"], 1.0)
    c_hat = float(np.dot(weights, np.abs(combo_mean)))
    se2_c = float(np.dot(weights**2, combo_se2))
    se2_c += float(np.dot(weights, (np.abs(combo_mean) - c_hat) ** 2)) / n_hom_total
    se_c = math.sqrt(se2_c)

    floor = 1.0 / shots
    se_var_n = max(se_var_n, floor)
    se_var_q = max(se_var_q, floor)
    se_c = max(se_c, floor)

    if c_hat > 0.0:
        e_hat = 2.0 * math.sqrt(var_n * var_q) / c_hat
    else:
        e_hat = math.inf
    # conservative first-order propagation; the sqrt of a near-zero variance
    # estimate fluctuates like sqrt(se), not se/(2 sqrt(v))
    d_sqrt_n = se_var_n / (2.0 * math.sqrt(var_n)) if var_n > se_var_n else math.sqrt(se_var_n)
    d_sqrt_q = se_var_q / (2.0 * math.sqrt(var_q)) if var_q > se_var_q else math.sqrt(se_var_q)
    if math.isfinite(e_hat):
        se_e = (2.0 / c_hat) * (
            math.sqrt(var_q) * d_sqrt_n + math.sqrt(max(var_n, 0.0)) * d_sqrt_q
        ) + e_hat * se_c / c_hat
        se_e = max(se_e, floor)
    else:
        se_e = math.inf

    if shot_log is not None:
        _write_shot_log(shot_log, settings, per_setting, n_a, n_b, x_by, q_by)

    return SteeringEstimate(
        n_quanta=n_quanta,
        phi=phi,
        channel=channel,
        which=which,
        shots=shots,
        seed=seed,
        bins=n_merged,
        e_hat=e_hat,
        stderr=se_e,
        var_number=ComponentEstimate(var_n, se_var_n),
        var_quadrature_n=ComponentEstimate(var_q, se_var_q),
        commutator_modulus=ComponentEstimate(c_hat, se_c),
    )


def _format_outcome(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def _iter_shot_records(settings, per_setting, n_a, n_b, x_by, q_by):
    """Shot records in round-robin setting order."""
    cursors = {name: 0 for name in settings}
    remaining = dict(per_setting)
    total = sum(remaining.values())
    for i in range(total):
        name = settings[i % len(settings)]
        while remaining[name] == 0:
            name = settings[(settings.index(name) + 1) % len(settings)]
        j = cursors[name]
        if name == SETTING_NUMBER:
            record = ShotRecord(setting_label(name), int(n_a[j]), int(n_b[j]))
        else:
            record = ShotRecord(setting_label(name), float(x_by[name][j]), float(q_by[name][j]))
        cursors[name] = j + 1
        remaining[name] -= 1
        yield record


def _write_shot_log(target, settings, per_setting, n_a, n_b, x_by, q_by):
    """One CSV line per shot: setting,outcome_a,outcome_b (9 significant digits)."""
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    handle = open(target, "w") if own else target
    try:
        handle.write("setting,outcome_a,outcome_b\n")
        for record in _iter_shot_records(settings, per_setting, n_a, n_b, x_by, q_by):
            handle.write(
                f"{record.setting},{_format_outcome(record.outcome_a)},"
                f"{_format_outcome(record.outcome_b)}\n"
            )
    finally:
        if own:
            handle.close()
