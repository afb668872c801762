"""Steering functionals, thresholds, sweeps, homodyne-protocol right-hand
sides, and the two-hill coherence inequality.

The central object is the ratio

    E = 2 sqrt(var_number * var_quadrature_N) / commutator_modulus

with E < 1 certifying steering of mode b by measurements on mode a. A zero
denominator at a bad phase is reported as NondiscriminatingPhase rather than
as an infinite E: the configuration is unusable, not steered or unsteered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateChannel,
    NondiscriminatingPhase,
    NoonSteerError,
    NoThresholdInBracket,
    UnsupportedOrder,
)
from .fock import operator_matrix, wavefunction_stack
from .inferred import (
    commutator_phase_factor,
    compute_inferred_moments,
    inferred_commutator_modulus,
    inferred_variance_quadrature,
)
from .lossy import LossChannel, binomial_ladder, conditional_number_b, number_marginal_a
from .quadrature import integrate_abs

#: Phase factors smaller than this count as an analytically zero denominator.
PHASE_TOLERANCE = 1e-9


def caption_phase(n_quanta: int) -> float:
    """Default sweep phase: 0 for odd orders, pi/2 for even ones (where the
    P-criterion denominator is maximal)."""
    return 0.0 if n_quanta % 2 == 1 else math.pi / 2.0


@dataclass(frozen=True)
class SteeringReport:
    """One steering evaluation: numerator factors, denominator, and verdict."""

    n_quanta: int
    phi: float
    channel: LossChannel
    which: str
    var_number: float
    var_quadrature_n: float
    commutator_modulus: float
    E: float
    violated: bool


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep; ``error`` is set instead of aborting."""

    n_quanta: int
    phi: float
    eta_a: float
    eta_b: float
    which: str
    var_number: float | None = None
    var_quadrature_n: float | None = None
    commutator_modulus: float | None = None
    E: float | None = None
    violated: bool | None = None
    error: str | None = None


@dataclass(frozen=True)
class CoherenceReport:
    """Two-hill number statistics against the steering product."""

    p_hill_nonzero: float
    p_hill_zero: float
    hill1_mean: float
    hill1_var: float
    hill2_mean: float
    hill2_var: float
    lhs: float
    rhs: float
    violated: bool


def check_phase(n_quanta: int, phi: float, which: str):
    """Raise NondiscriminatingPhase when the criterion denominator vanishes."""
    if commutator_phase_factor(n_quanta, phi, which) < PHASE_TOLERANCE:
        form = "cos" if (which.lower() == "p" and n_quanta % 2 == 1) else "sin"
        raise NondiscriminatingPhase(
            f"criterion {which!r} needs {form}(phi) != 0 for N={n_quanta}; "
            f"phi={phi} makes the denominator analytically zero"
        )


def steering_functional(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> SteeringReport:
    """Evaluate the steering ratio E for one configuration."""
    check_phase(n_quanta, phi, which)
    if channel.eta_a * channel.eta_b == 0.0:
        raise DegenerateChannel("eta_a * eta_b = 0 zeroes the denominator")
    moments = compute_inferred_moments(n_quanta, phi, channel, which)
    e_value = (
        2.0
        * math.sqrt(moments.var_number * moments.var_quadrature_n)
        / moments.commutator_modulus
    )
    return SteeringReport(
        n_quanta=n_quanta,
        phi=phi,
        channel=channel,
        which=moments.which,
        var_number=moments.var_number,
        var_quadrature_n=moments.var_quadrature_n,
        commutator_modulus=moments.commutator_modulus,
        E=e_value,
        violated=bool(e_value < 1.0),
    )


def e1p_closed_form(channel: LossChannel) -> float:
    """Closed-form E for N = 1, phi = 0, P criterion."""
    eta_a, eta_b = channel.eta_a, channel.eta_b
    if eta_a * eta_b == 0.0:
        raise DegenerateChannel("eta_a * eta_b = 0 zeroes the denominator")
    inner = eta_b * (eta_a + eta_b - 2.0) * (1.0 + eta_b) / (2.0 * (eta_a - 2.0))
    return 2.0 * math.sqrt(inner) / (math.sqrt(2.0 / math.pi) * math.sqrt(eta_a * eta_b))


def _channel_for(mode: str, fixed_value: float | None, eta: float) -> LossChannel:
    if mode == "symmetric":
        return LossChannel(eta, eta)
    if mode == "fix_eta_a":
        return LossChannel(fixed_value, eta)
    if mode == "fix_eta_b":
        return LossChannel(eta, fixed_value)
    raise ValueError(f"unknown threshold mode {mode!r}")


def threshold_efficiency(
    n_quanta: int,
    phi: float,
    which: str = "p",
    mode: str = "symmetric",
    fixed_value: float | None = None,
    bracket: tuple[float, float] = (0.5, 1.0),
    width: float = 1e-6,
) -> float:
    """Bisect the efficiency at which E crosses 1.

    Requires E < 1 at the high end of the bracket and E >= 1 at the low end,
    and asserts empirically that E is monotone on the bracket before
    bisecting.
    """
    if mode != "symmetric" and fixed_value is None:
        raise ValueError(f"mode {mode!r} needs a fixed efficiency value")

    def e_at(eta: float) -> float:
        return steering_functional(n_quanta, phi, _channel_for(mode, fixed_value, eta), which).E

    lo, hi = bracket
    e_lo, e_hi = e_at(lo), e_at(hi)
    if not (e_hi < 1.0 <= e_lo):
        raise NoThresholdInBracket(
            f"E({lo})={e_lo:.4f}, E({hi})={e_hi:.4f}: no crossing of 1 inside the bracket"
        )
    probes = [e_at(eta) for eta in np.linspace(lo, hi, 7)[1:-1]]
    seq = [e_lo, *probes, e_hi]
    if any(b > a + 1e-9 for a, b in zip(seq, seq[1:])):
        raise NoThresholdInBracket("E is not monotone on the bracket; refusing to bisect")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if e_at(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep(
    orders: Iterable[int],
    phi_rule: Callable[[int], float] | float,
    which: str = "p",
    *,
    symmetric: Sequence[float] | None = None,
    eta_a_values: Sequence[float] | None = None,
    eta_b_values: Sequence[float] | None = None,
) -> list[SweepRow]:
    """Evaluate E over an efficiency grid, one row per point.

    Either ``symmetric`` (eta_a = eta_b along one axis) or the full
    ``eta_a_values`` x ``eta_b_values`` product grid. Failing points are
    flagged in their row instead of aborting the sweep. Rows are sorted by
    (N, eta_a, eta_b) regardless of evaluation order.
    """
    if symmetric is not None:
        if eta_a_values is not None or eta_b_values is not None:
            raise ValueError("give either a symmetric axis or a product grid, not both")
        if len(symmetric) < 2:
            raise ValueError("grid needs at least 2 points per axis")
        pairs = [(eta, eta) for eta in symmetric]
    else:
        if eta_a_values is None or eta_b_values is None:
            raise ValueError("product grid needs both eta_a and eta_b values")
        if len(eta_a_values) < 2 or len(eta_b_values) < 2:
            raise ValueError("grid needs at least 2 points per axis")
        pairs = [(ea, eb) for ea in eta_a_values for eb in eta_b_values]

    rows = []
    for n_quanta in orders:
        phi = phi_rule(n_quanta) if callable(phi_rule) else float(phi_rule)
        for eta_a, eta_b in pairs:
            try:
                report = steering_functional(n_quanta, phi, LossChannel(eta_a, eta_b), which)
            except NoonSteerError as exc:
                rows.append(
                    SweepRow(
                        n_quanta=n_quanta,
                        phi=phi,
                        eta_a=eta_a,
                        eta_b=eta_b,
                        which=which,
                        error=type(exc).__name__,
                    )
                )
                continue
            rows.append(
                SweepRow(
                    n_quanta=n_quanta,
                    phi=phi,
                    eta_a=eta_a,
                    eta_b=eta_b,
                    which=which,
                    var_number=report.var_number,
                    var_quadrature_n=report.var_quadrature_n,
                    commutator_modulus=report.commutator_modulus,
                    E=report.E,
                    violated=report.violated,
                )
            )
    rows.sort(key=lambda r: (r.n_quanta, r.eta_a, r.eta_b))
    return rows


def protocol_combination(n_quanta: int, which: str, dim: int) -> np.ndarray:
    """The homodyne-measurable operator whose conditional |mean| equals the
    commutator modulus, built from X, P, and the pi/4-rotated quadratures."""
    which = which.lower()
    x = operator_matrix("x", dim).matrix
    p = operator_matrix("p", dim).matrix
    x_pi4 = operator_matrix("x_theta", dim, theta=math.pi / 4).matrix
    p_pi4 = operator_matrix("x_theta", dim, theta=3 * math.pi / 4).matrix
    if n_quanta == 1:
        return x if which == "p" else p
    if n_quanta == 2:
        return 2.0 * (x_pi4 @ x_pi4) - x @ x - p @ p
    if n_quanta == 3:
        cube = lambda m: m @ m @ m
        if which == "p":
            return math.sqrt(2.0) * (cube(x_pi4) - cube(p_pi4)) - cube(x)
        return math.sqrt(2.0) * (cube(x_pi4) + cube(p_pi4)) - cube(p)
    raise UnsupportedOrder(f"homodyne combination is constructed only for N <= 3, got {n_quanta}")


def protocol_rhs(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> float:
    """The measurable right-hand side of the steering inequality.

    Built solely from conditional means of quadrature powers on mode b, so it
    is a valid bound for any state, not only the NOON family it is evaluated
    on here.
    """
    if n_quanta > 3:
        raise UnsupportedOrder(f"homodyne combination is constructed only for N <= 3, got {n_quanta}")
    dim = n_quanta + 12
    combo = protocol_combination(n_quanta, which, dim)
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    ladder_b = binomial_ladder(n_quanta, channel.eta_b)
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    m_00 = complex(combo[0, 0]).real
    m_diag = np.array([complex(combo[k, k]).real for k in range(n_quanta + 1)])
    m_n0 = complex(combo[n_quanta, 0])
    cross = 2.0 * damping * (np.exp(-1j * phi) * m_n0).real

    def signed(x):
        psi = wavefunction_stack(n_quanta, x)
        branch_a = np.einsum("m,mx->x", ladder_a, psi**2)
        diag_b = float(np.dot(ladder_b, m_diag))
        return branch_a * m_00 + psi[0] ** 2 * diag_b + cross * psi[0] * psi[n_quanta]

    return 0.25 * integrate_abs(signed)


def coherence_inequality(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> CoherenceReport:
    """Split mode-b number statistics into the two hills selected by the
    n_a = 0 vs n_a > 0 outcome and test the product inequality against the
    squared half-modulus."""
    marginal = number_marginal_a(n_quanta, channel)
    p_zero = float(marginal[0])
    p_nonzero = float(marginal[1:].sum())
    values = np.arange(n_quanta + 1, dtype=float)

    def hill_stats(dist: np.ndarray) -> tuple[float, float]:
        mean = float(np.dot(dist, values))
        return mean, float(np.dot(dist, (values - mean) ** 2))

    if p_nonzero > 0.0:
        pooled = np.zeros(n_quanta + 1)
        for m in range(1, n_quanta + 1):
            pooled += marginal[m] * conditional_number_b(n_quanta, channel, m)
        hill1_mean, hill1_var = hill_stats(pooled / p_nonzero)
    else:
        hill1_mean, hill1_var = 0.0, 0.0
    hill2_mean, hill2_var = hill_stats(conditional_number_b(n_quanta, channel, 0))

    var_quad = inferred_variance_quadrature(n_quanta, phi, channel, which)
    modulus = inferred_commutator_modulus(n_quanta, phi, channel, which)
    lhs = (p_nonzero * hill1_var + p_zero * hill2_var) * var_quad
    rhs = modulus**2 / 4.0
    return CoherenceReport(
        p_hill_nonzero=p_nonzero,
        p_hill_zero=p_zero,
        hill1_mean=hill1_mean,
        hill1_var=hill1_var,
        hill2_mean=hill2_mean,
        hill2_var=hill2_var,
        lhs=lhs,
        rhs=rhs,
        violated=bool(lhs < rhs),
    )
