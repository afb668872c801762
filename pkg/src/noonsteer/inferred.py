"""Inferred (conditional) statistics of mode b given measurements on mode a.

Two independent routes live here:

* the integral route: conditional moments written in terms of oscillator
  wavefunctions and cached moment integrals R_n(j, k) = int q^n psi_j psi_k dq,
  averaged over the a-mode outcome by adaptive quadrature;
* the matrix route (``density_*`` functions): the same quantities from an
  explicit two-mode density matrix, conditioned numerically and traced
  against truncated operator matrices.

The conditioning observables are fixed: number on a infers number on b, and
the X quadrature on a infers every quadrature-power quantity on b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedOrder, ZeroProbabilityConditioning
from .fock import operator_matrix, wavefunction_stack
from .lossy import (
    CONDITIONING_FLOOR,
    LossChannel,
    TwoModeDensity,
    binomial_ladder,
    conditioned_b_blocks,
    number_joint,
)
from .quadrature import integrate, integrate_abs

_THETA = {"x": 0.0, "p": math.pi / 2.0}

#: The lossy commutator reduction is only established for N up to this order.
MAX_LOSSY_COMMUTATOR_ORDER = 5


def _norm_which(which: str) -> str:
    w = which.lower()
    if w not in _THETA:
        raise ValueError(f"criterion must be 'x' or 'p', got {which!r}")
    return w


@dataclass(frozen=True)
class InferredMoments:
    """The three ingredients of one steering evaluation."""

    n_quanta: int
    phi: float
    channel: LossChannel
    which: str
    var_number: float
    var_quadrature_n: float
    commutator_modulus: float

    def __post_init__(self):
        for name in ("var_number", "var_quadrature_n", "commutator_modulus"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


@lru_cache(maxsize=None)
def moment_integral(order: int, j: int, k: int) -> float:
    """R_n(j, k) = int q^n <q|j><q|k> dq over the quadrature domain.

    Exactly zero by parity when order + j + k is odd.
    """
    if (order + j + k) % 2 == 1:
        return 0.0

    def integrand(q):
        psi = wavefunction_stack(max(j, k), q)
        return q**order * psi[j] * psi[k]

    return integrate(integrand)


@lru_cache(maxsize=None)
def overlap_abs_integral(n_quanta: int) -> float:
    """int |<x|0><x|N>| dx, the kernel of every commutator modulus."""

    def integrand(x):
        psi = wavefunction_stack(n_quanta, x)
        return psi[0] * psi[n_quanta]

    return integrate_abs(integrand)


def _branch_profiles(n_quanta: int, channel: LossChannel, x: np.ndarray):
    """Per-x ingredients shared by every conditional quantity.

    Returns (branch_a, psi0_sq, psi0_psiN, px) where branch_a is the
    binomially weighted a-ladder profile and px the outcome density.
    """
    psi = wavefunction_stack(n_quanta, x)
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    branch_a = np.einsum("m,mx->x", ladder_a, psi**2)
    psi0_sq = psi[0] ** 2
    psi0_psin = psi[0] * psi[n_quanta]
    px = 0.5 * (branch_a + psi0_sq)
    return branch_a, psi0_sq, psi0_psin, px


def px_density(n_quanta: int, phi: float, channel: LossChannel, x):
    """Density of the a-mode X outcome. Independent of phi (kept for symmetry
    with the other conditional operations)."""
    del phi
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    _, _, _, px = _branch_profiles(n_quanta, channel, x_arr)
    return px if np.ndim(x) else float(px[0])


def _moment_numerators(n_quanta, phi, channel, which, orders, x):
    """S_n(x) = 2 P(x) <Q^n>_x for each requested order, plus P(x)."""
    theta = _THETA[_norm_which(which)]
    branch_a, psi0_sq, psi0_psin, px = _branch_profiles(n_quanta, channel, x)
    ladder_b = binomial_ladder(n_quanta, channel.eta_b)
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    cross_coeff = 2.0 * damping * math.cos(n_quanta * theta - phi)
    numerators = []
    for order in orders:
        diag_b = sum(ladder_b[k] * moment_integral(order, k, k) for k in range(n_quanta + 1))
        s = (
            branch_a * moment_integral(order, 0, 0)
            + psi0_sq * diag_b
            + cross_coeff * moment_integral(order, 0, n_quanta) * psi0_psin
        )
        numerators.append(s)
    return numerators, px


def conditional_quadrature_moment(
    n_quanta: int,
    phi: float,
    channel: LossChannel,
    order: int,
    x,
    which: str = "p",
):
    """<X_b^order>_x or <P_b^order>_x given the a-mode outcome x."""
    if order < 1:
        raise ValueError("moment order must be >= 1")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    (s,), px = _moment_numerators(n_quanta, phi, channel, which, [order], x_arr)
    if np.any(px < CONDITIONING_FLOOR):
        raise ZeroProbabilityConditioning("conditioning density vanished")
    out = s / (2.0 * px)
    return out if np.ndim(x) else float(out[0])


def inferred_variance_quadrature(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> float:
    """Average conditional variance of Q_b^N given the a-mode X outcome.

    Integrated in the product form P(x) * Var(Q^N | x), which stays finite
    where P(x) underflows.
    """
    which = _norm_which(which)

    def integrand(x):
        (s_n, s_2n), px = _moment_numerators(
            n_quanta, phi, channel, which, [n_quanta, 2 * n_quanta], x
        )
        safe = px > CONDITIONING_FLOOR
        ratio = np.zeros_like(px)
        ratio[safe] = s_n[safe] ** 2 / (4.0 * px[safe])
        return 0.5 * s_2n - ratio

    return integrate(integrand)


def inferred_number_variance(n_quanta: int, channel: LossChannel) -> float:
    """Average conditional variance of n_b given the n_a outcome (closed form).

    Only the n_a = 0 branch contributes: any detected quantum on a pins
    n_b = 0 exactly under the loss model.
    """
    eta_a, eta_b = channel.eta_a, channel.eta_b
    lost_a = (1.0 - eta_a) ** n_quanta
    numer = eta_b * (n_quanta - n_quanta * eta_b) + n_quanta * lost_a * (
        eta_b - eta_b**2 + n_quanta * eta_b**2
    )
    return numer / (2.0 * (lost_a + 1.0))


def commutator_phase_factor(n_quanta: int, phi: float, which: str) -> float:
    """|trig(phi)| selecting the usable phases of each criterion."""
    which = _norm_which(which)
    if which == "p" and n_quanta % 2 == 1:
        return abs(math.cos(phi))
    return abs(math.sin(phi))


def inferred_commutator_modulus(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> float:
    """|<[n_b, Q_b^N]>|_inf, the steering-criterion denominator (times 2).

    Equals N sqrt(N!) |trig(phi)| (eta_a eta_b)^{N/2} int |<x|0><x|N>| dx.
    The loss damping enters only as the (eta_a eta_b)^{N/2} prefactor; that
    reduction is established for N <= 5, so lossy evaluation refuses larger N
    rather than guessing.
    """
    if not channel.lossless and n_quanta > MAX_LOSSY_COMMUTATOR_ORDER:
        raise UnsupportedOrder(
            f"lossy commutator reduction is only established for N <= "
            f"{MAX_LOSSY_COMMUTATOR_ORDER}, got N={n_quanta}"
        )
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    return (
        n_quanta
        * math.sqrt(math.factorial(n_quanta))
        * commutator_phase_factor(n_quanta, phi, which)
        * damping
        * overlap_abs_integral(n_quanta)
    )


def compute_inferred_moments(
    n_quanta: int, phi: float, channel: LossChannel, which: str = "p"
) -> InferredMoments:
    which = _norm_which(which)
    return InferredMoments(
        n_quanta=n_quanta,
        phi=phi,
        channel=channel,
        which=which,
        var_number=inferred_number_variance(n_quanta, channel),
        var_quadrature_n=inferred_variance_quadrature(n_quanta, phi, channel, which),
        commutator_modulus=inferred_commutator_modulus(n_quanta, phi, channel, which),
    )


# -- matrix route --------------------------------------------------------------


def density_number_variance(rho: TwoModeDensity) -> float:
    """Sum_m P(m) Var(n_b | n_a = m) from the joint number distribution."""
    joint = number_joint(rho)
    n_b = np.arange(rho.dim, dtype=float)
    total = 0.0
    for row in joint:
        pm = row.sum()
        if pm <= 0.0:
            continue
        mean = float(np.dot(row, n_b)) / pm
        total += float(np.dot(row, (n_b - mean) ** 2))
    return total


def _quadrature_eigenphase(dim: int, theta: float) -> np.ndarray:
    """Phases e^{-i n theta} mapping Fock rows onto X_theta eigenfunctions."""
    return np.exp(-1j * theta * np.arange(dim))


def density_quadrature_variance(rho: TwoModeDensity, theta: float, order: int) -> float:
    """Inferred variance of (X_b,theta)^order via explicit conditioning.

    Rotates the conditional block into the X_theta frame so that the plain X
    moment matrices apply regardless of theta.
    """
    x_mat = operator_matrix("x", rho.dim).matrix
    m_n = np.linalg.matrix_power(x_mat, order)
    m_2n = np.linalg.matrix_power(x_mat, 2 * order)
    phases = _quadrature_eigenphase(rho.dim, theta)
    rotate = np.outer(phases, phases.conj())

    def integrand(x):
        blocks, px = conditioned_b_blocks(rho, x)
        blocks = blocks * rotate[None, :, :]
        first = np.einsum("xks,sk->x", blocks, m_n).real
        second = np.einsum("xks,sk->x", blocks, m_2n).real
        safe = px > CONDITIONING_FLOOR
        ratio = np.zeros_like(px)
        ratio[safe] = first[safe] ** 2 / px[safe]
        return second - ratio

    return integrate(integrand)


def density_conditional_moment(rho: TwoModeDensity, theta: float, order: int, x) -> float:
    """<(X_b,theta)^order>_x from an explicit density, for cross-checks."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    m = np.linalg.matrix_power(operator_matrix("x", rho.dim).matrix, order)
    phases = _quadrature_eigenphase(rho.dim, theta)
    rotate = np.outer(phases, phases.conj())
    blocks, px = conditioned_b_blocks(rho, x_arr)
    if np.any(px < CONDITIONING_FLOOR):
        raise ZeroProbabilityConditioning("conditioning density vanished")
    vals = np.einsum("xks,sk->x", blocks * rotate[None, :, :], m).real / px
    return vals if np.ndim(x) else float(vals[0])


def density_abs_conditional_mean(rho: TwoModeDensity, operator: np.ndarray) -> float:
    """int P(x) |<M>_x| dx for a Hermitian mode-b operator M."""
    if operator.shape != (rho.dim, rho.dim):
        raise ValueError("operator cutoff must match the density cutoff")

    def signed(x):
        blocks, _ = conditioned_b_blocks(rho, x)
        vals = np.einsum("xks,sk->x", blocks, operator)
        if np.max(np.abs(vals.imag)) > 1e-9:
            raise ValueError("conditional mean of a Hermitian operator came out complex")
        return vals.real

    return integrate_abs(signed)
