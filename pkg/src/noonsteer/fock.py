"""Truncated Fock-basis primitives for two bosonic modes.

Conventions used throughout the package:

* quadratures X = a + a† and P = (a - a†)/i, so [X, P] = 2i;
* position eigenfunctions are the oscillator wavefunctions with the scale
  constant c fixed to 2, which makes x the eigenvalue of X;
* momentum eigenfunctions pick up the phase (-i)^n relative to position,
  the symmetric Fourier choice (any global phase cancels in moduli).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimTooSmall, OutOfSupportedOrder

#: Highest wavefunction order with a verified overflow-free evaluation.
SUPPORTED_WAVEFUNCTION_ORDER = 16

_OPERATOR_KINDS = ("annihilate", "create", "number", "x", "p", "x_theta")


@dataclass(frozen=True)
class WavefunctionConvention:
    """Fixed constants of the wavefunction normalization.

    ``position_scale`` is the c constant of the oscillator wavefunctions and
    is pinned to 2 so that position eigenvalues coincide with X eigenvalues;
    no other scale is accepted, which rules out silent unit mismatches.
    ``momentum_phase`` is the per-quantum phase of the momentum eigenfunction.
    """

    position_scale: float = 2.0
    momentum_phase: complex = -1j

    def __post_init__(self):
        if self.position_scale != 2.0:
            raise ValueError("position scale constant is fixed to 2")
        if self.momentum_phase != -1j:
            raise ValueError("momentum phase convention is fixed to (-i)^n")


CONVENTION = WavefunctionConvention()


def hermite(n: int, y):
    """Physicists' Hermite polynomial H_n(y) by upward recurrence.

    Total on valid inputs; accepts scalars or arrays.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    y = np.asarray(y, dtype=float)
    h_prev = np.zeros_like(y)
    h = np.ones_like(y)
    for k in range(n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def position_wavefunction(n: int, x):
    """Oscillator position wavefunction <x|n> (real-valued)."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    if n > SUPPORTED_WAVEFUNCTION_ORDER:
        raise OutOfSupportedOrder(
            f"wavefunction order {n} exceeds supported maximum "
            f"{SUPPORTED_WAVEFUNCTION_ORDER}"
        )
    x = np.asarray(x, dtype=float)
    norm = (2.0 * math.pi) ** (-0.25) / math.sqrt(2.0**n * math.factorial(n))
    out = norm * hermite(n, x / math.sqrt(2.0)) * np.exp(-0.25 * x * x)
    return out if np.ndim(out) else float(out)


def momentum_wavefunction(n: int, p):
    """Momentum wavefunction <p|n> = (-i)^n <x -> p|n> (complex-valued)."""
    return (-1j) ** n * position_wavefunction(n, p)


def wavefunction_stack(max_order: int, x: np.ndarray) -> np.ndarray:
    """All <x|n> for n = 0..max_order, shape (max_order+1, len(x)).

    Single recurrence pass; cheaper than per-order calls in hot loops.
    """
    if max_order > SUPPORTED_WAVEFUNCTION_ORDER:
        raise OutOfSupportedOrder(
            f"wavefunction order {max_order} exceeds supported maximum "
            f"{SUPPORTED_WAVEFUNCTION_ORDER}"
        )
    x = np.asarray(x, dtype=float)
    y = x / math.sqrt(2.0)
    gauss = (2.0 * math.pi) ** (-0.25) * np.exp(-0.25 * x * x)
    out = np.empty((max_order + 1, x.size), dtype=float)
    h_prev = np.zeros_like(y)
    h = np.ones_like(y)
    for n in range(max_order + 1):
        out[n] = h * gauss / math.sqrt(2.0**n * math.factorial(n))
        h_prev, h = h, 2.0 * y * h - 2.0 * n * h_prev
    return out


@dataclass(frozen=True)
class TwoModeKet:
    """Pure two-mode state over the truncated product Fock basis.

    ``amplitudes[n_a, n_b]`` is the coefficient of |n_a>|n_b>; the state must
    be normalized to 1 within 1e-12.
    """

    dim: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim, self.dim):
            raise ValueError(f"amplitudes must have shape ({self.dim}, {self.dim})")
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-12")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def noon_state(n_quanta: int, phi: float, dim: int | None = None) -> TwoModeKet:
    """NOON state (|N,0> + e^{i phi}|0,N>)/sqrt(2) on a cutoff-``dim`` basis."""
    if n_quanta < 1:
        raise ValueError("NOON order must be >= 1")
    if dim is None:
        dim = n_quanta + 12
    if dim <= n_quanta:
        raise DimTooSmall(f"dim={dim} cannot hold |{n_quanta}>")
    amps = np.zeros((dim, dim), dtype=complex)
    amps[n_quanta, 0] = 1.0 / math.sqrt(2.0)
    amps[0, n_quanta] = np.exp(1j * phi) / math.sqrt(2.0)
    return TwoModeKet(dim=dim, amplitudes=amps)


def embed(ket: TwoModeKet, dim: int) -> TwoModeKet:
    """Embed a ket into a larger cutoff without touching any amplitude."""
    if dim < ket.dim:
        raise DimTooSmall("cannot embed into a smaller basis")
    amps = np.zeros((dim, dim), dtype=complex)
    amps[: ket.dim, : ket.dim] = ket.amplitudes
    return TwoModeKet(dim=dim, amplitudes=amps)


@dataclass(frozen=True)
class ModeOperator:
    """Truncated single-mode operator matrix."""

    kind: str
    dim: int
    matrix: np.ndarray = field(repr=False)
    theta: float | None = None


def annihilation_matrix(dim: int) -> np.ndarray:
    """<m|a|n> = sqrt(n) delta_{m,n-1} on the truncated basis."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def operator_matrix(kind: str, dim: int, theta: float | None = None) -> ModeOperator:
    """Truncated matrix for one of annihilate/create/number/x/p/x_theta.

    Truncation leaves every stored entry exact; only products of these
    matrices acquire artifacts near the cutoff.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if kind not in _OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; one of {_OPERATOR_KINDS}")
    a = annihilation_matrix(dim)
    if kind == "annihilate":
        mat = a
    elif kind == "create":
        mat = a.conj().T
    elif kind == "number":
        mat = (a.conj().T @ a).round(12)
    elif kind == "x":
        mat = a + a.conj().T
    elif kind == "p":
        mat = (a - a.conj().T) / 1j
    else:
        if theta is None:
            raise ValueError("x_theta requires a rotation angle")
        x = a + a.conj().T
        p = (a - a.conj().T) / 1j
        mat = math.cos(theta) * x + math.sin(theta) * p
    return ModeOperator(kind=kind, dim=dim, matrix=mat, theta=theta)


def commutator_check(n_power: int, dim: int) -> float:
    """Max deviation of [n, P^N] from its normally-ordered reduction.

    The reduction is i N (P^{N-1} X + (N-1) i P^{N-2}); truncation corrupts
    the last rows/columns, so the comparison is restricted to the upper-left
    (dim-N) x (dim-N) block.
    """
    if n_power < 1:
        raise ValueError("power must be >= 1")
    if dim < n_power + 10:
        raise ValueError("dim must leave at least 10 rows of truncation headroom")
    num = operator_matrix("number", dim).matrix
    p = operator_matrix("p", dim).matrix
    x = operator_matrix("x", dim).matrix
    p_pow = np.linalg.matrix_power(p, n_power)
    lhs = num @ p_pow - p_pow @ num
    rhs = 1j * n_power * (np.linalg.matrix_power(p, n_power - 1) @ x)
    if n_power >= 2:
        rhs += 1j * n_power * (n_power - 1) * 1j * np.linalg.matrix_power(p, n_power - 2)
    keep = dim - n_power
    return float(np.max(np.abs(lhs[:keep, :keep] - rhs[:keep, :keep])))
