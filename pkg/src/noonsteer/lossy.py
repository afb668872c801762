"""Lossy NOON density operators and their conditional/marginal reductions.

Loss is the beam-splitter vacuum-coupling model: each mode is transmitted
with efficiency eta and the reflected share is traced out. For a NOON input
the surviving state is two binomial diagonal ladders plus a pair of
N-quantum coherence terms damped by (eta_a eta_b)^{N/2}.

Everything here is dense: per-mode cutoffs stay <= 17, so the product space
is at most 289 x 289 and sparsity buys nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimTooSmall, InvalidOutcome, ZeroProbabilityConditioning
from .fock import TwoModeKet, noon_state, wavefunction_stack

#: Conditioning probabilities below this declare a failure instead of NaNs.
CONDITIONING_FLOOR = 1e-300


@dataclass(frozen=True)
class LossChannel:
    """Transmission efficiencies of the two beam-splitter loss couplings."""

    eta_a: float
    eta_b: float

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    @property
    def lossless(self) -> bool:
        return self.eta_a == 1.0 and self.eta_b == 1.0


LOSSLESS = LossChannel(1.0, 1.0)


def _validate_density(matrix: np.ndarray, size: int, what: str):
    if matrix.shape != (size, size):
        raise ValueError(f"{what} must be {size} x {size}")
    trace = complex(np.trace(matrix))
    if abs(trace - 1.0) > 1e-10:
        raise ValueError(f"{what} trace {trace} deviates from 1 beyond 1e-10")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-12:
        raise ValueError(f"{what} is not Hermitian within 1e-12")


@dataclass(frozen=True)
class TwoModeDensity:
    """Density matrix on the product basis |n_a>|n_b>, index n_a*dim + n_b."""

    dim: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        _validate_density(mat, self.dim**2, "two-mode density")
        object.__setattr__(self, "matrix", mat)

    def as_tensor(self) -> np.ndarray:
        """Shape (dim, dim, dim, dim): [j_a, k_b, j_a', k_b']."""
        d = self.dim
        return self.matrix.reshape(d, d, d, d)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class OneModeDensity:
    """Single-mode density matrix on the truncated Fock basis."""

    dim: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        _validate_density(mat, self.dim, "one-mode density")
        object.__setattr__(self, "matrix", mat)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def pure_density(ket: TwoModeKet) -> TwoModeDensity:
    vec = ket.amplitudes.ravel()
    return TwoModeDensity(dim=ket.dim, matrix=np.outer(vec, vec.conj()))


def binomial_ladder(n_quanta: int, eta: float) -> np.ndarray:
    """P(k survivors of n_quanta) for k = 0..n_quanta."""
    return np.array(
        [math.comb(n_quanta, k) * eta**k * (1.0 - eta) ** (n_quanta - k) for k in range(n_quanta + 1)]
    )


def lossy_noon_density(
    n_quanta: int, phi: float, channel: LossChannel, dim: int | None = None
) -> TwoModeDensity:
    """Two-mode density after independent beam-splitter loss on a NOON state."""
    if n_quanta < 1:
        raise ValueError("NOON order must be >= 1")
    if dim is None:
        dim = n_quanta + 12
    if dim <= n_quanta:
        raise DimTooSmall(f"dim={dim} cannot hold |{n_quanta}>")
    if channel.lossless:
        return pure_density(noon_state(n_quanta, phi, dim))

    def idx(na, nb):
        return na * dim + nb

    mat = np.zeros((dim**2, dim**2), dtype=complex)
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    ladder_b = binomial_ladder(n_quanta, channel.eta_b)
    for k in range(n_quanta + 1):
        mat[idx(k, 0), idx(k, 0)] += 0.5 * ladder_a[k]
        mat[idx(0, k), idx(0, k)] += 0.5 * ladder_b[k]
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    mat[idx(n_quanta, 0), idx(0, n_quanta)] += 0.5 * damping * np.exp(-1j * phi)
    mat[idx(0, n_quanta), idx(n_quanta, 0)] += 0.5 * damping * np.exp(1j * phi)
    return TwoModeDensity(dim=dim, matrix=mat)


def position_probability(n_quanta: int, channel: LossChannel, x) -> np.ndarray:
    """Probability density of an X outcome on mode a (phase-independent)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = wavefunction_stack(n_quanta, x)
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    branch_a = np.einsum("m,mx->x", ladder_a, psi**2)
    return 0.5 * (branch_a + psi[0] ** 2)


def conditional_density_given_x(
    n_quanta: int,
    phi: float,
    channel: LossChannel,
    x: float,
    dim: int | None = None,
) -> OneModeDensity:
    """Mode-b density conditioned on measuring X = x on mode a (normalized)."""
    if dim is None:
        dim = n_quanta + 12
    if dim <= n_quanta:
        raise DimTooSmall(f"dim={dim} cannot hold |{n_quanta}>")
    if not math.isfinite(x):
        raise ValueError("conditioning outcome must be finite")
    px = float(position_probability(n_quanta, channel, x)[0])
    if px < CONDITIONING_FLOOR:
        raise ZeroProbabilityConditioning(f"P(x={x}) = {px} below {CONDITIONING_FLOOR}")
    psi = wavefunction_stack(n_quanta, np.array([x]))[:, 0]
    ladder_a = binomial_ladder(n_quanta, channel.eta_a)
    ladder_b = binomial_ladder(n_quanta, channel.eta_b)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] += float(np.dot(ladder_a, psi**2))
    for k in range(n_quanta + 1):
        mat[k, k] += ladder_b[k] * psi[0] ** 2
    damping = math.sqrt(channel.eta_a * channel.eta_b) ** n_quanta
    coherence = damping * psi[n_quanta] * psi[0]
    mat[0, n_quanta] += coherence * np.exp(-1j * phi)
    mat[n_quanta, 0] += coherence * np.exp(1j * phi)
    return OneModeDensity(dim=dim, matrix=mat / (2.0 * px))


def number_marginal_a(n_quanta: int, channel: LossChannel) -> np.ndarray:
    """P(n_a = m) for m = 0..N: half a binomial ladder plus half at m = 0."""
    probs = 0.5 * binomial_ladder(n_quanta, channel.eta_a)
    probs[0] += 0.5
    return probs


def conditional_number_b(n_quanta: int, channel: LossChannel, m: int) -> np.ndarray:
    """P(n_b | n_a = m) for n_b = 0..N.

    Any m > 0 pins n_b = 0 (loss never adds quanta); m = 0 mixes the fully
    lost a-branch with the b-mode binomial ladder.
    """
    if not 0 <= m <= n_quanta:
        raise InvalidOutcome(f"outcome m={m} outside [0, {n_quanta}]")
    table = np.zeros(n_quanta + 1)
    if m > 0:
        table[0] = 1.0
        return table
    table[0] += 0.5 * (1.0 - channel.eta_a) ** n_quanta
    table += 0.5 * binomial_ladder(n_quanta, channel.eta_b)
    prob_zero = 0.5 * (1.0 - channel.eta_a) ** n_quanta + 0.5
    return table / prob_zero


# -- generic machinery over arbitrary two-mode densities ----------------------
#
# These take any TwoModeDensity, not just the NOON loss family; they back the
# matrix-oracle cross-checks and the separable-state property tests.


def number_joint(rho: TwoModeDensity) -> np.ndarray:
    """Joint P(n_a, n_b) from the density diagonal, shape (dim, dim)."""
    joint = np.diag(rho.matrix).real.reshape(rho.dim, rho.dim).copy()
    joint[np.abs(joint) < 1e-15] = 0.0
    return joint


def partial_trace_b(rho: TwoModeDensity) -> OneModeDensity:
    tensor = rho.as_tensor()
    return OneModeDensity(dim=rho.dim, matrix=np.einsum("jklk->jl", tensor))


def partial_trace_a(rho: TwoModeDensity) -> OneModeDensity:
    tensor = rho.as_tensor()
    return OneModeDensity(dim=rho.dim, matrix=np.einsum("jkjl->kl", tensor))


def conditioned_b_blocks(rho: TwoModeDensity, x: np.ndarray):
    """Unnormalized mode-b blocks <x|rho|x> for an array of a-mode outcomes.

    Returns (blocks, px): blocks has shape (len(x), dim, dim) and satisfies
    trace(blocks[i]) = px[i], so conditional moments can be formed in the
    product form px * moment without dividing by small probabilities.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = wavefunction_stack(rho.dim - 1, x)  # (dim, nx)
    tensor = rho.as_tensor()
    blocks = np.einsum("jx,lx,jkls->xks", psi, psi, tensor, optimize=True)
    px = np.einsum("xkk->x", blocks).real
    return blocks, px
