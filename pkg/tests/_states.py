"""Fixed-seed separable two-mode states for the no-false-positive suite."""

import numpy as np

from noonsteer.lossy import TwoModeDensity

SUITE_SEED = 20240817
SUITE_DIM = 12


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent-state amplitudes, renormalized on the cutoff."""
    n = np.arange(dim)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, dim))]))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(alpha) - 0.5 * log_fact) if alpha != 0 else None
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
    return amps / np.linalg.norm(amps)


def fock_vector(k: int, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[k] = 1.0
    return vec


def product_density(vec_a: np.ndarray, vec_b: np.ndarray) -> np.ndarray:
    joint = np.outer(vec_a, vec_b).ravel()
    return np.outer(joint, joint.conj())


def separable_suite(count: int = 20, dim: int = SUITE_DIM) -> list[TwoModeDensity]:
    """Products and mixtures of coherent/Fock states, reproducible by seed."""
    rng = np.random.default_rng(SUITE_SEED)

    def random_alpha(radius=1.1):
        r = radius * np.sqrt(rng.random())
        angle = 2 * np.pi * rng.random()
        return r * np.exp(1j * angle)

    states = []
    for _ in range(8):  # coherent x coherent
        states.append(product_density(coherent_vector(random_alpha(), dim),
                                       coherent_vector(random_alpha(), dim)))
    for j, k in [(0, 0), (1, 0), (0, 2), (2, 1)]:  # Fock x Fock
        states.append(product_density(fock_vector(j, dim), fock_vector(k, dim)))
    for k in (0, 1, 2, 3):  # coherent x Fock
        states.append(product_density(coherent_vector(random_alpha(), dim),
                                       fock_vector(k, dim)))
    while len(states) < count:  # mixtures of coherent products
        parts = rng.integers(2, 4)
        weights = rng.random(parts)
        weights /= weights.sum()
        mix = np.zeros((dim * dim, dim * dim), dtype=complex)
        for w in weights:
            mix += w * product_density(coherent_vector(random_alpha(), dim),
                                       coherent_vector(random_alpha(), dim))
        states.append(mix)
    return [TwoModeDensity(dim=dim, matrix=m) for m in states[:count]]
