#!/usr/bin/env python3
"""Audit the shot-level sampler against the analytic pipeline.

For each requested seed, estimates every steering component and prints the
pull (deviation over standard error) against the analytic value. Pulls
should scatter within a few units; a drifting mean signals estimator bias.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from noonsteer.cli import parse_phase  # noqa: E402
from noonsteer.inferred import (  # noqa: E402
    inferred_commutator_modulus,
    inferred_number_variance,
    inferred_variance_quadrature,
)
from noonsteer.lossy import LossChannel  # noqa: E402
from noonsteer.sampling import estimate_steering  # noqa: E402
from noonsteer.steering import steering_functional  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--phi", default="pi/2")
    parser.add_argument("--eta-a", type=float, default=0.95)
    parser.add_argument("--eta-b", type=float, default=0.95)
    parser.add_argument("--criterion", choices=["x", "p"], default="p")
    parser.add_argument("--shots", type=int, default=1_000_000)
    parser.add_argument("--bins", type=int, default=128)
    parser.add_argument("--seeds", type=int, default=5)
    args = parser.parse_args()

    phi = parse_phase(args.phi)
    channel = LossChannel(args.eta_a, args.eta_b)
    var_n = inferred_number_variance(args.n, channel)
    var_q = inferred_variance_quadrature(args.n, phi, channel, args.criterion)
    modulus = inferred_commutator_modulus(args.n, phi, channel, args.criterion)
    e_true = steering_functional(args.n, phi, channel, args.criterion).E

    print(f"analytic: var_n={var_n:.6g} var_q={var_q:.6g} modulus={modulus:.6g} E={e_true:.6g}")
    header = f"{'seed':>4} {'E_hat':>10} {'pull_E':>7} {'pull_vn':>8} {'pull_vq':>8} {'pull_c':>7}"
    print(header)
    for seed in range(args.seeds):
        est = estimate_steering(
            args.n, phi, channel, args.criterion,
            shots=args.shots, bins=args.bins, seed=seed,
        )
        pulls = (
            (est.e_hat - e_true) / est.stderr,
            (est.var_number.value - var_n) / est.var_number.stderr,
            (est.var_quadrature_n.value - var_q) / est.var_quadrature_n.stderr,
            (est.commutator_modulus.value - modulus) / est.commutator_modulus.stderr,
        )
        print(f"{seed:>4} {est.e_hat:>10.5f} " + " ".join(f"{p:>7.2f}" for p in pulls))
    return 0


if __name__ == "__main__":
    sys.exit(main())
