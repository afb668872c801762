#!/usr/bin/env python3
"""Regenerate the two-quantum loss-asymmetry grid: E over (eta_a, eta_b).

Writes the same CSV as ``noonsteer sweep --preset fig2`` (N = 2, phase pi/2,
P criterion, 41 x 41 grid on [0.8, 1.0]^2).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from noonsteer.cli import main as cli_main  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", "-o", default="data/figure2.csv")
    args = parser.parse_args()
    return cli_main(["sweep", "--preset", "fig2", "--output", args.output])


if __name__ == "__main__":
    sys.exit(main())
