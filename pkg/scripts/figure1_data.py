#!/usr/bin/env python3
"""Regenerate the symmetric-loss steering curves (E vs eta for N = 1..5).

Writes the same CSV as ``noonsteer sweep --preset fig1``. Odd N runs at
phase 0, even N at pi/2, P criterion throughout.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from noonsteer.cli import main as cli_main  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", "-o", default="data/figure1.csv")
    args = parser.parse_args()
    return cli_main(["sweep", "--preset", "fig1", "--output", args.output])


if __name__ == "__main__":
    sys.exit(main())
