"""Gradient/identity cross-checks at 100 points and the Monte-Carlo SINR check."""

import argparse
import sys
from pathlib import Path

from ma_uplink.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/checks")
    ap.add_argument("--symbols", default="1000000")
    args = ap.parse_args()
    reference = str(ROOT / "scenarios" / "reference.yaml")
    a = main(["gradcheck", "--scenario", reference, "--points", "100", "--out", args.out])
    b = main(["validate-sinr", "--scenario", reference, "--symbols", args.symbols, "--out", args.out])
    sys.exit(max(a, b))
