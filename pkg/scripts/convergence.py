"""Objective traces of the optimizer for spans 2.5, 3.5 and 4.5 wavelengths."""

import argparse
import sys
from pathlib import Path

from ma_uplink.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/convergence")
    ap.add_argument("--armijo", default=None, help="override the sufficient-decrease coefficient")
    args = ap.parse_args()
    argv = ["convergence", "--scenario", str(ROOT / "scenarios" / "reference.yaml"),
            "--spans", "2.5,3.5,4.5", "--out", args.out]
    if args.armijo is not None:
        argv += ["--armijo", args.armijo]
    sys.exit(main(argv))
