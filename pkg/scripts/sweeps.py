"""Proposed vs FPA vs RPA over antenna count, rate target and span."""

import argparse
import sys
from pathlib import Path

from ma_uplink.cli import main

ROOT = Path(__file__).resolve().parents[1]
SPECS = ("sweep_antennas_L4.5", "sweep_antennas_L5.5", "sweep_rate", "sweep_span")

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/sweeps")
    ap.add_argument("--only", choices=SPECS, action="append", help="run a subset")
    args = ap.parse_args()
    worst = 0
    for name in args.only or SPECS:
        code = main(["sweep", "--spec", str(ROOT / "scenarios" / f"{name}.yaml"), "--out", args.out])
        worst = max(worst, code)
    sys.exit(worst)
