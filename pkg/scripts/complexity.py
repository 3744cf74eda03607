"""Multiplication counts of the closed-form and definition-based gradients, M = 1..10."""

import argparse
import sys

from ma_uplink.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/complexity")
    args = ap.parse_args()
    sys.exit(main(["complexity", "--m-min", "1", "--m-max", "10", "--num-antennas", "30",
                   "--t-outer", "10", "--t-inner", "10", "--out", args.out]))
