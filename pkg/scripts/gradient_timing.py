"""Wall-clock time of the closed-form, trace-form and finite-difference gradients vs N."""

import argparse
import math
import timeit

import numpy as np

from ma_uplink.objective import gradient_closed_form, gradient_finite_difference, gradient_trace_form
from ma_uplink.scenario import ScenarioConfig, initial_positions

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=3)
    ap.add_argument("--antennas", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    M = args.users
    aoas = tuple(np.linspace(-math.pi / 3, math.pi / 3, M))
    print(f"{'N':>4} {'closed_form_ms':>15} {'trace_form_ms':>14} {'finite_diff_ms':>15}")
    for N in args.antennas:
        cfg = ScenarioConfig(M, N, aoas, (1.0,) * M, span=N * 1.0, min_spacing=0.5)
        x = initial_positions(cfg.regions(), "midpoint")
        times = [min(timeit.repeat(lambda: fn(x, cfg), number=1, repeat=args.repeat)) * 1e3
                 for fn in (gradient_closed_form, gradient_trace_form, gradient_finite_difference)]
        print(f"{N:>4} {times[0]:>15.3f} {times[1]:>14.3f} {times[2]:>15.3f}")
