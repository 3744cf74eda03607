"""Fixed-position (FPA) and random-position (RPA) antenna benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objective import SingularGainError, total_power_objective
from .scenario import ScenarioConfig

__all__ = ["RpaEstimate", "fpa_positions", "fpa_power", "rpa_average_power"]


@dataclass(frozen=True)
class RpaEstimate:
    mean_power: float
    std_error: float
    num_draws: int
    rejected: int = 0


def fpa_positions(cfg: ScenarioConfig) -> np.ndarray:
    """Conventional array: antennas packed at the minimum spacing from the origin."""
    return np.arange(cfg.num_antennas) * cfg.min_spacing


def fpa_power(cfg: ScenarioConfig) -> float:
    return total_power_objective(fpa_positions(cfg), cfg)


def rpa_average_power(cfg: ScenarioConfig, num_draws: int = 10_000, seed: int = 0,
                      max_rejections: int | None = None) -> RpaEstimate:
    """Average total power with every antenna uniform in its own box.

    Draw ``k`` uses the stream ``SeedSequence([seed, k])``, so the estimate
    does not depend on evaluation order. A draw whose gain matrix is
    numerically singular is replaced by the next sample from the same
    stream and counted in ``rejected``.
    """
    if num_draws < 1:
        raise ValueError("num_draws must be >= 1")
    if max_rejections is None:
        max_rejections = num_draws
    regions = cfg.regions()
    lo, width = regions.lower, regions.upper - regions.lower
    powers = np.empty(num_draws)
    rejected = 0
    for k in range(num_draws):
        rng = np.random.default_rng([seed, k])
        while True:
            x = lo + rng.random(cfg.num_antennas) * width
            try:
                powers[k] = total_power_objective(x, cfg)
                break
            except SingularGainError:
                rejected += 1
                if rejected > max_rejections:
                    raise
    se = float(powers.std(ddof=1) / np.sqrt(num_draws)) if num_draws > 1 else 0.0
    return RpaEstimate(float(powers.mean()), se, num_draws, rejected)
