"""Problem instances: configuration, validation, feasible regions, start points.

All lengths share the unit of the wavelength. The default ``wavelength=1``
makes positions read directly in wavelengths.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

__all__ = [
    "ScenarioConfig",
    "FeasibleRegions",
    "InfeasibleGeometryError",
    "InvalidScenarioError",
    "INIT_STRATEGIES",
    "rate_epsilons",
    "build_feasible_regions",
    "validate_scenario",
    "check_scenario",
    "initial_positions",
    "parse_angle",
    "load_scenario",
    "scenario_from_mapping",
    "reference_scenario",
]

SINE_TOL = 1e-12
INIT_STRATEGIES = ("midpoint", "endpoints_uniform", "seeded_random")


class InfeasibleGeometryError(ValueError):
    """Raised when the span cannot host N antennas at the minimum spacing."""


class InvalidScenarioError(ValueError):
    """Raised with every violated invariant of a scenario."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def rate_epsilons(rate_targets) -> np.ndarray:
    """SINR thresholds ``2**r - 1`` for rate targets in bits/s/Hz."""
    return np.exp2(np.asarray(rate_targets, dtype=float)) - 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    num_users: int
    num_antennas: int
    aoas: tuple[float, ...]
    rate_targets: tuple[float, ...]
    span: float
    min_spacing: float
    noise_power: float = 1.0
    wavelength: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "aoas", tuple(float(a) for a in self.aoas))
        object.__setattr__(self, "rate_targets", tuple(float(r) for r in self.rate_targets))

    @property
    def sines(self) -> np.ndarray:
        return np.sin(np.asarray(self.aoas))

    @property
    def epsilons(self) -> np.ndarray:
        return rate_epsilons(self.rate_targets)

    @property
    def omega(self) -> np.ndarray:
        """Diagonal of the per-user noise-times-threshold matrix."""
        return self.epsilons * self.noise_power

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def regions(self) -> FeasibleRegions:
        return build_feasible_regions(self.span, self.num_antennas, self.min_spacing)

    def with_(self, **changes) -> ScenarioConfig:
        """Copy with fields replaced; a scalar ``rate_targets`` is broadcast."""
        r = changes.get("rate_targets")
        if r is not None and np.ndim(r) == 0:
            changes["rate_targets"] = (float(r),) * self.num_users
        return replace(self, **changes)


@dataclass(frozen=True)
class FeasibleRegions:
    """Disjoint per-antenna movement boxes ``[lower[i], upper[i]]``."""

    lower: np.ndarray
    upper: np.ndarray
    min_spacing: float = field(default=0.0)

    @property
    def num_antennas(self) -> int:
        return len(self.lower)

    @property
    def span(self) -> float:
        return float(self.upper[-1])

    @property
    def width(self) -> float:
        return float(self.upper[0] - self.lower[0])

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def clip(self, x) -> np.ndarray:
        return np.minimum(np.maximum(np.asarray(x, dtype=float), self.lower), self.upper)

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))


def build_feasible_regions(span: float, num_antennas: int, min_spacing: float) -> FeasibleRegions:
    """Partition ``[0, span]`` into equal-width boxes separated by ``min_spacing``.

    Any placement with one antenna per box keeps neighbours at least
    ``min_spacing`` apart.
    """
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    if min_spacing < 0:
        raise ValueError("min_spacing must be >= 0")
    slack = span - (num_antennas - 1) * min_spacing
    if not slack > 0:
        raise InfeasibleGeometryError(
            f"span {span} <= (N-1)*d_min = {(num_antennas - 1) * min_spacing}: "
            "no room to move"
        )
    width = slack / num_antennas
    i = np.arange(num_antennas, dtype=float)
    lower = width * i + i * min_spacing
    upper = width * (i + 1) + i * min_spacing
    # pin the outer edges exactly
    lower[0] = 0.0
    upper[-1] = float(span)
    lower.setflags(write=False)
    upper.setflags(write=False)
    return FeasibleRegions(lower, upper, float(min_spacing))


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """Return every violated scenario invariant; empty means valid. Never raises."""
    errors = []
    try:
        M, N = int(cfg.num_users), int(cfg.num_antennas)
    except (TypeError, ValueError):
        return ["num_users and num_antennas must be integers"]
    if M < 1:
        errors.append("num_users must be positive")
    if N < 1:
        errors.append("num_antennas must be positive")
    if N < M:
        errors.append(f"N < M: {N} antennas cannot separate {M} users")
    if len(cfg.aoas) != M:
        errors.append(f"expected {M} aoas, got {len(cfg.aoas)}")
    if len(cfg.rate_targets) != M:
        errors.append(f"expected {M} rate_targets, got {len(cfg.rate_targets)}")

    def positive(name):
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            errors.append(f"{name} must be positive and finite, got {v!r}")
            return False
        return True

    ok_geom = positive("span")
    positive("wavelength")
    positive("noise_power")
    if not (math.isfinite(cfg.min_spacing) and cfg.min_spacing >= 0):
        errors.append(f"min_spacing must be >= 0, got {cfg.min_spacing!r}")
        ok_geom = False
    if any(not (math.isfinite(r) and r > 0) for r in cfg.rate_targets):
        errors.append("rate_targets must all be positive")

    aoas = np.asarray(cfg.aoas, dtype=float)
    if np.any(~np.isfinite(aoas)) or np.any(aoas <= -math.pi / 2) or np.any(aoas > math.pi / 2):
        errors.append("aoas must lie in (-pi/2, pi/2]")
    with np.errstate(invalid="ignore"):
        s = np.sin(aoas)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if abs(s[i] - s[j]) <= SINE_TOL:
                errors.append(f"duplicate sin θ: users {i + 1} and {j + 1}")

    if ok_geom and N >= 1 and not cfg.span > (N - 1) * cfg.min_spacing:
        errors.append(
            f"geometry infeasible: span {cfg.span} <= (N-1)*d_min = {(N - 1) * cfg.min_spacing}"
        )
    return errors


def check_scenario(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` unchanged if valid, else raise :class:`InvalidScenarioError`."""
    errors = validate_scenario(cfg)
    if errors:
        raise InvalidScenarioError(errors)
    return cfg


def initial_positions(regions: FeasibleRegions, strategy: str = "endpoints_uniform",
                      seed: int | None = None) -> np.ndarray:
    """Starting antenna positions inside ``regions``.

    ``endpoints_uniform`` spreads the antennas evenly over ``[0, L]`` and
    clamps into the boxes; for four antennas this is ``[0, L/3, 2L/3, L]``.
    ``seeded_random`` draws uniformly in each box.
    """
    N = regions.num_antennas
    if strategy == "midpoint":
        return regions.midpoints.copy()
    if strategy == "endpoints_uniform":
        if N == 1:
            return regions.lower.copy()
        return regions.clip(np.arange(N) * regions.span / (N - 1))
    if strategy == "seeded_random":
        if seed is None:
            raise ValueError("seeded_random needs a seed")
        u = np.random.default_rng(seed).random(N)
        return regions.lower + u * (regions.upper - regions.lower)
    raise ValueError(f"unknown init strategy {strategy!r}; choose from {INIT_STRATEGIES}")


# -- scenario files -----------------------------------------------------------

_ANGLE_RE = re.compile(
    r"^\s*(?P<sign>[-+])?\s*(?:(?P<num>\d+(?:\.\d*)?)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_angle(value: Any) -> float:
    """Radians from a number or a rational multiple of pi such as ``"3*pi/8"``."""
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = _ANGLE_RE.match(str(value))
    if m is None:
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"cannot parse angle {value!r}") from None
    num = float(m["num"]) if m["num"] else 1.0
    den = float(m["den"]) if m["den"] else 1.0
    sign = -1.0 if m["sign"] == "-" else 1.0
    return sign * num * math.pi / den


_FIELDS = ("num_users", "num_antennas", "wavelength", "aoas", "noise_power",
           "rate_targets", "span", "min_spacing")


def scenario_from_mapping(data: dict) -> ScenarioConfig:
    """Build a config from a parsed scenario document (unvalidated)."""
    if not isinstance(data, dict):
        raise ValueError("scenario document must be a mapping")
    unknown = set(data) - set(_FIELDS)
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    missing = [k for k in _FIELDS if k not in data and k not in ("wavelength", "noise_power")]
    if missing:
        raise ValueError(f"missing scenario keys: {missing}")
    aoas = data["aoas"]
    if not isinstance(aoas, (list, tuple)):
        raise ValueError("aoas must be a list")
    M = int(data["num_users"])
    rates = data["rate_targets"]
    if not isinstance(rates, (list, tuple)):
        rates = [rates] * M
    return ScenarioConfig(
        num_users=M,
        num_antennas=int(data["num_antennas"]),
        aoas=tuple(parse_angle(a) for a in aoas),
        rate_targets=tuple(float(r) for r in rates),
        span=float(data["span"]),
        min_spacing=float(data["min_spacing"]),
        noise_power=float(data.get("noise_power", 1.0)),
        wavelength=float(data.get("wavelength", 1.0)),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read a YAML scenario file. Raises ``ValueError`` on malformed input."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ValueError(f"{path}: not valid YAML: {exc}") from None
    try:
        return scenario_from_mapping(data)
    except (TypeError, KeyError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def reference_scenario(span: float = 4.5, num_antennas: int = 4, rate: float = 1.0) -> ScenarioConfig:
    """Three users at pi/16, pi/10, pi/2 with d_min = 0.5 wavelength and unit noise."""
    return ScenarioConfig(
        num_users=3,
        num_antennas=num_antennas,
        aoas=(math.pi / 16, math.pi / 10, math.pi / 2),
        rate_targets=(rate,) * 3,
        span=span,
        min_spacing=0.5,
        noise_power=1.0,
        wavelength=1.0,
    )
