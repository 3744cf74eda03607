"""Projected gradient descent over the antenna boxes with backtracking.

Each outer iteration eigendecomposes the gain matrix, forms the closed-form
gradient, and backtracks ``δ ← ρδ`` from ``delta0`` until

    f(P(x - δ∇f)) <= f(x) - armijo · δ · ||∇f||²

where ``P`` clamps each coordinate into its box. The loop stops when the
objective changes by at most ``tau`` between iterates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import min_powers
from .objective import gain_eigensystem, gradient_closed_form, total_power_objective
from .scenario import FeasibleRegions, ScenarioConfig, check_scenario, initial_positions

__all__ = [
    "OptimizerOptions",
    "IterationRecord",
    "OptimizationTrace",
    "OptimizationResult",
    "OptimizationError",
    "LineSearchExhausted",
    "project",
    "backtracking_step",
    "optimize",
    "optimize_multistart",
    "flop_count_estimate",
    "UNIT_ARMIJO",
]

# unit sufficient-decrease coefficient: f(x+) <= f(x) - delta*|g|^2
UNIT_ARMIJO = 1.0


@dataclass(frozen=True)
class OptimizerOptions:
    delta0: float = 1.0
    rho: float = 0.5
    tau: float = 1e-7
    max_outer: int = 1000
    max_inner: int = 50
    # UNIT_ARMIJO stalls as soon as the objective is locally convex, see README
    armijo: float = 1e-4
    init_strategy: str = "endpoints_uniform"
    seed: int | None = None
    degenerate_policy: str = "trace_fallback"

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not self.tau >= 0:
            raise ValueError("tau must be >= 0")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0 < self.armijo <= 1:
            raise ValueError("armijo must lie in (0, 1]")
        if self.degenerate_policy not in ("trace_fallback", "abort"):
            raise ValueError(f"unknown degenerate_policy {self.degenerate_policy!r}")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    objective: float
    step: float  # δ that produced this iterate; 0 for the start point
    grad_norm: float  # ||∇f|| at this iterate
    positions: np.ndarray
    trials: int
    flops: float


@dataclass
class OptimizationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    status: str = "running"  # converged | outer_cap | error
    line_search_exhausted: bool = False

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    def __len__(self):
        return len(self.records)


@dataclass
class OptimizationResult:
    positions: np.ndarray
    objective: float
    powers: np.ndarray
    trace: OptimizationTrace

    @property
    def status(self) -> str:
        return self.trace.status


class OptimizationError(RuntimeError):
    def __init__(self, iteration: int, cause: Exception):
        self.iteration = iteration
        self.cause = cause
        super().__init__(f"iteration {iteration}: {cause}")


class LineSearchExhausted(RuntimeError):
    """No trial step passed the sufficient-decrease test."""


def project(x, regions: FeasibleRegions) -> np.ndarray:
    """Nearest point of the box set: clamp each coordinate into its own box."""
    return regions.clip(x)


def backtracking_step(x_t, g, f_t: float, opts: OptimizerOptions, cfg: ScenarioConfig,
                      regions: FeasibleRegions, objective=None):
    """Shrink δ from ``opts.delta0`` until the projected step decreases enough.

    Returns ``(x_next, f_next, delta, trials)``. Raises
    :class:`LineSearchExhausted` after ``opts.max_inner`` failed trials.
    """
    if objective is None:
        objective = total_power_objective
    g = np.asarray(g, dtype=float)
    gg = float(g @ g)
    delta = opts.delta0
    for trial in range(1, opts.max_inner + 1):
        x_new = project(x_t - delta * g, regions)
        f_new = objective(x_new, cfg)
        if f_new <= f_t - opts.armijo * delta * gg:
            return x_new, f_new, delta, trial
        delta *= opts.rho
    raise LineSearchExhausted(
        f"{opts.max_inner} trials failed; last δ={delta / opts.rho:.3e}, ||g||²={gg:.3e}"
    )


def _iteration_flops(M: int, N: int, trials: int) -> float:
    return float(M**3 + M**2 * N + trials * N)


def optimize(cfg: ScenarioConfig, opts: OptimizerOptions = OptimizerOptions(),
             x0=None) -> OptimizationResult:
    """Minimise total transmit power over the antenna positions.

    Line-search exhaustion ends the run as converged (the iterate stays put,
    so the objective change is zero) and sets ``trace.line_search_exhausted``.
    Singular gain matrices raise :class:`OptimizationError` carrying the
    iteration index.
    """
    check_scenario(cfg)
    regions = cfg.regions()
    if x0 is None:
        x0 = initial_positions(regions, opts.init_strategy, opts.seed)
    x = project(np.asarray(x0, dtype=float), regions)
    M, N = cfg.num_users, cfg.num_antennas
    trace = OptimizationTrace()

    def grad_at(x, t):
        try:
            eig = gain_eigensystem(x, cfg)
            f = float(np.sum(1.0 / eig.eigenvalues))
            g = gradient_closed_form(x, cfg, opts.degenerate_policy, eig=eig)
        except np.linalg.LinAlgError as exc:
            trace.status = "error"
            raise OptimizationError(t, exc) from exc
        return f, g

    f, g = grad_at(x, 0)
    trace.records.append(IterationRecord(0, f, 0.0, float(np.linalg.norm(g)), x.copy(), 0, 0.0))
    for t in range(1, opts.max_outer + 1):
        try:
            x_new, f_new, delta, trials = backtracking_step(x, g, f, opts, cfg, regions)
        except LineSearchExhausted:
            trace.status = "converged"
            trace.line_search_exhausted = True
            break
        except np.linalg.LinAlgError as exc:
            trace.status = "error"
            raise OptimizationError(t, exc) from exc
        _, g_new = grad_at(x_new, t)
        trace.records.append(IterationRecord(
            t, f_new, delta, float(np.linalg.norm(g_new)), x_new.copy(), trials,
            _iteration_flops(M, N, trials),
        ))
        converged = abs(f_new - f) <= opts.tau
        x, f, g = x_new, f_new, g_new
        if converged:
            trace.status = "converged"
            break
    else:
        trace.status = "outer_cap"
    return OptimizationResult(positions=x, objective=f, powers=min_powers(x, cfg), trace=trace)


def optimize_multistart(cfg: ScenarioConfig, opts: OptimizerOptions = OptimizerOptions(),
                        seeds=()) -> OptimizationResult:
    """Best of one run from ``opts.init_strategy`` plus one seeded random start per seed."""
    best = optimize(cfg, opts)
    regions = cfg.regions()
    for s in seeds:
        res = optimize(cfg, opts, x0=initial_positions(regions, "seeded_random", s))
        if res.objective < best.objective:
            best = res
    return best


def flop_count_estimate(M: int, N: int, t_outer: int, t_inner: int,
                        method: str = "closed_form") -> float:
    """Complex multiplications for a full run, closed-form vs difference-quotient gradient."""
    if min(M, N, t_outer, t_inner) < 1:
        raise ValueError("all sizes must be >= 1")
    if method == "closed_form":
        grad = M**2 * N
    elif method == "definition_based":
        grad = M**3 * N
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(t_outer * (M**3 + grad + t_inner * N))
