"""Experiment runners behind the CLI: convergence traces, sweeps, complexity, self-checks.

Every runner returns plain records; the ``write_*`` helpers turn them into
CSV with fixed columns. Floats are written with ``repr`` so repeated runs
give byte-identical files. Wall-clock information goes only into the
``*.meta.json`` sidecars.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import yaml

from .baselines import fpa_power, rpa_average_power
from .channel import (
    channel_matrix,
    min_powers,
    simulate_uplink,
    sinr_general,
    sinr_zf,
    zf_combiner,
)
from .objective import (
    gradient_closed_form,
    gradient_finite_difference,
    gradient_trace_form,
    objective_faces,
)
from .optimizer import (
    OptimizationResult,
    OptimizerOptions,
    flop_count_estimate,
    optimize,
    optimize_multistart,
)
from .scenario import (
    ScenarioConfig,
    check_scenario,
    initial_positions,
    load_scenario,
)

TRACE_COLUMNS = ("iter", "objective", "step", "grad_norm")
SWEEP_COLUMNS = ("value", "proposed", "fpa", "rpa_mean", "rpa_se", "iters", "status")
COMPLEXITY_COLUMNS = ("M", "closed_form", "definition_based", "ratio")
GRADCHECK_COLUMNS = ("point", "fd_rel", "trace_rel", "objective_rel", "zf_resid", "sinr_rel",
                     "tight_rel")
SINR_COLUMNS = ("user", "power", "analytic", "empirical", "rel_err", "band")

SWEEP_PARAMETERS = ("num_antennas", "rate_target", "span")

# gradcheck tolerances
FD_TOL = 1e-5
TRACE_TOL = 1e-9
FACE_TOL = 1e-9
ZF_TOL = 1e-9
FD_FLOOR = 1e-8


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_metadata(path: Path, **info) -> Path:
    """Sidecar with the run timestamp; kept out of the CSVs for reproducibility."""
    info["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    Path(path).write_text(json.dumps(info, indent=2, default=_jsonable) + "\n")
    return Path(path)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


# -- convergence --------------------------------------------------------------

def trace_rows(result: OptimizationResult):
    return [(r.iteration, r.objective, r.step, r.grad_norm) for r in result.trace.records]


def run_convergence(cfg: ScenarioConfig, spans: Sequence[float],
                    opts: OptimizerOptions = OptimizerOptions()) -> dict[float, OptimizationResult]:
    """One optimizer run per span, each started from ``opts.init_strategy``."""
    return {float(L): optimize(cfg.with_(span=float(L)), opts) for L in spans}


def convergence_checks(results: dict[float, OptimizationResult]) -> dict:
    """Monotone traces, and a wider span never ending worse than a narrower one."""
    monotone = {str(L): bool(np.all(np.diff(r.trace.objectives) <= 0)) for L, r in results.items()}
    spans = sorted(results)
    finals = [results[L].objective for L in spans]
    ordered = all(b <= a for a, b in zip(finals, finals[1:]))
    return {
        "monotone": monotone,
        "span_ordering": ordered,
        "final_objective": {str(L): results[L].objective for L in spans},
        "status": {str(L): results[L].status for L in spans},
        "passed": all(monotone.values()) and ordered,
    }


def write_convergence(results: dict[float, OptimizationResult], out: Path,
                      plot: bool = True) -> list[Path]:
    out = Path(out)
    paths = [write_csv(out / f"convergence_L{L:g}.csv", TRACE_COLUMNS, trace_rows(r))
             for L, r in results.items()]
    if plot:
        from .plotting import plot_convergence
        plot_convergence(results, out / "convergence.png")
    return paths


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ScenarioConfig
    seeds: tuple[int, ...] = ()
    rpa_draws: int = 10_000
    rpa_seed: int = 0

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.rpa_draws < 1:
            raise ValueError("rpa_draws must be >= 1")

    def scenario_at(self, value) -> ScenarioConfig:
        if self.parameter == "num_antennas":
            return self.base.with_(num_antennas=int(value))
        if self.parameter == "rate_target":
            return self.base.with_(rate_targets=float(value))
        return self.base.with_(span=float(value))


def load_sweep_spec(path: str | Path) -> SweepSpec:
    """YAML sweep spec; ``scenario`` is resolved relative to the spec file."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ValueError(f"{path}: not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: sweep spec must be a mapping")
    known = {"scenario", "overrides", "parameter", "values", "seeds", "rpa_draws", "rpa_seed"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{path}: unknown sweep keys {sorted(unknown)}")
    for key in ("scenario", "parameter", "values"):
        if key not in data:
            raise ValueError(f"{path}: missing sweep key {key!r}")
    base = load_scenario(path.parent / data["scenario"])
    overrides = data.get("overrides") or {}
    if overrides:
        base = base.with_(**overrides)
    return SweepSpec(
        parameter=data["parameter"],
        values=tuple(data["values"]),
        base=base,
        seeds=tuple(int(s) for s in data.get("seeds", ())),
        rpa_draws=int(data.get("rpa_draws", 10_000)),
        rpa_seed=int(data.get("rpa_seed", 0)),
    )


@dataclass
class RunRecord:
    value: float
    proposed: float
    fpa: float
    rpa_mean: float
    rpa_se: float
    iters: int
    status: str

    def row(self):
        return (self.value, self.proposed, self.fpa, self.rpa_mean, self.rpa_se,
                self.iters, self.status)


def _derived_seeds(seeds: Sequence[int], point: int) -> list:
    return [[int(s), point] for s in seeds]


def run_sweep(spec: SweepSpec, opts: OptimizerOptions = OptimizerOptions(),
              progress: Callable[[str], None] | None = None) -> list[RunRecord]:
    """FPA, RPA and the optimizer at every sweep value.

    The optimizer runs from ``opts.init_strategy`` plus one random start per
    seed and keeps the best. A point that fails records ``status="error: ..."``
    and the sweep carries on; a point where the optimizer loses to a
    benchmark gets ``;dominance_violation`` appended to its status.
    """
    records = []
    for i, value in enumerate(spec.values):
        cfg = spec.scenario_at(value)
        try:
            check_scenario(cfg)
            fpa = fpa_power(cfg)
            rpa = rpa_average_power(cfg, spec.rpa_draws, seed=spec.rpa_seed)
            res = optimize_multistart(cfg, opts, seeds=_derived_seeds(spec.seeds, i))
            status = res.status
            if res.objective > fpa or res.objective > rpa.mean_power:
                status += ";dominance_violation"
            rec = RunRecord(value, res.objective, fpa, rpa.mean_power, rpa.std_error,
                            res.trace.iterations, status)
        except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            nan = float("nan")
            rec = RunRecord(value, nan, nan, nan, nan, 0, f"error: {exc}".replace("\n", " "))
        if progress:
            progress(f"{spec.parameter}={value}: {rec.status} proposed={rec.proposed:.6g}")
        records.append(rec)
    return records


def _strictly(seq, decreasing: bool) -> bool:
    pairs = list(zip(seq, seq[1:]))
    return all((b < a) if decreasing else (b > a) for a, b in pairs)


def sweep_checks(parameter: str, records: Sequence[RunRecord], plateau_tol: float = 0.01) -> dict:
    """Benchmark dominance plus the trend expected for the swept parameter."""
    ok_rows = [r for r in records if not r.status.startswith("error")]
    dominance = all(r.proposed <= r.fpa and r.proposed <= r.rpa_mean for r in ok_rows)
    checks = {
        "parameter": parameter,
        "dominance": dominance and len(ok_rows) == len(records),
        "errors": len(records) - len(ok_rows),
    }
    proposed = [r.proposed for r in records]
    if parameter == "num_antennas":
        checks["proposed_strictly_decreasing"] = _strictly(proposed, decreasing=True)
    elif parameter == "rate_target":
        checks["proposed_strictly_increasing"] = _strictly(proposed, decreasing=False)
        checks["fpa_strictly_increasing"] = _strictly([r.fpa for r in records], decreasing=False)
        checks["rpa_strictly_increasing"] = _strictly([r.rpa_mean for r in records], decreasing=False)
    elif parameter == "span" and len(records) >= 2:
        a, b = proposed[-2], proposed[-1]
        rel = abs(b - a) / min(a, b)
        checks["plateau_rel_diff"] = rel
        checks["plateau"] = rel < plateau_tol
    checks["passed"] = all(v for k, v in checks.items()
                           if isinstance(v, bool))
    return checks


def write_sweep(spec: SweepSpec, records: Sequence[RunRecord], out: Path, plot: bool = True,
                stem: str = "sweep") -> tuple[Path, dict]:
    out = Path(out)
    path = write_csv(out / f"{stem}.csv", SWEEP_COLUMNS, (r.row() for r in records))
    checks = sweep_checks(spec.parameter, records)
    (out / f"{stem}_checks.json").write_text(json.dumps(checks, indent=2) + "\n")
    if plot:
        from .plotting import plot_sweep
        plot_sweep(spec.parameter, records, out / f"{stem}.png")
    return path, checks


# -- complexity ---------------------------------------------------------------

def complexity_rows(m_values: Sequence[int], num_antennas: int = 30, t_outer: int = 10,
                    t_inner: int = 10):
    rows = []
    for M in m_values:
        cf = flop_count_estimate(M, num_antennas, t_outer, t_inner, "closed_form")
        db = flop_count_estimate(M, num_antennas, t_outer, t_inner, "definition_based")
        rows.append((int(M), cf, db, db / cf))
    return rows


# -- gradient / objective self-check ------------------------------------------

def _max_rel(a: np.ndarray, b: np.ndarray, floor: float = 0.0) -> float:
    """Largest per-entry ``|a-b|/|b|`` over entries with ``|b| > floor``."""
    mask = np.abs(b) > floor
    if not np.any(mask):
        return float(np.max(np.abs(a - b))) if a.size else 0.0
    return float(np.max(np.abs(a[mask] - b[mask]) / np.abs(b[mask])))


def _norm_rel(a: np.ndarray, b: np.ndarray) -> float:
    """``||a-b||_∞ / ||b||_∞``; absolute when ``b`` vanishes."""
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    return diff / scale if scale > 0 else diff


@dataclass
class GradcheckReport:
    rows: list = field(default_factory=list)
    max_fd_rel: float = 0.0
    max_trace_rel: float = 0.0
    max_objective_rel: float = 0.0
    max_zf_resid: float = 0.0
    max_sinr_rel: float = 0.0
    max_tight_rel: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def random_feasible_points(cfg: ScenarioConfig, num_points: int, seed: int) -> np.ndarray:
    regions = cfg.regions()
    return np.array([initial_positions(regions, "seeded_random", [seed, k])
                     for k in range(num_points)])


def gradcheck(cfg: ScenarioConfig, num_points: int = 100, seed: int = 0,
              closed_form: Callable = gradient_closed_form) -> GradcheckReport:
    """Cross-check gradients, power identities and ZF algebra at random feasible points.

    ``closed_form`` is injectable so a deliberately broken gradient can be
    shown to fail.
    """
    check_scenario(cfg)
    rep = GradcheckReport()
    rng = np.random.default_rng([seed, 1])
    for k, x in enumerate(random_feasible_points(cfg, num_points, seed)):
        g = closed_form(x, cfg)
        g_fd = gradient_finite_difference(x, cfg, 1e-6, "central")
        g_tr = gradient_trace_form(x, cfg)
        fd_rel = _max_rel(g, g_fd, FD_FLOOR)
        tr_rel = _norm_rel(g, g_tr)
        faces = np.array(list(objective_faces(x, cfg).values()))
        obj_rel = float((faces.max() - faces.min()) / faces.min())
        h = channel_matrix(x, cfg)
        w = zf_combiner(h)
        zf_resid = float(np.linalg.norm(w.conj().T @ h - np.eye(cfg.num_users)))
        p = rng.uniform(0.1, 10.0, cfg.num_users)
        s_gen = sinr_general(w, h, p, cfg.noise_power)
        s_zf = sinr_zf(x, cfg, p)
        sinr_rel = float(np.max(np.abs(s_gen - s_zf) / s_zf))
        tight = sinr_zf(x, cfg, min_powers(x, cfg))
        tight_rel = float(np.max(np.abs(tight - cfg.epsilons) / cfg.epsilons))
        rep.rows.append((k, fd_rel, tr_rel, obj_rel, zf_resid, sinr_rel, tight_rel))
        bad = []
        if fd_rel > FD_TOL:
            bad.append("finite_difference")
        if tr_rel > TRACE_TOL:
            bad.append("trace_form")
        if obj_rel > FACE_TOL:
            bad.append("objective_faces")
        if zf_resid > ZF_TOL:
            bad.append("zf_residual")
        if sinr_rel > ZF_TOL:
            bad.append("sinr_consistency")
        if tight_rel > ZF_TOL:
            bad.append("rate_tightness")
        if bad:
            rep.failures.append({"point": k, "x": x.tolist(), "checks": bad,
                                 "closed_form": g.tolist(), "finite_difference": g_fd.tolist(),
                                 "trace_form": g_tr.tolist()})
        rep.max_fd_rel = max(rep.max_fd_rel, fd_rel)
        rep.max_trace_rel = max(rep.max_trace_rel, tr_rel)
        rep.max_objective_rel = max(rep.max_objective_rel, obj_rel)
        rep.max_zf_resid = max(rep.max_zf_resid, zf_resid)
        rep.max_sinr_rel = max(rep.max_sinr_rel, sinr_rel)
        rep.max_tight_rel = max(rep.max_tight_rel, tight_rel)
    return rep


# -- Monte-Carlo SINR ---------------------------------------------------------

def sinr_band(num_symbols: int) -> float:
    """Relative tolerance: 2% from a million symbols up, widening as 1/sqrt(n) below."""
    return max(0.02, 0.05 * math.sqrt(1000.0 / num_symbols))


@dataclass
class SinrReport:
    rows: list
    band: float
    interference_to_signal: float

    @property
    def passed(self) -> bool:
        return all(r[4] <= self.band or (r[2] == 0 and r[3] == 0) for r in self.rows)


def validate_sinr(cfg: ScenarioConfig, num_symbols: int = 1_000_000, seed: int = 0, x=None,
                  power_scale: float = 1.0, band: float | None = None) -> SinrReport:
    """Empirical vs analytic SINR at (scaled) minimum powers."""
    check_scenario(cfg)
    if x is None:
        x = initial_positions(cfg.regions(), "endpoints_uniform")
    p = min_powers(x, cfg) * power_scale
    analytic = sinr_zf(x, cfg, p)
    sample = simulate_uplink(x, cfg, p, num_symbols, seed)
    emp = sample.sinr
    band = sinr_band(num_symbols) if band is None else band
    rows = []
    for i in range(cfg.num_users):
        rel = abs(emp[i] - analytic[i]) / analytic[i] if analytic[i] > 0 else abs(emp[i])
        rows.append((i + 1, p[i], analytic[i], emp[i], rel, band))
    sig = float(np.max(sample.signal))
    its = float(np.max(sample.interference) / sig) if sig > 0 else 0.0
    return SinrReport(rows, band, its)


def scenario_dict(cfg: ScenarioConfig) -> dict:
    return asdict(cfg)
