"""Command line entry point: ``ma-uplink <command> ...``.

Exit codes: 0 success, 1 a check or tolerance failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .channel import gain_matrix_partials
from .objective import gain_eigensystem, gradient_from_eigensystem
from .optimizer import OptimizationError, OptimizerOptions, optimize_multistart
from .scenario import INIT_STRATEGIES, InvalidScenarioError, check_scenario, load_scenario

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("ma_uplink")


class InputError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser, scenario=True):
    if scenario:
        p.add_argument("--scenario", required=True, help="YAML scenario file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")


def _optimizer_flags(p: argparse.ArgumentParser):
    d = OptimizerOptions()
    g = p.add_argument_group("optimizer")
    g.add_argument("--delta0", type=float, default=d.delta0)
    g.add_argument("--rho", type=float, default=d.rho)
    g.add_argument("--tau", type=float, default=d.tau, help="stop when |Δf| <= tau (inf allowed)")
    g.add_argument("--max-outer", type=int, default=d.max_outer)
    g.add_argument("--max-inner", type=int, default=d.max_inner)
    g.add_argument("--armijo", type=float, default=d.armijo,
                   help="sufficient-decrease coefficient; 1 gives the unit-coefficient test")
    g.add_argument("--init", choices=INIT_STRATEGIES, default=d.init_strategy)
    g.add_argument("--degenerate-policy", choices=["trace_fallback", "abort"],
                   default=d.degenerate_policy)


def _options(args) -> OptimizerOptions:
    try:
        return OptimizerOptions(
            delta0=args.delta0, rho=args.rho, tau=args.tau, max_outer=args.max_outer,
            max_inner=args.max_inner, armijo=args.armijo, init_strategy=args.init,
            seed=args.seed, degenerate_policy=args.degenerate_policy,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load(path) -> object:
    try:
        cfg = load_scenario(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read scenario: {exc}") from None
    try:
        return check_scenario(cfg)
    except InvalidScenarioError as exc:
        raise InputError("invalid scenario:\n  " + "\n  ".join(exc.errors)) from None


def _out_dir(args, default: str) -> Path:
    out = args.out or Path(default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_optimize(args) -> int:
    cfg = _load(args.scenario)
    opts = _options(args)
    seeds = [[args.seed, k] for k in range(args.starts)]
    try:
        res = optimize_multistart(cfg, opts, seeds=seeds)
    except OptimizationError as exc:
        print(f"optimizer failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    print(f"status: {res.status}" + (" (line search exhausted)" if res.trace.line_search_exhausted else ""))
    print(f"iterations: {res.trace.iterations}")
    print(f"total power: {res.objective:.12g}")
    print("per-user power: " + ", ".join(f"{p:.12g}" for p in res.powers))
    print("positions: " + ", ".join(f"{v:.12g}" for v in res.positions))
    if args.out is not None:
        out = _out_dir(args, ".")
        harness.write_csv(out / "trace.csv", harness.TRACE_COLUMNS, harness.trace_rows(res))
        harness.write_metadata(out / "trace.meta.json", command="optimize",
                               scenario=str(args.scenario), options=vars(opts),
                               status=res.status)
        print(f"trace written to {out / 'trace.csv'}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _load(args.scenario)
    opts = _options(args)
    spans = args.spans or [cfg.span]
    for L in spans:
        try:
            check_scenario(cfg.with_(span=L))
        except InvalidScenarioError as exc:
            raise InputError(f"span {L}: " + "; ".join(exc.errors)) from None
    try:
        results = harness.run_convergence(cfg, spans, opts)
    except OptimizationError as exc:
        print(f"optimizer failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    out = _out_dir(args, "out/convergence")
    harness.write_convergence(results, out, plot=not args.no_plot)
    checks = harness.convergence_checks(results)
    (out / "convergence_checks.json").write_text(json.dumps(checks, indent=2) + "\n")
    harness.write_metadata(out / "convergence.meta.json", command="convergence",
                           scenario=str(args.scenario), spans=spans, options=vars(opts))
    for L, r in results.items():
        print(f"L={L:g}: {r.status} after {r.trace.iterations} iterations, f={r.objective:.12g}")
    if not checks["passed"]:
        print("FLAG: convergence checks failed " + json.dumps(checks), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = harness.load_sweep_spec(args.spec)
        check_scenario(spec.base)
    except (OSError, ValueError) as exc:
        msg = "; ".join(exc.errors) if isinstance(exc, InvalidScenarioError) else str(exc)
        raise InputError(f"bad sweep spec: {msg}") from None
    opts = _options(args)
    records = harness.run_sweep(spec, opts, progress=print)
    out = _out_dir(args, "out/sweep")
    stem = Path(args.spec).stem
    _, checks = harness.write_sweep(spec, records, out, plot=not args.no_plot, stem=stem)
    harness.write_metadata(out / f"{stem}.meta.json", command="sweep", spec=str(args.spec),
                           options=vars(opts))
    print(json.dumps(checks, indent=2))
    return EXIT_OK if checks["passed"] else EXIT_CHECK


def cmd_complexity(args) -> int:
    if args.m_min < 1 or args.m_max < args.m_min:
        raise InputError("need 1 <= m-min <= m-max")
    rows = harness.complexity_rows(range(args.m_min, args.m_max + 1), args.num_antennas,
                                   args.t_outer, args.t_inner)
    out = _out_dir(args, "out/complexity")
    harness.write_csv(out / "complexity.csv", harness.COMPLEXITY_COLUMNS, rows)
    if not args.no_plot:
        from .plotting import plot_complexity
        plot_complexity(rows, out / "complexity.png")
    for r in rows:
        print(f"M={r[0]:>3}  closed_form={r[1]:.0f}  definition_based={r[2]:.0f}  ratio={r[3]:.4f}")
    return EXIT_OK


def _corrupted_closed_form(x, cfg):
    eig = gain_eigensystem(x, cfg)
    return gradient_from_eigensystem(eig, -gain_matrix_partials(x, cfg))


def cmd_gradcheck(args) -> int:
    cfg = _load(args.scenario)
    kw = {"closed_form": _corrupted_closed_form} if args.corrupt_partial_sign else {}
    rep = harness.gradcheck(cfg, args.points, args.seed, **kw)
    out = _out_dir(args, "out/gradcheck")
    harness.write_csv(out / "gradcheck.csv", harness.GRADCHECK_COLUMNS, rep.rows)
    print(f"points: {len(rep.rows)}")
    print(f"max rel closed-form vs finite difference: {rep.max_fd_rel:.3e} (tol {harness.FD_TOL:g})")
    print(f"max rel closed-form vs trace identity:    {rep.max_trace_rel:.3e} (tol {harness.TRACE_TOL:g})")
    print(f"max rel spread of power expressions:       {rep.max_objective_rel:.3e} (tol {harness.FACE_TOL:g})")
    print(f"max ||WᴴH - I||_F:                         {rep.max_zf_resid:.3e} (tol {harness.ZF_TOL:g})")
    print(f"max rel general vs ZF SINR:                {rep.max_sinr_rel:.3e} (tol {harness.ZF_TOL:g})")
    print(f"max rel SINR at min powers vs target:      {rep.max_tight_rel:.3e} (tol {harness.ZF_TOL:g})")
    if not rep.passed:
        replay = out / "gradcheck_failures.json"
        replay.write_text(json.dumps(rep.failures, indent=2) + "\n")
        print(f"FAIL: {len(rep.failures)} point(s); replay data in {replay}", file=sys.stderr)
        return EXIT_CHECK
    print("PASS")
    return EXIT_OK


def cmd_validate_sinr(args) -> int:
    cfg = _load(args.scenario)
    if args.symbols < 1:
        raise InputError("--symbols must be >= 1")
    rep = harness.validate_sinr(cfg, args.symbols, args.seed, power_scale=args.power_scale)
    out = _out_dir(args, "out/validate_sinr")
    harness.write_csv(out / "validate_sinr.csv", harness.SINR_COLUMNS, rep.rows)
    for user, p, ana, emp, rel, band in rep.rows:
        print(f"user {user}: power={p:.6g} analytic={ana:.6g} empirical={emp:.6g} rel_err={rel:.3e}")
    print(f"band: {rep.band:.3%}; interference/signal: {rep.interference_to_signal:.2e}")
    print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ma-uplink", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimize antenna positions for one scenario")
    _common(p)
    _optimizer_flags(p)
    p.add_argument("--starts", type=int, default=0, help="extra seeded random starts")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("convergence", help="objective traces for several spans")
    _common(p)
    _optimizer_flags(p)
    p.add_argument("--spans", type=_float_list, default=None, help="e.g. 2.5,3.5,4.5")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("sweep", help="proposed vs FPA vs RPA over a parameter grid")
    p.add_argument("--spec", required=True, help="YAML sweep spec")
    _common(p, scenario=False)
    _optimizer_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("complexity", help="multiplication counts of both gradient routes")
    _common(p, scenario=False)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--num-antennas", type=int, default=30)
    p.add_argument("--t-outer", type=int, default=10)
    p.add_argument("--t-inner", type=int, default=10)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("gradcheck", help="cross-check gradients and power identities")
    _common(p)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--corrupt-partial-sign", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("validate-sinr", help="Monte-Carlo SINR vs the analytic ZF SINR")
    _common(p)
    p.add_argument("--symbols", type=int, default=1_000_000)
    p.add_argument("--power-scale", type=float, default=1.0,
                   help="multiply the minimum powers (0 gives silent users)")
    p.set_defaults(func=cmd_validate_sinr)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
