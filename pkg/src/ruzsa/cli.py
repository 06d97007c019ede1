"""Command-line front end.

Exit status: 0 when every theorem-status check passes, 1 when one fails,
2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .campaign import BUILTIN_CAMPAIGNS, load_campaign, run_campaign
from .checks import GENERATORS, FAIL, get_check, list_checks, run_ensemble
from .errors import RuzsaError
from .report import build_report, format_table, reference_table, render

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DET_CHECKS = ("det_minkowski", "det_rotfeld", "det_sum")


class UsageError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"ruzsa: warning: {msg}", file=sys.stderr)


def _emit(report: dict, args, default_out: Path | None = None) -> None:
    text = render(report, args.format)
    out = args.out or default_out
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    Path(out).write_text(text)
    print(f"report written to {out}", file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    c = load_campaign(args.campaign)
    if not c.entries:
        _warn(f"campaign {c.name!r} has no entries")
    results = run_campaign(c, tolerance=args.tolerance, seed=args.seed, trials=args.trials)
    seed = c.seed if args.seed is None else args.seed
    report = build_report("verify", results, seed=seed, extra={"campaign": c.name})
    default_out = c.base_dir / c.output if c.output else None
    _emit(report, args, default_out)
    s = report["summary"]
    print(f"{len(results)} results: {s['pass']} pass, {s['fail']} fail, {s['skipped']} skipped, "
          f"{s['conjecture']} conjecture, {s['observational']} observational", file=sys.stderr)
    for r in results:
        if r.status == FAIL:
            print(f"FAIL {r.name}: lhs {r.lhs:.10g} > rhs {r.rhs:.10g} (slack {r.slack:.3g})",
                  file=sys.stderr)
    return EXIT_FAIL if s["fail"] else EXIT_OK


def cmd_scan(args) -> int:
    spec = get_check(args.check)
    gen_opts = json.loads(args.gen_opts) if args.gen_opts else {}
    kw = {} if args.tolerance is None else {"tolerance": args.tolerance}
    summary = run_ensemble(args.check, args.generator, args.trials, args.seed,
                           n_jobs=args.jobs, persist=args.persist, gen_opts=gen_opts, **kw)
    row = summary.to_dict()
    row.pop("elapsed")
    row.pop("argmin_path")
    row["reference"] = spec.reference
    report = build_report("scan", [row], seed=args.seed,
                          summary={"violations": summary.violations, "trials": args.trials})
    report["metadata"]["elapsed"] = summary.elapsed
    _emit(report, args)
    print(f"{args.check} on {args.generator}: {args.trials} trials, {summary.violations} violations, "
          f"min slack {summary.min_slack:.3g}", file=sys.stderr)
    return EXIT_FAIL if summary.violations and spec.is_theorem else EXIT_OK


def cmd_det(args) -> int:
    rows, elapsed, violations = [], {}, 0
    for dim in args.dim:
        for name in DET_CHECKS:
            kw = {} if args.tolerance is None else {"tolerance": args.tolerance}
            s = run_ensemble(name, "pd", args.trials, args.seed, n_jobs=args.jobs,
                             gen_opts={"dim": dim}, **kw)
            row = s.to_dict()
            elapsed[f"{name}/{dim}"] = row.pop("elapsed")
            row.pop("argmin_path")
            row.update(dim=dim, reference=get_check(name).reference)
            rows.append(row)
            violations += s.violations
    report = build_report("det", rows, seed=args.seed,
                          summary={"violations": violations, "trials_per_check": args.trials})
    report["metadata"]["elapsed"] = elapsed
    _emit(report, args)
    print(f"determinant suite: {violations} violations", file=sys.stderr)
    return EXIT_FAIL if violations else EXIT_OK


def cmd_search(args) -> int:
    from .search import export_best, load_problem, optimize
    path = Path(args.problem)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: cannot read search problem ({exc})") from None
    problem, opts = load_problem(obj)
    if args.seed is not None:
        opts["seed"] = args.seed
    if args.trials is not None:
        opts["max_evals"] = args.trials
    seed = opts.pop("seed")
    trace = optimize(problem, opts.pop("method"), seed=seed, **opts)
    best = Path(args.best or path.with_name(path.stem + "_best.json"))
    written = export_best(problem, trace, best) if trace.best_x is not None else []
    row = trace.to_dict()
    meta = {"wall_clock": row.pop("wall_clock")}
    row["best_density"] = [str(p) for p in written]
    if args.format == "csv":
        text = "iteration,objective\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(row["values"]))
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        report = build_report("search", [row], seed=seed,
                              summary={"best_value": trace.best_value,
                                       "best_value_refined": trace.best_value_refined,
                                       "confirmed_violation": trace.confirmed_violation})
        report["metadata"].update(meta)
        _emit(report, args)
    print(f"{problem.objective}: best {trace.best_value:.6f} (2x resolution {trace.best_value_refined:.6f}), "
          f"{trace.evaluations} evaluations", file=sys.stderr)
    return EXIT_FAIL if trace.confirmed_violation else EXIT_OK


def cmd_table(args) -> int:
    rows = reference_table(args.cells)
    if args.format == "text":
        print(format_table(rows))
    else:
        _emit(build_report("table", rows, seed=None, summary={"rows": len(rows)}), args)
    return EXIT_OK


def cmd_list(args) -> int:
    for name in list_checks():
        s = get_check(name)
        print(f"{name:28s} {s.status:14s} {s.domain:9s} {s.reference}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p, *, seed=True, trials=True, fmt=("json", "csv")):
    if seed:
        p.add_argument("--seed", type=int, default=None, help="override the seed")
    if trials:
        p.add_argument("--trials", type=int, default=None, help="number of random trials")
    p.add_argument("--tolerance", type=float, default=None, help="override the check tolerance")
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=fmt, default=fmt[0])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ruzsa", description="Entropy and Ruzsa-divergence inequality checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a verification campaign")
    p.add_argument("--campaign", default="paper-suite",
                   help=f"campaign JSON file or built-in name ({', '.join(BUILTIN_CAMPAIGNS)})")
    _common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("scan", help="random ensemble for one check")
    p.add_argument("check")
    p.add_argument("--generator", choices=sorted(GENERATORS), default="finite")
    p.add_argument("--gen-opts", default=None, help="JSON object of generator options")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--persist", type=Path, default=None, help="write the argmin-slack inputs here")
    _common(p, seed=False, trials=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("det", help="determinant inequality suite on random PD matrices")
    p.add_argument("--dim", type=int, nargs="+", default=[2, 3, 5])
    p.add_argument("--jobs", type=int, default=1)
    _common(p, seed=False, trials=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(fn=cmd_det)

    p = sub.add_parser("search", help="extremizer search from a problem file")
    p.add_argument("problem", help="search problem JSON file")
    p.add_argument("--best", default=None, help="where to write the best density")
    _common(p)
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("table", help="reference values for standard distributions")
    p.add_argument("--cells", type=int, default=4096)
    _common(p, seed=False, trials=False, fmt=("text", "json", "csv"))
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("list", help="list registered checks")
    p.set_defaults(fn=cmd_list)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        return args.fn(args)
    except (RuzsaError, UsageError, OSError) as exc:
        print(f"ruzsa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
