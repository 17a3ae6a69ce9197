"""Command line front end.

Three subcommands: solve (one problem, one scheme, one grid), study (error
and order table over a resolution sequence), and reproduce (regenerate a
published benchmark table and compare cell by cell). A JSON config file can
supply any option under its long flag name with hyphens as underscores;
explicit flags win. Exit codes: 2 for bad arguments or config, 3 when a
requested solve does not converge, 4 when a reproduce cell fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .analysis import REGIONS, error_norm, region_predicate, run_convergence_study
from .discretization import write_stencil_csv
from .grid import write_grid_function_csv
from .problems import get_problem, load_problem_file
from .reference_tables import REFERENCE, cell_ok
from .solvers import SolverConfig, scheme_for_problem, solve


def _parse_N_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if lo < 2 or hi < lo:
            raise ValueError(f"bad resolution range {text!r}")
        out = []
        N = lo
        while N <= hi:
            out.append(N)
            N *= 2
        return out
    if "," in text:
        return [int(part) for part in text.split(",") if part.strip()]
    return [int(text)]


def _load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _merge_config(args, config: dict, parser):
    known = set(vars(args))
    for key, value in config.items():
        attr = key.replace("-", "_")
        if attr not in known:
            parser.error(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)
    return args


def _get_problem(args):
    if getattr(args, "problem_file", None):
        return load_problem_file(args.problem_file)
    if not args.problem:
        raise ValueError("no problem given (use --problem or --problem-file)")
    return get_problem(args.problem)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        method=args.solver or "auto",
        tolerance=args.tol,
        max_iterations=args.max_iter,
    )


def _add_common(p):
    p.add_argument("--problem", help="built-in problem name, e.g. 1d/ex1 or 2d/ex3")
    p.add_argument("--problem-file", help="JSON file describing a custom problem")
    p.add_argument(
        "--filter-K", type=float, dest="filter_K", help="filter threshold constant"
    )
    p.add_argument(
        "--filter-beta",
        type=float,
        dest="filter_beta",
        help="filter threshold exponent (default 1/2, benchmark overrides apply)",
    )
    p.add_argument(
        "--solver", choices=["auto", "sweep", "fixed_point"], help="solver routing"
    )
    p.add_argument("--tol", type=float, help="convergence tolerance")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap")
    p.add_argument("--config", help="JSON config file mirroring the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjfilter",
        description="Filtered finite-difference solvers for eikonal and "
        "Hamilton-Jacobi equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem on one grid")
    _add_common(p_solve)
    p_solve.add_argument(
        "--scheme",
        "--schemes",
        dest="scheme",
        help="monotone, filtered:<kind><order>, or pure:<kind><order>; "
        "a bare <kind><order> means filtered",
    )
    p_solve.add_argument("--N", help="grid resolution")
    p_solve.add_argument("--out", help="write the solution as CSV")
    p_solve.add_argument(
        "--stencils-out", dest="stencils_out", help="write per-node branch CSV"
    )
    p_solve.add_argument(
        "--report-out", dest="report_out", help="write the JSON summary to a file"
    )
    p_solve.add_argument("--norm", help="also print this error norm (linf or l1)")
    p_solve.add_argument("--region", help="restrict the printed norm to a region")

    p_study = sub.add_parser("study", help="error/order table over resolutions")
    _add_common(p_study)
    p_study.add_argument(
        "--scheme",
        "--schemes",
        dest="scheme",
        help="comma-separated scheme list",
    )
    p_study.add_argument("--N", help="resolutions: one value, a,b,c, or lo..hi doubling")
    p_study.add_argument("--norm", help="comma-separated norms (linf, l1)")
    p_study.add_argument("--region", help="comma-separated regions (all or named)")
    p_study.add_argument("--out", help="write the table as CSV")
    p_study.add_argument(
        "--plot-data", dest="plot_data", help="write log10 h vs log10 error CSV"
    )
    p_study.add_argument("--workers", type=int, help="parallel solves (threads)")

    p_rep = sub.add_parser(
        "reproduce", help="regenerate a published table and compare cells"
    )
    _add_common(p_rep)
    p_rep.add_argument(
        "--table",
        required=True,
        choices=sorted(REFERENCE),
        help="which published table",
    )
    p_rep.add_argument("--N", help="restrict to these resolutions")
    p_rep.add_argument("--out", help="write the computed table as CSV")
    p_rep.add_argument("--workers", type=int, help="parallel solves (threads)")
    return parser


def cmd_solve(args) -> int:
    problem = _get_problem(args)
    scheme = args.scheme or "monotone"
    spec = scheme_for_problem(scheme, problem, args.filter_K, args.filter_beta)
    Ns = _parse_N_list(str(args.N)) if args.N is not None else [64]
    if len(Ns) != 1:
        raise ValueError("solve takes a single resolution")
    report = solve(problem, spec, Ns[0], _solver_config(args))
    summary = report.summary()
    if args.norm:
        grid = report.solution.grid
        if grid.dim == 1:
            exact = problem.exact(grid.axis_coords())
        else:
            exact = problem.exact(*grid.coords())
        pred = region_predicate(problem.name, args.region)
        summary["error"] = error_norm(
            report.solution, exact, kind=args.norm, region=pred
        )
    print(json.dumps(summary, indent=2))
    if args.report_out:
        with open(args.report_out, "w") as fh:
            json.dump(report.summary(), fh, indent=2)
            fh.write("\n")
    if args.out:
        write_grid_function_csv(args.out, report.solution)
    if args.stencils_out:
        record = report.compute_stencils(problem, spec)
        write_stencil_csv(args.stencils_out, record)
    return 0 if report.converged else 3


def cmd_study(args) -> int:
    problem = _get_problem(args)
    schemes = [s.strip() for s in (args.scheme or "monotone").split(",") if s.strip()]
    Ns = _parse_N_list(args.N) if args.N is not None else [64, 128, 256, 512, 1024]
    norms = [s.strip() for s in (args.norm or "linf").split(",") if s.strip()]
    regions = [
        None if s.strip() in ("all", "") else s.strip()
        for s in (args.region or "all").split(",")
    ]
    table = run_convergence_study(
        problem,
        schemes,
        Ns,
        norms=norms,
        regions=regions,
        config=_solver_config(args),
        filter_K=args.filter_K,
        filter_beta=args.filter_beta,
        workers=args.workers,
    )
    print(table.format_text())
    if args.out:
        table.to_csv(args.out)
    if args.plot_data:
        table.write_plot_data(args.plot_data)
    bad = [r for r in table.rows if r.error is None or not r.converged]
    return 3 if bad else 0


def cmd_reproduce(args) -> int:
    ref = REFERENCE[args.table]
    problem = get_problem(ref.problem)
    Ns = _parse_N_list(args.N) if args.N is not None else list(ref.Ns)
    unknown = [N for N in Ns if N not in ref.Ns]
    if unknown:
        raise ValueError(f"table {ref.key} has no rows for N in {unknown}")
    schemes: list[str] = []
    norms: list[str] = []
    for section in ref.sections:
        if section.norm not in norms:
            norms.append(section.norm)
        for label in section.columns:
            if label not in schemes:
                schemes.append(label)
    table = run_convergence_study(
        problem,
        schemes,
        Ns,
        norms=norms,
        regions=(None,),
        config=_solver_config(args),
        filter_K=args.filter_K,
        filter_beta=args.filter_beta,
        workers=args.workers,
    )
    print(f"{ref.key}: {ref.title}")
    header = (
        f"  {'scheme':<20} {'norm':<5} {'N':>6} {'published':>12} "
        f"{'computed':>12} {'order':>7}  status"
    )
    print(header)
    failures = 0
    cells = 0
    for section in ref.sections:
        for label, column in section.columns.items():
            policy = section.policies[label]
            for N, (published, _) in zip(ref.Ns, column):
                if N not in Ns:
                    continue
                cells += 1
                row = table.lookup(N, label, norm=section.norm)
                if row.error is None or not row.converged:
                    status = "FAIL (solver)"
                    failures += 1
                    computed = math.nan
                    order = ""
                else:
                    computed = row.error
                    order = "" if row.order is None else f"{row.order:.2f}"
                    if cell_ok(policy, published, computed):
                        status = "PASS"
                    else:
                        status = f"FAIL ({policy})"
                        failures += 1
                print(
                    f"  {label:<20} {section.norm:<5} {N:>6} {published:>12.3e} "
                    f"{computed:>12.3e} {order:>7}  {status}"
                )
    print(f"{ref.key}: {cells - failures}/{cells} cells PASS")
    if args.out:
        table.to_csv(args.out)
    return 4 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            config = _load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        _merge_config(args, config, parser)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "study":
            return cmd_study(args)
        return cmd_reproduce(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
