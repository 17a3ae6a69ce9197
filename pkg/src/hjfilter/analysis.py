"""Error norms, observed orders, and convergence studies.

Norms run over every grid node: fixed nodes carry exact data and contribute
zero, which matches how the benchmark tables are computed. Orders between
consecutive table rows use the true spacing ratio h_coarse/h_fine =
(N_fine - 1)/(N_coarse - 1), which for the doubling sequence 64, 128, ... is
127/63 and so on, not exactly 2.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .discretization import UPWIND_COEFFS, SchemeSpec
from .grid import FIXED, Grid, GridFunction, build_grid
from .problems import Problem
from .solvers import SolveReport, SolverConfig, scheme_for_problem, solve

# Error magnitudes below this are reported as exact: they sit at the
# rounding floor and observed orders computed from them are noise.
MACHINE_FLOOR = 1e-13


def error_norm(u_h, u_exact, mask=None, kind: str = "linf", region=None) -> float:
    """Discrete error norm over all grid nodes.

    kind "linf" is the max norm; "l1" is h^dim times the absolute sum.
    region restricts the node set: a boolean array of grid shape or a
    predicate over the grid coordinates (callable taking x, or x and y).
    Restricting to an empty node set is an error.
    """
    if isinstance(u_h, GridFunction):
        grid = u_h.grid
        vals = u_h.values
    else:
        raise TypeError("u_h must be a GridFunction")
    exact = u_exact.values if isinstance(u_exact, GridFunction) else np.asarray(u_exact)
    exact = np.broadcast_to(exact, grid.shape)
    err = np.abs(vals - exact)
    include = np.ones(grid.shape, dtype=bool)
    if region is not None:
        if callable(region):
            if grid.dim == 1:
                include = np.asarray(region(grid.axis_coords()), dtype=bool)
            else:
                xg, yg = grid.coords()
                include = np.broadcast_to(
                    np.asarray(region(xg, yg), dtype=bool), grid.shape
                )
        else:
            include = np.asarray(region, dtype=bool)
            if include.shape != grid.shape:
                raise ValueError("region mask shape does not match the grid")
    if not include.any():
        raise ValueError("region excludes every grid node")
    err = err[include]
    kind = kind.lower()
    if kind in ("linf", "max", "sup"):
        return float(err.max())
    if kind == "l1":
        return float(grid.h**grid.dim * err.sum())
    raise ValueError(f"unknown norm kind {kind!r}")


def observed_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    """log(e_coarse/e_fine) / log(ratio); nan when either error is not
    positive (the order is undefined at the rounding floor)."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        return math.nan
    return math.log(e_coarse / e_fine) / math.log(ratio)


# Named node subsets used by the benchmark tables: away-from-kink regions
# where the filtered schemes recover full accuracy, and the flat core of the
# two-obstacle distance problem where the solution is exactly zero.
REGIONS: dict[str, dict[str, Callable]] = {
    "2d/ex2": {
        "smooth": lambda x, y: np.abs(x + y) > 0.1,
    },
    "2d/ex3": {
        "smooth": lambda x, y: (x**2 + y**2 >= 1.0) & (x >= 0.1),
        "flat": lambda x, y: (np.abs(y) <= 0.8) & (x <= 0.0),
    },
}


def region_predicate(problem_name: str, region: Optional[str]):
    if region is None or region == "all":
        return None
    try:
        return REGIONS[problem_name][region]
    except KeyError:
        raise KeyError(f"no region {region!r} for problem {problem_name!r}") from None


def bdf_oracle_1d(problem: Problem, n: int, N: int) -> GridFunction:
    """Reference for the unfiltered order-n upwind scheme in 1D.

    Marches the ODE u' = f left to right and u' = -f right to left with the
    order-n backward differentiation formula, both seeded with n exact
    values, and takes the pointwise min. The converged unfiltered upwind
    sweep equals this construction at machine precision.
    """
    if problem.dim != 1 or problem.equation != "eikonal":
        raise ValueError("the BDF oracle applies to 1D eikonal problems")
    grid = build_grid(1, problem.a, problem.b, N)
    x = grid.axis_coords()
    h = grid.h
    fvals = np.asarray(problem.f(x), dtype=float)
    exact = np.asarray(problem.exact(x), dtype=float)
    c = UPWIND_COEFFS[n]
    u_a = np.empty(N)
    u_a[:n] = exact[:n]
    for i in range(n, N):
        s = sum(c[k] * u_a[i - k] for k in range(1, n + 1))
        u_a[i] = -(h * fvals[i] + s) / c[0]
    u_b = np.empty(N)
    u_b[N - n :] = exact[N - n :]
    for i in range(N - n - 1, -1, -1):
        s = sum(c[k] * u_b[i + k] for k in range(1, n + 1))
        u_b[i] = -(h * fvals[i] + s) / c[0]
    return GridFunction(grid, np.minimum(u_a, u_b))


@dataclass
class StudyRow:
    N: int
    scheme: str
    norm: str
    region: str
    error: Optional[float]
    order: Optional[float]
    converged: bool
    failure: Optional[str] = None
    h: Optional[float] = None


@dataclass
class ConvergenceTable:
    """Error/order table for one problem over schemes and resolutions."""

    problem: str
    rows: list[StudyRow] = field(default_factory=list)

    def lookup(self, N, scheme, norm="linf", region="all") -> StudyRow:
        for row in self.rows:
            if (
                row.N == N
                and row.scheme == scheme
                and row.norm == norm
                and row.region == region
            ):
                return row
        raise KeyError((N, scheme, norm, region))

    @staticmethod
    def _order_cell(row: StudyRow) -> str:
        if row.error is not None and row.error < MACHINE_FLOOR:
            return "exact"
        if row.order is None or math.isnan(row.order):
            return ""
        return f"{row.order:.2f}"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N", "scheme", "norm", "region", "error", "order"])
            for row in self.rows:
                err = "failed" if row.error is None else f"{row.error:.17g}"
                writer.writerow(
                    [row.N, row.scheme, row.norm, row.region, err, self._order_cell(row)]
                )

    def write_plot_data(self, path) -> None:
        """log10(h) versus log10(error) per scheme/norm/region curve."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scheme", "norm", "region", "log10_h", "log10_error"])
            for row in self.rows:
                if row.error is None or row.error <= 0.0 or row.h is None:
                    continue
                writer.writerow(
                    [
                        row.scheme,
                        row.norm,
                        row.region,
                        f"{math.log10(row.h):.17g}",
                        f"{math.log10(row.error):.17g}",
                    ]
                )

    def format_text(self) -> str:
        lines = [f"problem {self.problem}"]
        header = f"{'N':>6} {'scheme':<18} {'norm':<5} {'region':<8} {'error':>13} {'order':>7}"
        lines.append(header)
        for row in self.rows:
            err = "failed" if row.error is None else f"{row.error:.3e}"
            order = self._order_cell(row) or "-"
            mark = "" if row.converged else "  [not converged]"
            lines.append(
                f"{row.N:>6} {row.scheme:<18} {row.norm:<5} {row.region:<8} "
                f"{err:>13} {order:>7}{mark}"
            )
        return "\n".join(lines)


def run_convergence_study(
    problem: Problem,
    schemes: Sequence,
    Ns: Sequence[int],
    norms: Sequence[str] = ("linf",),
    regions: Sequence[Optional[str]] = (None,),
    config: Optional[SolverConfig] = None,
    filter_K: Optional[float] = None,
    filter_beta: Optional[float] = None,
    workers: Optional[int] = None,
) -> ConvergenceTable:
    """Solve each scheme at each resolution and tabulate errors and orders.

    schemes may be labels or SchemeSpec instances. One solve per
    (scheme, N) cell feeds every requested norm and region; cells whose
    solve raises are marked failed and do not stop the study. Rows are
    emitted in deterministic (scheme, norm, region, N) order regardless of
    the worker pool timing.
    """
    specs: list[SchemeSpec] = []
    for s in schemes:
        if isinstance(s, SchemeSpec):
            specs.append(s)
        else:
            specs.append(scheme_for_problem(s, problem, filter_K, filter_beta))
    Ns = list(Ns)
    cells = [(spec, N) for spec in specs for N in Ns]
    if workers is None:
        workers = min(len(cells), os.cpu_count() or 1, 4)

    def run(cell):
        spec, N = cell
        try:
            return solve(problem, spec, N, config)
        except Exception as exc:  # noqa: BLE001 - cell failures go in the table
            return exc

    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(zip(cells, pool.map(run, cells)))
    else:
        results = {cell: run(cell) for cell in cells}

    table = ConvergenceTable(problem=problem.name)
    for spec in specs:
        for norm in norms:
            for region in regions:
                region_name = region if region is not None else "all"
                pred = region_predicate(problem.name, region)
                prev: Optional[StudyRow] = None
                for N in Ns:
                    outcome = results[(spec, N)]
                    row = StudyRow(
                        N=N,
                        scheme=spec.label,
                        norm=norm,
                        region=region_name,
                        error=None,
                        order=None,
                        converged=False,
                    )
                    if isinstance(outcome, Exception):
                        row.failure = f"{type(outcome).__name__}: {outcome}"
                    else:
                        grid = outcome.solution.grid
                        if grid.dim == 1:
                            exact = problem.exact(grid.axis_coords())
                        else:
                            exact = problem.exact(*grid.coords())
                        row.error = error_norm(
                            outcome.solution, exact, kind=norm, region=pred
                        )
                        row.converged = outcome.converged
                        row.h = grid.h
                        if prev is not None and prev.error is not None:
                            ratio = (N - 1) / (prev.N - 1)
                            row.order = observed_order(prev.error, row.error, ratio)
                    table.rows.append(row)
                    prev = row
    return table
