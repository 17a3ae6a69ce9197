"""Filtered finite-difference solvers for eikonal and Hamilton-Jacobi equations.

A filtered scheme evaluates a provably convergent monotone operator and a
formally high-order operator at every node and keeps the accurate value
whenever the two agree to within a resolution-dependent threshold
theta(h) = K * h**beta. The package bundles the discrete operators, fast
sweeping and damped fixed-point solvers, a benchmark suite with exact
solutions, and a convergence-study harness.
"""

from .grid import (
    COMP_BOUNDARY,
    FIXED,
    LARGE,
    UNKNOWN,
    Grid,
    GridFunction,
    build_grid,
    classify_nodes,
    sweep_orderings,
)
from .discretization import (
    ACCURATE,
    MONOTONE,
    FilterConfig,
    Hamiltonian,
    SchemeSpec,
    apply_operator,
    filtered_residual,
    parse_scheme,
)
from .problems import Problem, problem_1d, problem_2d, exact_1d_eikonal, load_problem_file
from .solvers import SolverConfig, SolveReport, sweep_solve, fixed_point_solve, solve
from .analysis import (
    ConvergenceTable,
    bdf_oracle_1d,
    error_norm,
    observed_order,
    run_convergence_study,
)

__version__ = "0.1.0"

__all__ = [
    "COMP_BOUNDARY",
    "FIXED",
    "LARGE",
    "UNKNOWN",
    "Grid",
    "GridFunction",
    "build_grid",
    "classify_nodes",
    "sweep_orderings",
    "ACCURATE",
    "MONOTONE",
    "FilterConfig",
    "Hamiltonian",
    "SchemeSpec",
    "apply_operator",
    "filtered_residual",
    "parse_scheme",
    "Problem",
    "problem_1d",
    "problem_2d",
    "exact_1d_eikonal",
    "load_problem_file",
    "SolverConfig",
    "SolveReport",
    "sweep_solve",
    "fixed_point_solve",
    "solve",
    "ConvergenceTable",
    "bdf_oracle_1d",
    "error_norm",
    "observed_order",
    "run_convergence_study",
    "__version__",
]
