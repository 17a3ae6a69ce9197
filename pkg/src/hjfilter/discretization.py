"""Discrete spatial operators: monotone, accurate, and the filter between them.

Monotone operators (Godunov-type for the eikonal equation, Lax-Friedrichs for
general Hamiltonians) converge to the viscosity solution but are first-order.
Accurate operators (centered, one-sided upwind of order n, ENO of order n) are
formally high order but unstable near kinks. The filtered operator keeps the
accurate value wherever it agrees with the monotone value to within
theta(h) = K * h**beta and falls back to the monotone value elsewhere, so it
stays within O(h**beta) of a monotone scheme everywhere.

Every operator has a scalar reference implementation (used by the sweeps and
the tests) and, where the solvers need it, a vectorized whole-grid version
that is property-tested equal to the scalar one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import COMP_BOUNDARY, FIXED, GridFunction, classify_nodes

MONOTONE = 0
ACCURATE = 1
BRANCH_LABELS = {MONOTONE: "M", ACCURATE: "A"}

# First-derivative coefficients of the degree-n interpolant through
# x, x+h, ..., x+nh evaluated at x (forward one-sided stencils). The backward
# side mirrors these with a global sign flip. Exactness on monomials up to
# degree n is enforced by tests.
UPWIND_COEFFS = {
    2: np.array([-3.0 / 2.0, 2.0, -1.0 / 2.0]),
    3: np.array([-11.0 / 6.0, 3.0, -3.0 / 2.0, 1.0 / 3.0]),
    4: np.array([-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0]),
}

ACCURATE_KINDS = ("centered", "upwind", "eno")


@dataclass(frozen=True)
class Hamiltonian:
    """General Hamiltonian H with Lax-Friedrichs viscosity bounds.

    evaluate is H(x, p) in 1D or H(x, y, p, q) in 2D and must accept numpy
    arrays. sigma_x (and sigma_y in 2D) must dominate |dH/dp| (|dH/dq|) over
    the gradient range of the solution; the benchmark problems supply
    constants with that property.

    kernel_form names a closed form the compiled sweep kernels evaluate
    directly ("square" for p^2, "cosabs" for cos(p)^2 + |p|); it must match
    evaluate. Hamiltonians without one run on the python solver paths.

    slope_bound, when set, is the |p| beyond which |dH/dp| exceeds sigma_x.
    Gauss-Seidel local solves clamp their central-slope argument there:
    past it the sweep map is expansive and transients on fine grids run
    away, while converged slopes sit inside the bound, so the clamp never
    moves the fixed point. Leave None when |dH/dp| <= sigma_x everywhere
    (sublinear growth); clamping then only distorts transients.
    """

    evaluate: Callable
    sigma_x: float
    sigma_y: float = 0.0
    kernel_form: str = ""
    slope_bound: Optional[float] = None

    def __post_init__(self):
        if self.sigma_x < 0 or self.sigma_y < 0:
            raise ValueError("viscosity bounds must be nonnegative")


@dataclass(frozen=True)
class FilterConfig:
    """Threshold theta(h) = K * h**beta separating the two branches."""

    K: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")

    def threshold(self, h: float) -> float:
        return self.K * h**self.beta


@dataclass(frozen=True)
class SchemeSpec:
    """Identifies one discrete operator.

    accurate_kind None means the pure monotone scheme. Otherwise the scheme
    is pure accurate when filter is None and filtered when a FilterConfig is
    present.
    """

    equation: str = "eikonal"
    accurate_kind: Optional[str] = None
    accurate_order: int = 0
    filter: Optional[FilterConfig] = None

    def __post_init__(self):
        if self.equation not in ("eikonal", "hj"):
            raise ValueError(f"unknown equation kind {self.equation!r}")
        if self.accurate_kind is None:
            if self.filter is not None:
                raise ValueError("a filter needs an accurate operator")
            return
        if self.accurate_kind not in ACCURATE_KINDS:
            raise ValueError(f"unknown accurate kind {self.accurate_kind!r}")
        if self.accurate_kind == "centered":
            if self.accurate_order != 2:
                raise ValueError("centered scheme is order 2 only")
        elif self.accurate_order not in (2, 3, 4):
            raise ValueError(
                f"order must be 2, 3 or 4, got {self.accurate_order}"
            )

    @property
    def is_monotone(self) -> bool:
        return self.accurate_kind is None

    @property
    def is_filtered(self) -> bool:
        return self.accurate_kind is not None and self.filter is not None

    @property
    def band_width(self) -> int:
        """Dirichlet band width: n nodes per end for an order-n scheme."""
        return 1 if self.accurate_kind is None else self.accurate_order

    @property
    def label(self) -> str:
        if self.accurate_kind is None:
            return "monotone"
        name = f"{self.accurate_kind}{self.accurate_order}"
        return f"filtered:{name}" if self.filter else f"pure:{name}"


def parse_scheme(
    text: str,
    equation: str = "eikonal",
    filter_config: Optional[FilterConfig] = None,
) -> SchemeSpec:
    """Parse a scheme label: monotone | [filtered:|pure:]<kind><order>.

    Kinds are centered2, upwind2..4, eno2..4. A bare kind means the filtered
    variant. filter_config overrides the default K=1, beta=1/2 threshold for
    filtered schemes.
    """
    text = text.strip().lower()
    if text == "monotone":
        return SchemeSpec(equation=equation)
    filtered = True
    if ":" in text:
        mode, _, text = text.partition(":")
        if mode == "pure":
            filtered = False
        elif mode != "filtered":
            raise ValueError(f"unknown scheme mode {mode!r}")
    for kind in ACCURATE_KINDS:
        if text.startswith(kind):
            try:
                order = int(text[len(kind):])
            except ValueError:
                raise ValueError(f"missing order in scheme {text!r}") from None
            cfg = (filter_config or FilterConfig()) if filtered else None
            return SchemeSpec(
                equation=equation,
                accurate_kind=kind,
                accurate_order=order,
                filter=cfg,
            )
    raise ValueError(f"cannot parse scheme {text!r}")


# ---------------------------------------------------------------------------
# Monotone operators (scalar)
# ---------------------------------------------------------------------------


def monotone_eikonal_1d(u, i: int, h: float) -> float:
    """Godunov gradient magnitude max{-(u[i+1]-u[i])/h, (u[i]-u[i-1])/h, 0}."""
    if not 0 < i < len(u) - 1:
        raise ValueError(f"interior index required, got i={i}")
    return max((u[i] - u[i - 1]) / h, -(u[i + 1] - u[i]) / h, 0.0)


def _monotone_axis(uline, i: int, h: float) -> float:
    # One-sided terms falling outside the grid are omitted from the max.
    best = 0.0
    if i >= 1:
        best = max(best, (uline[i] - uline[i - 1]) / h)
    if i <= len(uline) - 2:
        best = max(best, -(uline[i + 1] - uline[i]) / h)
    return best


def monotone_eikonal_2d(u, i: int, j: int, h: float) -> float:
    """Axis-wise Godunov terms combined with the Euclidean norm."""
    ax = _monotone_axis(u[:, j], i, h)
    ay = _monotone_axis(u[i, :], j, h)
    return math.hypot(ax, ay)


def lax_friedrichs_1d(H: Hamiltonian, x: float, p_plus: float, p_minus: float) -> float:
    """H(x, (p+ + p-)/2) - (sigma_x/2)(p+ - p-) with one-sided differences."""
    return H.evaluate(x, 0.5 * (p_plus + p_minus)) - 0.5 * H.sigma_x * (
        p_plus - p_minus
    )


def lax_friedrichs_2d(
    H: Hamiltonian,
    x: float,
    y: float,
    p_plus: float,
    p_minus: float,
    q_plus: float,
    q_minus: float,
) -> float:
    return (
        H.evaluate(x, y, 0.5 * (p_plus + p_minus), 0.5 * (q_plus + q_minus))
        - 0.5 * H.sigma_x * (p_plus - p_minus)
        - 0.5 * H.sigma_y * (q_plus - q_minus)
    )


# ---------------------------------------------------------------------------
# Accurate one-sided derivatives (scalar)
# ---------------------------------------------------------------------------


def upwind_derivative(u, i: int, h: float, n: int, side: int) -> float:
    """Derivative at node i of the degree-n interpolant biased to one side.

    side=+1 uses nodes i..i+n, side=-1 uses i-n..i. The two are mirror
    images, so the backward value is minus the forward formula applied to the
    reflected data.
    """
    if n not in UPWIND_COEFFS:
        raise ValueError(f"order must be 2, 3 or 4, got {n}")
    c = UPWIND_COEFFS[n]
    if side > 0:
        if i + n > len(u) - 1:
            raise ValueError(f"forward stencil out of range at i={i}")
        return sum(c[k] * u[i + k] for k in range(n + 1)) / h
    if i - n < 0:
        raise ValueError(f"backward stencil out of range at i={i}")
    return -sum(c[k] * u[i - k] for k in range(n + 1)) / h


def _derivative_weight_table(n: int) -> np.ndarray:
    # Row p gives the weights of d/dt at t=p of the degree-n interpolant on
    # unit-spaced nodes t=0..n; solved from exactness on monomials.
    A = np.array([[float(k**d) for k in range(n + 1)] for d in range(n + 1)])
    W = np.empty((n + 1, n + 1))
    for p in range(n + 1):
        rhs = np.array([d * float(p) ** (d - 1) if d >= 1 else 0.0 for d in range(n + 1)])
        W[p] = np.linalg.solve(A, rhs)
    return W

_DERIV_WEIGHTS = {n: _derivative_weight_table(n) for n in (2, 3, 4)}


def _undivided_difference(u, a: int, b: int) -> float:
    # Newton divided differences over contiguous same-length stencils share
    # their denominator, so comparing raw finite differences is equivalent
    # and keeps the scalar and vectorized selections bit-identical.
    return float(np.diff(u[a : b + 1], b - a)[0])


def eno_derivative(u, i: int, h: float, n: int, side: int, lo: int = 0, hi: Optional[int] = None):
    """Derivative at node i of the ENO interpolant of degree n.

    Starts from the two-node stencil on the chosen side and repeatedly
    extends toward the smaller (r+1)-th Newton divided difference, so the
    final stencil avoids kinks where possible. Ties extend with the side's
    bias (side=+1 right, side=-1 left). lo/hi restrict the admissible node
    window; extensions outside it are not considered.

    Returns (derivative, leftmost stencil offset relative to i).
    """
    u = np.asarray(u, dtype=float)
    if n not in (2, 3, 4):
        raise ValueError(f"order must be 2, 3 or 4, got {n}")
    if hi is None:
        hi = len(u)
    left = i if side > 0 else i - 1
    right = left + 1
    if left < lo or right > hi - 1:
        raise ValueError(f"two-node stencil out of range at i={i}")
    for _ in range(1, n):
        can_left = left - 1 >= lo
        can_right = right + 1 <= hi - 1
        if not can_left and not can_right:
            raise ValueError(f"ENO window out of range at i={i}")
        if can_left and can_right:
            dd_left = abs(_undivided_difference(u, left - 1, right))
            dd_right = abs(_undivided_difference(u, left, right + 1))
            if dd_left < dd_right:
                extend_left = True
            elif dd_right < dd_left:
                extend_left = False
            else:
                extend_left = side < 0
        else:
            extend_left = can_left
        if extend_left:
            left -= 1
        else:
            right += 1
    w = _DERIV_WEIGHTS[n][i - left]
    return float(np.dot(w, u[left : left + n + 1])) / h, left - i


def _side_derivative_detail(uline, i, h, kind, n, side, lo=0, hi=None):
    """One-sided accurate derivative with its leftmost stencil offset."""
    if kind == "upwind":
        d = upwind_derivative(uline, i, h, n, side)
        return d, (0 if side > 0 else -n)
    if kind == "eno":
        return eno_derivative(uline, i, h, n, side, lo=lo, hi=hi)
    raise ValueError(f"no one-sided form for kind {kind!r}")


def _axis_accurate_detail(uline, i: int, h: float, kind: str, n: int):
    """Accurate |du/dx| along one axis with edge fallbacks.

    Interior nodes use the full two-sided rule. Where the grid edge removes a
    side, the remaining side is used alone; centered falls back to the
    order-2 one-sided rule; if no accurate stencil fits at all, the monotone
    axis rule is used. Returns (value, leftmost offset of the active stencil).
    """
    N = len(uline)
    if kind == "centered":
        if 1 <= i <= N - 2:
            return abs(uline[i + 1] - uline[i - 1]) / (2.0 * h), -1
        kind, n = "upwind", 2
    candidates = []
    for side in (-1, +1):
        if kind == "upwind":
            ok = i - n >= 0 if side < 0 else i + n <= N - 1
        else:  # eno
            ok = i - 1 >= 0 if side < 0 else i + 1 <= N - 1
        if not ok:
            continue
        d, off = _side_derivative_detail(uline, i, h, kind, n, side, lo=0, hi=N)
        candidates.append((d if side < 0 else -d, off))
    if candidates:
        return max(candidates, key=lambda t: t[0])
    return _monotone_axis(uline, i, h), 0


def accurate_eikonal_1d(u, i: int, h: float, spec: SchemeSpec) -> float:
    """High-order gradient magnitude at an interior node.

    Centered: |u[i+1]-u[i-1]|/(2h). Upwind/ENO of order n:
    max{backward-biased derivative, -(forward-biased derivative)}; unlike the
    monotone operator there is no clamp at zero.
    """
    u = np.asarray(u, dtype=float)
    return _axis_accurate_detail(u, i, h, spec.accurate_kind, spec.accurate_order)[0]


def accurate_eikonal_2d(u, i: int, j: int, h: float, spec: SchemeSpec) -> float:
    ax = _axis_accurate_detail(
        np.asarray(u[:, j], dtype=float), i, h, spec.accurate_kind, spec.accurate_order
    )[0]
    ay = _axis_accurate_detail(
        np.asarray(u[i, :], dtype=float), j, h, spec.accurate_kind, spec.accurate_order
    )[0]
    return math.hypot(ax, ay)


def accurate_hj_1d(u, i: int, h: float, x: float, spec: SchemeSpec, H: Hamiltonian) -> float:
    """High-order Hamiltonian approximation at an interior node.

    Centered evaluates H at the central difference directly. Upwind/ENO feed
    the Lax-Friedrichs form with the two high-order one-sided derivatives.
    """
    u = np.asarray(u, dtype=float)
    kind, n = spec.accurate_kind, spec.accurate_order
    if kind == "centered":
        if not 0 < i < len(u) - 1:
            raise ValueError(f"interior index required, got i={i}")
        return H.evaluate(x, (u[i + 1] - u[i - 1]) / (2.0 * h))
    d_minus = _side_derivative_detail(u, i, h, kind, n, -1)[0]
    d_plus = _side_derivative_detail(u, i, h, kind, n, +1)[0]
    return lax_friedrichs_1d(H, x, d_plus, d_minus)


def filtered_residual(FA: float, FM: float, h: float, cfg: FilterConfig):
    """Blend the two operator values: accurate wherever it stays within
    theta(h) of the monotone value (inclusive), monotone otherwise.

    Returns (value, branch) with branch ACCURATE or MONOTONE.
    """
    if abs(FA - FM) <= cfg.threshold(h):
        return FA, ACCURATE
    return FM, MONOTONE


# ---------------------------------------------------------------------------
# Whole-grid operator assembly (scalar reference path)
# ---------------------------------------------------------------------------


@dataclass
class StencilRecord:
    """Active branch and accurate-stencil offsets per node.

    branch is MONOTONE/ACCURATE per node. offset_x (and offset_y in 2D) is
    the leftmost node offset of the accurate stencil that produced the axis
    value: the active side's stencil for eikonal operators, the
    backward-biased side for general Hamiltonians (both sides enter there).
    Zero where no accurate stencil was evaluated.
    """

    grid: object
    branch: np.ndarray
    offset_x: np.ndarray
    offset_y: Optional[np.ndarray] = None


def write_stencil_csv(rec: StencilRecord, path) -> None:
    """CSV export: x[,y],branch,offset_x[,offset_y] with branch A or M."""
    g = rec.grid
    ax = g.axis_coords()
    with open(path, "w") as fh:
        if g.dim == 1:
            fh.write("x,branch,offset_x\n")
            for i in range(g.N):
                fh.write(
                    f"{ax[i]:.17g},{BRANCH_LABELS[int(rec.branch[i])]},"
                    f"{int(rec.offset_x[i])}\n"
                )
        else:
            fh.write("x,y,branch,offset_x,offset_y\n")
            for i in range(g.N):
                for j in range(g.N):
                    fh.write(
                        f"{ax[i]:.17g},{ax[j]:.17g},"
                        f"{BRANCH_LABELS[int(rec.branch[i, j])]},"
                        f"{int(rec.offset_x[i, j])},{int(rec.offset_y[i, j])}\n"
                    )


def _node_operator_1d(u, i, h, x, spec, H):
    """(F_M, F_A, offset) at one 1D node; F_A is None for pure monotone."""
    if spec.equation == "eikonal":
        FM = monotone_eikonal_1d(u, i, h)
        if spec.is_monotone:
            return FM, None, 0
        FA, off = _axis_accurate_detail(u, i, h, spec.accurate_kind, spec.accurate_order)
        return FM, FA, off
    p_plus = (u[i + 1] - u[i]) / h
    p_minus = (u[i] - u[i - 1]) / h
    FM = lax_friedrichs_1d(H, x, p_plus, p_minus)
    if spec.is_monotone:
        return FM, None, 0
    FA = accurate_hj_1d(u, i, h, x, spec, H)
    if spec.accurate_kind == "centered":
        off = -1
    elif spec.accurate_kind == "upwind":
        off = -spec.accurate_order
    else:
        off = eno_derivative(u, i, h, spec.accurate_order, -1)[1]
    return FM, FA, off


def _node_operator_2d(u, i, j, h, spec, H, x=None, y=None):
    if spec.equation == "eikonal":
        FM = monotone_eikonal_2d(u, i, j, h)
        if spec.is_monotone:
            return FM, None, 0, 0
        ax, offx = _axis_accurate_detail(
            np.asarray(u[:, j], dtype=float), i, h, spec.accurate_kind, spec.accurate_order
        )
        ay, offy = _axis_accurate_detail(
            np.asarray(u[i, :], dtype=float), j, h, spec.accurate_kind, spec.accurate_order
        )
        return FM, math.hypot(ax, ay), offx, offy
    # General 2D Hamiltonians: monotone Lax-Friedrichs only (no benchmark
    # exercises accurate 2D HJ operators).
    if not spec.is_monotone:
        raise NotImplementedError("accurate 2D operators exist for the eikonal equation only")
    N = u.shape[0]
    p_plus = (u[i + 1, j] - u[i, j]) / h if i + 1 <= N - 1 else (u[i, j] - u[i - 1, j]) / h
    p_minus = (u[i, j] - u[i - 1, j]) / h if i - 1 >= 0 else p_plus
    q_plus = (u[i, j + 1] - u[i, j]) / h if j + 1 <= N - 1 else (u[i, j] - u[i, j - 1]) / h
    q_minus = (u[i, j] - u[i, j - 1]) / h if j - 1 >= 0 else q_plus
    return lax_friedrichs_2d(H, x, y, p_plus, p_minus, q_plus, q_minus), None, 0, 0


def apply_operator(u: GridFunction, spec: SchemeSpec, problem):
    """Evaluate the residual field F[u] - f at every non-Fixed node.

    Returns (residuals, record): residuals is a GridFunction that is zero at
    Fixed nodes, and record is the StencilRecord of active branches and
    accurate-stencil offsets.
    """
    grid = u.grid
    mask = classify_nodes(grid, problem, spec.band_width)
    vals = u.values
    h = grid.h
    H = getattr(problem, "hamiltonian", None)
    res = np.zeros(grid.shape)
    branch = np.full(grid.shape, MONOTONE if spec.is_monotone else ACCURATE, dtype=np.int8)
    offx = np.zeros(grid.shape, dtype=np.int16)
    if grid.dim == 1:
        x = grid.axis_coords()
        fvals = problem.f(x)
        for i in range(grid.N):
            if mask[i] == FIXED:
                continue
            FM, FA, off = _node_operator_1d(vals, i, h, x[i], spec, H)
            offx[i] = off
            F, br = _select(FM, FA, h, spec)
            branch[i] = br
            res[i] = F - fvals[i]
        return GridFunction(grid, res), StencilRecord(grid, branch, offx)
    offy = np.zeros(grid.shape, dtype=np.int16)
    xg, yg = grid.coords()
    fvals = np.broadcast_to(problem.f(xg, yg), grid.shape)
    ax = grid.axis_coords()
    for i in range(grid.N):
        for j in range(grid.N):
            if mask[i, j] == FIXED:
                continue
            FM, FA, ox, oy = _node_operator_2d(vals, i, j, h, spec, H, ax[i], ax[j])
            offx[i, j], offy[i, j] = ox, oy
            F, br = _select(FM, FA, h, spec)
            branch[i, j] = br
            res[i, j] = F - fvals[i, j]
    return GridFunction(grid, res), StencilRecord(grid, branch, offx, offy)


def _select(FM, FA, h, spec):
    if spec.is_monotone:
        return FM, MONOTONE
    if spec.filter is None:
        return FA, ACCURATE
    return filtered_residual(FA, FM, h, spec.filter)


# ---------------------------------------------------------------------------
# Vectorized whole-grid fields (used by the fixed-point solver)
# ---------------------------------------------------------------------------


def _axis_monotone_field(U: np.ndarray, h: float) -> np.ndarray:
    """max{backward difference, -forward difference, 0} along the last axis,
    omitting the one-sided term that falls off the grid edge."""
    back = np.full(U.shape, -np.inf)
    fwd = np.full(U.shape, -np.inf)
    diff = np.diff(U, axis=-1) / h
    back[..., 1:] = diff
    fwd[..., :-1] = -diff
    return np.maximum(np.maximum(back, fwd), 0.0)


def _axis_side_upwind_field(U: np.ndarray, h: float, n: int, side: int):
    """(values, valid) of the order-n one-sided derivative along the last axis."""
    N = U.shape[-1]
    c = UPWIND_COEFFS[n]
    vals = np.zeros(U.shape)
    valid = np.zeros(U.shape, dtype=bool)
    if N < n + 1:
        return vals, valid
    if side > 0:
        acc = sum(c[k] * U[..., k : N - n + k] for k in range(n + 1))
        vals[..., : N - n] = acc / h
        valid[..., : N - n] = True
    else:
        acc = sum(c[k] * U[..., n - k : N - k] for k in range(n + 1))
        vals[..., n:] = -acc / h
        valid[..., n:] = True
    return vals, valid


def _axis_side_eno_field(U: np.ndarray, h: float, n: int, side: int):
    """Vectorized ENO one-sided derivative along the last axis.

    Mirrors eno_derivative with the window clamped to the axis range: stencil
    extensions that would leave the grid are forced the other way. Returns
    (values, valid, leftmost offsets).
    """
    N = U.shape[-1]
    idx = np.arange(N)
    vals = np.zeros(U.shape)
    offs = np.zeros(U.shape, dtype=np.int64)
    if side > 0:
        valid = np.broadcast_to(idx <= N - 2, U.shape).copy()
    else:
        valid = np.broadcast_to(idx >= 1, U.shape).copy()
    if N < n + 1:
        return vals, np.zeros(U.shape, dtype=bool), offs
    # left[i] = absolute index of the current leftmost stencil node.
    start = idx if side > 0 else idx - 1
    left = np.broadcast_to(np.clip(start, 0, N - 2), U.shape).copy()
    for r in range(1, n):
        d = np.diff(U, r + 1, axis=-1)  # undivided differences, order r+1
        hi_start = N - (r + 2)  # last valid start index for an order-(r+1) diff
        can_left = left - 1 >= 0
        can_right = left + r + 1 <= N - 1
        ddL = np.abs(np.take_along_axis(d, np.clip(left - 1, 0, hi_start), axis=-1))
        ddR = np.abs(np.take_along_axis(d, np.clip(left, 0, hi_start), axis=-1))
        if side > 0:
            prefer_left = ddL < ddR
        else:
            prefer_left = ddL <= ddR
        go_left = can_left & (~can_right | prefer_left)
        left = np.where(go_left, left - 1, left)
    pos = np.clip(idx, 0, None) - left  # position of the node inside its stencil
    W = _DERIV_WEIGHTS[n]
    w = W[np.clip(pos, 0, n)]  # shape (..., n+1)
    acc = np.zeros(U.shape)
    for k in range(n + 1):
        acc += w[..., k] * np.take_along_axis(U, np.clip(left + k, 0, N - 1), axis=-1)
    vals = acc / h
    offs = left - idx
    return vals, valid, offs


def _axis_accurate_field(U: np.ndarray, h: float, kind: str, n: int) -> np.ndarray:
    """Vectorized counterpart of _axis_accurate_detail along the last axis."""
    N = U.shape[-1]
    mono = _axis_monotone_field(U, h)
    if kind == "centered":
        core = np.full(U.shape, -np.inf)
        core[..., 1:-1] = np.abs(U[..., 2:] - U[..., :-2]) / (2.0 * h)
        vm, okm = _axis_side_upwind_field(U, h, 2, -1)
        vp, okp = _axis_side_upwind_field(U, h, 2, +1)
        edge = np.maximum(np.where(okm, vm, -np.inf), np.where(okp, -vp, -np.inf))
        idx = np.arange(N)
        interior = np.broadcast_to((idx >= 1) & (idx <= N - 2), U.shape)
        out = np.where(interior, core, edge)
        return np.where(np.isfinite(out), out, mono)
    if kind == "upwind":
        vm, okm = _axis_side_upwind_field(U, h, n, -1)
        vp, okp = _axis_side_upwind_field(U, h, n, +1)
    else:
        vm, okm, _ = _axis_side_eno_field(U, h, n, -1)
        vp, okp, _ = _axis_side_eno_field(U, h, n, +1)
    out = np.maximum(np.where(okm, vm, -np.inf), np.where(okp, -vp, -np.inf))
    return np.where(np.isfinite(out), out, mono)


def _along_axis(fn, U, axis, *args, **kwargs):
    moved = np.moveaxis(U, axis, -1)
    return np.moveaxis(fn(moved, *args, **kwargs), -1, axis)


def eikonal_monotone_field(u: np.ndarray, h: float) -> np.ndarray:
    """Monotone eikonal operator on the whole grid (1D or 2D array)."""
    if u.ndim == 1:
        return _axis_monotone_field(u, h)
    ax = _along_axis(_axis_monotone_field, u, 0, h)
    ay = _axis_monotone_field(u, h)
    return np.hypot(ax, ay)


def eikonal_accurate_field(u: np.ndarray, h: float, kind: str, n: int) -> np.ndarray:
    """Accurate eikonal operator on the whole grid, with edge fallbacks."""
    if u.ndim == 1:
        return _axis_accurate_field(u, h, kind, n)
    ax = _along_axis(_axis_accurate_field, u, 0, h, kind, n)
    ay = _axis_accurate_field(u, h, kind, n)
    return np.hypot(ax, ay)


def _one_sided_first_diffs(u: np.ndarray, h: float):
    # Forward/backward differences with edge entries duplicated from the
    # available side (edge nodes sit in Dirichlet bands for 1D problems).
    d = np.diff(u) / h
    p_plus = np.concatenate([d, d[-1:]])
    p_minus = np.concatenate([d[:1], d])
    return p_plus, p_minus


def hj_monotone_field_1d(u: np.ndarray, h: float, H: Hamiltonian, x: np.ndarray) -> np.ndarray:
    p_plus, p_minus = _one_sided_first_diffs(u, h)
    return H.evaluate(x, 0.5 * (p_plus + p_minus)) - 0.5 * H.sigma_x * (p_plus - p_minus)


def hj_accurate_field_1d(
    u: np.ndarray, h: float, H: Hamiltonian, x: np.ndarray, kind: str, n: int
) -> np.ndarray:
    if kind == "centered":
        p = np.gradient(u, h)  # central in the core, one-sided at the ends
        return H.evaluate(x, p)
    if kind == "upwind":
        vm, okm = _axis_side_upwind_field(u, h, n, -1)
        vp, okp = _axis_side_upwind_field(u, h, n, +1)
    else:
        vm, okm, _ = _axis_side_eno_field(u, h, n, -1)
        vp, okp, _ = _axis_side_eno_field(u, h, n, +1)
    p_plus_1, p_minus_1 = _one_sided_first_diffs(u, h)
    d_minus = np.where(okm, vm, p_minus_1)
    d_plus = np.where(okp, vp, p_plus_1)
    return H.evaluate(x, 0.5 * (d_plus + d_minus)) - 0.5 * H.sigma_x * (d_plus - d_minus)


def hj_monotone_field_2d(
    u: np.ndarray, h: float, H: Hamiltonian, x: np.ndarray, y: np.ndarray
) -> np.ndarray:
    dx = np.diff(u, axis=0) / h
    p_plus = np.concatenate([dx, dx[-1:, :]], axis=0)
    p_minus = np.concatenate([dx[:1, :], dx], axis=0)
    dy = np.diff(u, axis=1) / h
    q_plus = np.concatenate([dy, dy[:, -1:]], axis=1)
    q_minus = np.concatenate([dy[:, :1], dy], axis=1)
    return (
        H.evaluate(x, y, 0.5 * (p_plus + p_minus), 0.5 * (q_plus + q_minus))
        - 0.5 * H.sigma_x * (p_plus - p_minus)
        - 0.5 * H.sigma_y * (q_plus - q_minus)
    )


def operator_field(u: np.ndarray, grid, spec: SchemeSpec, problem) -> np.ndarray:
    """Vectorized F[u] over the whole grid for the configured scheme.

    Applies the filter pointwise when the spec carries one. Fixed-node
    entries are computed like any other and must be ignored by callers.
    """
    h = grid.h
    H = getattr(problem, "hamiltonian", None)
    if spec.equation == "eikonal":
        FM = eikonal_monotone_field(u, h)
        if spec.is_monotone:
            return FM
        FA = eikonal_accurate_field(u, h, spec.accurate_kind, spec.accurate_order)
    else:
        if grid.dim == 1:
            x = grid.axis_coords()
            FM = hj_monotone_field_1d(u, h, H, x)
            if spec.is_monotone:
                return FM
            FA = hj_accurate_field_1d(u, h, H, x, spec.accurate_kind, spec.accurate_order)
        else:
            if not spec.is_monotone:
                raise NotImplementedError(
                    "accurate 2D operators exist for the eikonal equation only"
                )
            xg, yg = grid.coords()
            return hj_monotone_field_2d(u, h, H, xg, yg)
    if spec.filter is None:
        return FA
    theta = spec.filter.threshold(h)
    return np.where(np.abs(FA - FM) <= theta, FA, FM)
