"""Uniform Cartesian grids, node classification, and sweep orderings.

Grids are 1D intervals or square 2D boxes with the same node count N and
spacing h on every axis. Nodes are classified as Unknown (solved for),
Fixed (Dirichlet data prescribed, never updated), or CompBoundary (edge of
the computational box in 2D external problems, updated with one-sided
stencils).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Sentinel for uninitialized unknowns in minimum-structure solves. Any value
# far above the largest exact solution works.
LARGE = 1e10

UNKNOWN = 0
FIXED = 1
COMP_BOUNDARY = 2


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid on [a, b] (1D) or [a, b]^2 (2D).

    Attributes
    ----------
    dim : int
        1 or 2.
    a, b : float
        Domain bounds, shared by both axes in 2D.
    N : int
        Nodes per axis.
    h : float
        Spacing (b - a) / (N - 1).
    """

    dim: int
    a: float
    b: float
    N: int
    h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h", (self.b - self.a) / (self.N - 1))

    @property
    def shape(self) -> tuple:
        return (self.N,) if self.dim == 1 else (self.N, self.N)

    @property
    def num_nodes(self) -> int:
        return self.N if self.dim == 1 else self.N * self.N

    def axis_coords(self) -> np.ndarray:
        """Node coordinates along one axis; x(i) = a + i*h."""
        return self.a + self.h * np.arange(self.N)

    def coords(self):
        """Coordinate arrays broadcastable to the grid shape.

        Returns x of shape (N,) in 1D; (x, y) with shapes (N, 1) and (1, N)
        in 2D, where values[i, j] lives at (x[i], y[j]).
        """
        ax = self.axis_coords()
        if self.dim == 1:
            return ax
        return ax[:, None], ax[None, :]


@dataclass
class GridFunction:
    """Real values attached to every node of a grid.

    values has shape (N,) in 1D and (N, N) in 2D with values[i, j] at
    (a + i*h, a + j*h).
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape "
                f"{self.grid.shape}"
            )

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


def build_grid(dim: int, a: float, b: float, N: int) -> Grid:
    """Build a uniform grid with h = (b - a)/(N - 1).

    Parameters
    ----------
    dim : int
        1 or 2.
    a, b : float
        Domain bounds, b > a.
    N : int
        Nodes per axis, at least 4.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if N < 4:
        raise ValueError(f"N must be >= 4, got {N}")
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    return Grid(dim=dim, a=float(a), b=float(b), N=int(N))


def classify_nodes(grid: Grid, problem, scheme_order: int) -> np.ndarray:
    """Classify every node as UNKNOWN, FIXED, or COMP_BOUNDARY.

    1D: the scheme_order nodes adjacent to each endpoint (endpoint included)
    are FIXED, so order-n stencils never leave the grid. 2D: FIXED nodes come
    from the problem's Dirichlet band policy; remaining nodes on the outer
    rectangle edge are COMP_BOUNDARY.

    Parameters
    ----------
    grid : Grid
    problem : Problem
        Supplies the Dirichlet band via ``fixed_nodes(grid, scheme_order)``
        in 2D; unused in 1D beyond validation.
    scheme_order : int
        Width of the 1D band per end; passed through to the 2D band policy.
    """
    if scheme_order < 1:
        raise ValueError(f"scheme_order must be >= 1, got {scheme_order}")
    mask = np.full(grid.shape, UNKNOWN, dtype=np.int8)
    if grid.dim == 1:
        if 2 * scheme_order >= grid.N:
            raise ValueError(
                f"band of {scheme_order} nodes per end does not fit in "
                f"N={grid.N}"
            )
        mask[:scheme_order] = FIXED
        mask[-scheme_order:] = FIXED
        return mask
    fixed = problem.fixed_nodes(grid, scheme_order)
    if not fixed.any():
        raise ValueError("Dirichlet band is empty on this grid")
    if fixed.all():
        raise ValueError("Dirichlet band covers the whole grid")
    mask[fixed] = FIXED
    edge = np.zeros(grid.shape, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    mask[edge & ~fixed] = COMP_BOUNDARY
    return mask


@dataclass(frozen=True)
class SweepOrdering:
    """One Gauss-Seidel traversal direction.

    outer is the axis iterated in the outer loop ("i" or "j"); steps are +1
    (ascending) or -1 (descending). Iterating yields node indices: plain i in
    1D, (i, j) pairs in 2D.
    """

    dim: int
    N: int
    i_step: int
    j_step: int = 0
    outer: str = "i"

    def _axis_range(self, step: int) -> range:
        return range(self.N) if step > 0 else range(self.N - 1, -1, -1)

    def __iter__(self):
        if self.dim == 1:
            return iter(self._axis_range(self.i_step))
        if self.outer == "i":
            return (
                (i, j)
                for i in self._axis_range(self.i_step)
                for j in self._axis_range(self.j_step)
            )
        return (
            (i, j)
            for j in self._axis_range(self.j_step)
            for i in self._axis_range(self.i_step)
        )


def sweep_orderings(dim: int, N: int) -> list:
    """Alternating node orderings for fast sweeping.

    1D gives the two directions (ascending i, descending i). 2D gives eight:
    the four i-outer orderings with sign pattern (+,+), (+,-), (-,-), (-,+),
    then the same four with j as the outer loop.
    """
    if dim == 1:
        return [
            SweepOrdering(1, N, +1),
            SweepOrdering(1, N, -1),
        ]
    if dim == 2:
        signs = [(+1, +1), (+1, -1), (-1, -1), (-1, +1)]
        return [SweepOrdering(2, N, si, sj, "i") for si, sj in signs] + [
            SweepOrdering(2, N, si, sj, "j") for si, sj in signs
        ]
    raise ValueError(f"dim must be 1 or 2, got {dim}")


def write_grid_function_csv(gf: GridFunction, path) -> None:
    """Write a grid function as CSV with header x[,y],u at full precision."""
    g = gf.grid
    with open(path, "w") as fh:
        if g.dim == 1:
            fh.write("x,u\n")
            x = g.axis_coords()
            for i in range(g.N):
                fh.write(f"{x[i]:.17g},{gf.values[i]:.17g}\n")
        else:
            fh.write("x,y,u\n")
            ax = g.axis_coords()
            for i in range(g.N):
                for j in range(g.N):
                    fh.write(
                        f"{ax[i]:.17g},{ax[j]:.17g},{gf.values[i, j]:.17g}\n"
                    )
