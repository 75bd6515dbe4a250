"""Uniform tensor grids with exact boundary distance and the Dirichlet Laplacian.

The domain is a 1D interval or a 2D axis-aligned rectangle.  Fields live on
the interior nodes only, in lexicographic order; the homogeneous Dirichlet
boundary value is implicit.  The distance d(x) to the boundary is evaluated
by the exact formula of the continuous domain, never by nearest-node search,
so singular weights d^(-gamma) are well defined at every node where a field
has a value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class InvalidResolutionError(ValueError):
    """Raised when a grid is requested with fewer than 2 subdivisions."""


@dataclass(frozen=True)
class DomainShape:
    """Geometry of the domain: "interval" (1D) or "rectangle" (2D).

    extents holds the side lengths: (length,) for an interval,
    (width, height) for a rectangle.  All extents must be positive.
    """

    kind: str
    extents: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        want = 1 if self.kind == "interval" else 2
        if len(self.extents) != want:
            raise ValueError(f"{self.kind} needs {want} extent(s), got {len(self.extents)}")
        if any(not np.isfinite(e) or e <= 0 for e in self.extents):
            raise ValueError(f"extents must be positive finite, got {self.extents}")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum(e * e for e in self.extents)))


def interval(length: float = 1.0) -> DomainShape:
    """Interval (0, length)."""
    return DomainShape("interval", (float(length),))


def rectangle(width: float = 1.0, height: float = 1.0) -> DomainShape:
    """Rectangle (0, width) x (0, height)."""
    return DomainShape("rectangle", (float(width), float(height)))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid over a DomainShape.

    Attributes:
        shape: the continuous domain.
        n: number of subdivisions per axis (same n on every axis).
        h: spacing per axis, extent/n.
        axes: 1D arrays of interior coordinates per axis, each of length n-1.
        d: exact distance to the boundary at each interior node, in
           lexicographic (first-axis-major) order.
    """

    shape: DomainShape
    n: int
    h: tuple[float, ...]
    axes: tuple[np.ndarray, ...]
    d: np.ndarray

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    @property
    def num_interior(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def cell_volume(self) -> float:
        """Midpoint-rule quadrature weight: h (1D) or hx*hy (2D) per node."""
        return float(np.prod(self.h))

    def points(self) -> np.ndarray:
        """All interior node coordinates, shape (num_interior, dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def check_field(self, u: np.ndarray) -> np.ndarray:
        """Validate a nodal field and return it as a float array."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.num_interior,):
            raise ValueError(f"field has shape {u.shape}, expected ({self.num_interior},)")
        return u


def _distance(shape: DomainShape, points: np.ndarray) -> np.ndarray:
    if shape.kind == "interval":
        (length,) = shape.extents
        x = points[:, 0]
        return np.minimum(x, length - x)
    width, height = shape.extents
    x, y = points[:, 0], points[:, 1]
    return np.minimum.reduce([x, width - x, y, height - y])


def build_grid(shape: DomainShape, n: int) -> Grid:
    """Uniform grid with n subdivisions (n-1 interior nodes) per axis.

    Raises InvalidResolutionError for n < 2.
    """
    n = int(n)
    if n < 2:
        raise InvalidResolutionError(f"need n >= 2 subdivisions, got n={n}")
    h = tuple(e / n for e in shape.extents)
    axes = tuple(hi * np.arange(1, n) for hi in h)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    d = _distance(shape, pts)
    d.setflags(write=False)
    return Grid(shape=shape, n=n, h=h, axes=axes, d=d)


def _second_difference(m: int) -> sp.csr_matrix:
    # 1D negative second-difference matrix tridiag(-1, 2, -1), unscaled.
    return sp.diags_array(
        [-np.ones(m - 1), 2.0 * np.ones(m), -np.ones(m - 1)], offsets=[-1, 0, 1]
    ).tocsr()


def assemble_laplacian(grid: Grid) -> sp.csr_matrix:
    """Discrete negative Laplacian -lap_h with eliminated Dirichlet rows.

    Standard 3-point (1D) or 5-point (2D) stencil scaled by 1/h^2 per axis.
    The result is a symmetric positive definite M-matrix, which is what makes
    the discrete comparison principle available downstream.
    """
    ms = grid.interior_shape
    if grid.dim == 1:
        return (_second_difference(ms[0]) / grid.h[0] ** 2).tocsr()
    tx = _second_difference(ms[0]) / grid.h[0] ** 2
    ty = _second_difference(ms[1]) / grid.h[1] ** 2
    ix = sp.identity(ms[0], format="csr")
    iy = sp.identity(ms[1], format="csr")
    return (sp.kron(tx, iy) + sp.kron(ix, ty)).tocsr()


def power_weight(grid: Grid, gamma: float) -> np.ndarray:
    """Nodal weight d(x)^(-gamma); finite and positive at interior nodes."""
    return grid.d ** (-float(gamma))


def gradient_components(
    grid: Grid, u: np.ndarray, one_sided_boundary: bool = False
) -> tuple[np.ndarray, ...]:
    """Per-axis difference quotients of a field with implicit zero boundary.

    Central differences everywhere by default (the known boundary value 0
    supplies the missing neighbor, so quadratics are differentiated exactly).
    With one_sided_boundary=True, nodes adjacent to the boundary use the
    one-sided quotient toward the wall instead, which is the right stencil
    when the near-wall slope itself is the quantity of interest.
    """
    u = grid.check_field(u).reshape(grid.interior_shape)
    out = []
    for axis in range(grid.dim):
        h = grid.h[axis]
        padded = np.moveaxis(u, axis, 0)
        m = padded.shape[0]
        ext = np.zeros((m + 2,) + padded.shape[1:])
        ext[1:-1] = padded
        g = (ext[2:] - ext[:-2]) / (2.0 * h)
        if one_sided_boundary:
            g[0] = padded[0] / h
            g[-1] = -padded[-1] / h
        out.append(np.moveaxis(g, 0, axis).reshape(-1))
    return tuple(out)
