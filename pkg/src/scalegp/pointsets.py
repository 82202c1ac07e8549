"""Evaluation-point designs on [0,1]^d and their geometric summaries.

Two one-dimensional generators are provided: the uniform grid with
endpoints, {0, 1/(N-1), ..., 1}, and the nested base-2 van der Corput
sequence. Two-dimensional designs are Cartesian powers of a 1-d axis.
The geometry of a set is summarized by its fill distance h (radius of the
largest data-free ball in the domain), separation radius q (half the
minimum pairwise distance) and mesh ratio rho = h/q >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .validation import check_points, check_unit_cube

__all__ = ["PointSet", "Geometry", "uniform_grid", "van_der_corput",
           "cartesian_product", "geometry"]

# Fill-distance lattice resolution per axis when none is requested.
_DEFAULT_RESOLUTION = {1: 512, 2: 256}
_MIN_RESOLUTION = 64


@dataclass(frozen=True)
class PointSet:
    """N distinct points in [0,1]^dim with a provenance tag.

    ``axis`` is populated for Cartesian products and holds the generating
    1-d set; the geometry of a product then follows exactly from the axis
    instead of a lattice search.
    """

    points: np.ndarray
    dim: int
    provenance: str = "explicit"
    axis: "PointSet | None" = field(default=None, compare=False)

    def __post_init__(self):
        pts = check_unit_cube(check_points(self.points, dim=self.dim,
                                           name="points"), name="points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        # Exact duplicates only; near-coincident points are legal (they
        # show up as ill conditioning downstream, not as a shape error).
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("points must be pairwise distinct")

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class Geometry:
    """Fill distance, separation radius and their ratio."""

    fill_distance: float
    separation_radius: float
    mesh_ratio: float


def uniform_grid(n):
    """Uniform grid of n >= 2 points on [0,1] including both endpoints.

    Fill distance is 1/(2(n-1)), attained midway between neighbours, so the
    grid is quasi-uniform with mesh ratio exactly 1.
    """
    n = _check_count(n, minimum=2)
    pts = np.linspace(0.0, 1.0, n).reshape(-1, 1)
    return PointSet(pts, dim=1, provenance="uniform_grid")


def van_der_corput(n):
    """First n terms of the base-2 van der Corput sequence, starting at 0.

    The radical inverse of index k reverses k's binary digits across the
    radix point: 0, 1/2, 1/4, 3/4, 1/8, 5/8, 3/8, 7/8, ... Prefixes are
    nested by construction.
    """
    n = _check_count(n, minimum=1)
    values = np.empty(n)
    for k in range(n):
        x, denom, q = 0.0, 1, k
        while q:
            q, r = divmod(q, 2)
            denom *= 2
            x += r / denom
        values[k] = x
    return PointSet(values.reshape(-1, 1), dim=1, provenance="van_der_corput")


def cartesian_product(axis, dim):
    """All dim-fold tuples of a 1-d axis set, in row-major order."""
    if not isinstance(axis, PointSet) or axis.dim != 1:
        raise ValueError("axis must be a 1-d PointSet")
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if dim == 1:
        return axis
    ax = axis.points[:, 0]
    grids = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, 2)
    return PointSet(pts, dim=2, provenance="cartesian_product", axis=axis)


def _check_count(n, minimum):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"point count must be an integer, got {n!r}")
    if n < minimum:
        raise ValueError(f"point count must be >= {minimum}, got {n}")
    return int(n)


def _fill_distance_1d(x):
    """Exact 1-d fill distance from sorted coordinates."""
    xs = np.sort(x)
    gaps = np.diff(xs)
    interior = gaps.max() / 2.0 if gaps.size else 0.0
    return max(xs[0] - 0.0, 1.0 - xs[-1], interior)


def _separation_radius(pts):
    return float(pdist(pts).min()) / 2.0


def _fill_distance_lattice(pts, resolution):
    """Lattice lower bound on the fill distance, d = 2.

    Candidates are the tensor lattice (within sqrt(d)/resolution of any
    point of the domain) plus the midpoint of the closest pair, whose
    distance to the set is exactly the separation radius; including it
    keeps the computed mesh ratio >= 1.
    """
    axis = np.linspace(0.0, 1.0, resolution)
    grids = np.meshgrid(axis, axis, indexing="ij")
    lattice = np.stack(grids, axis=-1).reshape(-1, 2)

    dists = cdist(pts, pts)
    np.fill_diagonal(dists, np.inf)
    i, j = np.unravel_index(np.argmin(dists), dists.shape)
    midpoint = (pts[i] + pts[j]) / 2.0
    candidates = np.vstack([lattice, midpoint[None, :]])

    best = 0.0
    chunk = max(1, 8_388_608 // max(1, pts.shape[0]))
    for start in range(0, candidates.shape[0], chunk):
        block = candidates[start:start + chunk]
        best = max(best, float(cdist(block, pts).min(axis=1).max()))
    return best


def geometry(X, resolution=None):
    """Geometric summary (h, q, rho) of a point set.

    The separation radius is exact. The fill distance is exact for the
    shipped generators: closed form for uniform grids (so rho = 1 holds
    bitwise), sorted gaps in d=1, and axis decoupling for Cartesian
    products (the farthest point of the square realizes the axis fill in
    both coordinates, h = sqrt(d) h_axis, while the closest pair differs
    in one, q = q_axis). Explicit d=2 sets fall back to the maximum over
    a ``resolution``-per-axis candidate lattice, within
    sqrt(d)/resolution of the true supremum.

    Parameters
    ----------
    X : PointSet or array-like
        At least two points.
    resolution : int >= 64, optional
        Lattice resolution per axis; defaults to 512 (d=1) or 256 (d=2).
    """
    if isinstance(X, PointSet):
        if X.provenance == "uniform_grid" and len(X) > 1:
            # Half the grid gap, in one rounding: h = q exactly.
            half = 0.5 / (len(X) - 1)
            return Geometry(half, half, 1.0)
        if X.axis is not None:
            axis_geo = geometry(X.axis, resolution=resolution)
            h = math.sqrt(X.dim) * axis_geo.fill_distance
            q = axis_geo.separation_radius
            return Geometry(h, q, h / q)
        pts = X.points
    else:
        pts = check_unit_cube(check_points(X, name="X"), name="X")
    if pts.shape[0] < 2:
        raise ValueError("geometry requires at least two points "
                         "(separation undefined)")
    dim = pts.shape[1]
    if dim not in (1, 2):
        raise ValueError(f"geometry supports d in {{1, 2}}, got {dim}")
    if resolution is None:
        resolution = _DEFAULT_RESOLUTION[dim]
    if not isinstance(resolution, (int, np.integer)) or resolution < _MIN_RESOLUTION:
        raise ValueError(f"resolution must be an integer >= {_MIN_RESOLUTION}")

    q = _separation_radius(pts)
    if dim == 1:
        h = float(_fill_distance_1d(pts[:, 0]))
    else:
        h = _fill_distance_lattice(pts, int(resolution))
    return Geometry(h, q, h / q)
