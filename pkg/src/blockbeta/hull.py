"""Convex hulls with verified combinatorics.

Hull construction is delegated to qhull (scipy.spatial.ConvexHull),
which returns a triangulated facet list with unit outward normals.
This module owns everything around it: near-duplicate removal with an
index map back to the caller's cloud, degeneracy detection, the face
counts f_0..f_{d-1} recovered from the simplicial facet list, volume by
coning simplices from an interior point, and membership tests.

brute_force_facets is an independent oracle: it enumerates all d-point
subsets and keeps those whose hyperplane has every remaining point
strictly on one side, decided by the exact orientation predicate.  It
shares no hull code with the qhull path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull as _QhullConvexHull
from scipy.spatial import QhullError

from .predicates import orientation

DEDUP_DECIMALS = 12          # points equal after rounding here are merged
CONTAINS_TOL = 1e-9
BRUTE_FORCE_MAX_POINTS = 25


class DegenerateInput(ValueError):
    """Input cloud has no full-dimensional hull."""


@dataclass(eq=False)
class Facet:
    """One simplicial facet: vertex ids index the caller's point cloud."""

    vertex_ids: tuple[int, ...]
    normal: np.ndarray
    offset: float


@dataclass(eq=False)
class HullResult:
    points: np.ndarray                # the original input cloud
    dim: int
    vertex_ids: tuple[int, ...]       # hull vertices, original indices
    facet_vertices: np.ndarray        # (nfacets, d) int, original indices
    normals: np.ndarray               # (nfacets, d) unit outward
    offsets: np.ndarray               # facet plane is {x . normal = offset}
    interior_point: np.ndarray

    @property
    def facets(self) -> list[Facet]:
        return [
            Facet(tuple(int(i) for i in vs), n, float(off))
            for vs, n, off in zip(self.facet_vertices, self.normals, self.offsets)
        ]


def _dedup(pts: np.ndarray) -> np.ndarray:
    """Indices of representatives after merging near-duplicates."""
    keys = np.round(pts, DEDUP_DECIMALS)
    # +0.0 normalizes -0.0 so the rounding key is sign-stable
    _, first = np.unique(keys + 0.0, axis=0, return_index=True)
    return np.sort(first)


def convex_hull(points) -> HullResult:
    """Convex hull of a full-dimensional point cloud.

    Near-duplicate points (within the rounding grid) are merged and all
    reported indices refer to the original cloud.  Raises
    DegenerateInput when the cloud is not full-dimensional or has fewer
    than d+1 distinct points.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise ValueError(f"expected an (n, d) array, got shape {pts.shape}")
    n, d = pts.shape
    if d < 1:
        raise ValueError("need at least one coordinate")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    keep = _dedup(pts)
    core = pts[keep]
    if len(core) < d + 1:
        raise DegenerateInput(
            f"{len(core)} distinct points cannot span dimension {d}"
        )
    rank = np.linalg.matrix_rank(core - core[0], tol=1e-9)
    if rank < d:
        raise DegenerateInput(f"cloud has affine rank {rank} < {d}")

    if d == 1:                         # qhull starts at the plane
        lo = keep[int(np.argmin(core[:, 0]))]
        hi = keep[int(np.argmax(core[:, 0]))]
        return HullResult(
            points=pts,
            dim=1,
            vertex_ids=tuple(sorted((int(lo), int(hi)))),
            facet_vertices=np.array([[lo], [hi]], dtype=int),
            normals=np.array([[-1.0], [1.0]]),
            offsets=np.array([-float(pts[lo, 0]), float(pts[hi, 0])]),
            interior_point=np.array([(pts[lo, 0] + pts[hi, 0]) / 2.0]),
        )

    try:
        qh = _QhullConvexHull(core)
    except QhullError as exc:          # pragma: no cover - rank check catches most
        raise DegenerateInput(f"hull construction failed: {exc}") from exc

    facet_vertices = keep[qh.simplices]
    facet_vertices = np.sort(facet_vertices, axis=1)
    normals = qh.equations[:, :-1].copy()
    # qhull convention: normal . x + offset <= 0 inside
    offsets = -qh.equations[:, -1].copy()

    hull_vertex_rows = qh.vertices
    interior = core[hull_vertex_rows].mean(axis=0)
    vertex_ids = tuple(int(i) for i in np.sort(keep[hull_vertex_rows]))

    return HullResult(
        points=pts,
        dim=d,
        vertex_ids=vertex_ids,
        facet_vertices=facet_vertices,
        normals=normals,
        offsets=offsets,
        interior_point=interior,
    )


def f_vector(hull: HullResult) -> tuple[int, ...]:
    """Face counts (f_0, ..., f_{d-1}).

    Every j-face of a simplicial polytope is a (j+1)-subset of some
    facet's vertex set, and conversely, so counting distinct subsets
    per size gives the full vector.
    """
    d = hull.dim
    fv = hull.facet_vertices
    counts = []
    for size in range(1, d + 1):
        if size == d:
            counts.append(len(fv))
            continue
        if size == 1:
            counts.append(len(np.unique(fv)))
            continue
        idx = list(combinations(range(d), size))
        sub = fv[:, idx].reshape(-1, size)
        counts.append(len(np.unique(sub, axis=0)))
    return tuple(counts)


def volume(hull: HullResult) -> float:
    """Hull volume: sum of simplex cones from an interior point."""
    verts = hull.points[hull.facet_vertices]          # (nf, d, d)
    rel = verts - hull.interior_point
    dets = np.linalg.det(rel)
    return float(np.abs(dets).sum() / math.factorial(hull.dim))


def contains_point(hull: HullResult, x, tol: float = CONTAINS_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(hull.normals @ x <= hull.offsets + tol))


def contains_points(hull: HullResult, xs, tol: float = CONTAINS_TOL) -> np.ndarray:
    """Vectorized membership for an (n, d) array of query points."""
    xs = np.asarray(xs, dtype=float)
    return np.all(xs @ hull.normals.T <= hull.offsets + tol, axis=1)


def euler_relation_holds(face_counts: tuple[int, ...]) -> bool:
    """Alternating sum of face counts equals 1 - (-1)^d."""
    d = len(face_counts)
    alt = sum((-1) ** j * f for j, f in enumerate(face_counts))
    return alt == 1 - (-1) ** d


def ridges_regular(hull: HullResult) -> bool:
    """Every ridge ((d-1)-face) lies in exactly two facets."""
    d = hull.dim
    fv = hull.facet_vertices
    if d == 1:
        return len(fv) == 2
    idx = list(combinations(range(d), d - 1))
    sub = fv[:, idx].reshape(-1, d - 1)
    _, counts = np.unique(sub, axis=0, return_counts=True)
    return bool(np.all(counts == 2))


def lower_face_coefficient(d: int, j: int) -> float:
    """Best constant rho(d, j) with f_j >= rho(d, j) f_{d-1} for polytopes.

    Positive exactly for j >= floor(d/2) - 1.
    """
    k = d - j - 1
    return 0.5 * (math.comb(math.ceil(d / 2), k) + math.comb(math.floor(d / 2), k))


def lower_face_bounds_hold(face_counts: tuple[int, ...]) -> bool:
    """f_j >= rho(d, j) f_{d-1} for every j where the bound is positive."""
    d = len(face_counts)
    top = face_counts[-1]
    lo = max(d // 2 - 1, 0)
    return all(
        face_counts[j] >= lower_face_coefficient(d, j) * top for j in range(lo, d)
    )


def read_points(path) -> np.ndarray:
    """Read a point cloud: whitespace-separated, one point per line."""
    return np.loadtxt(path, ndmin=2)


def write_facets(path, hull: HullResult) -> None:
    """Write facets as vertex-id lists, one facet per line."""
    with open(path, "w") as fh:
        for row in hull.facet_vertices:
            fh.write(" ".join(str(int(i)) for i in row) + "\n")


def brute_force_facets(points) -> list[tuple[int, ...]]:
    """All facets of the hull by exhaustive search, exact arithmetic.

    Returns sorted vertex-id tuples (original indices) of every d-subset
    whose hyperplane has all remaining points strictly on one side.
    Intended as an oracle for small clouds in general position.
    """
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    if n > BRUTE_FORCE_MAX_POINTS:
        raise ValueError(
            f"brute force is limited to {BRUTE_FORCE_MAX_POINTS} points, got {n}"
        )
    keep = _dedup(pts)
    facets = []
    for subset in combinations(keep.tolist(), d):
        simplex = [pts[i] for i in subset]
        side = 0
        ok = True
        for i in keep:
            if i in subset:
                continue
            s = orientation(simplex, pts[i])
            if s == 0:
                ok = False
                break
            if side == 0:
                side = s
            elif s != side:
                ok = False
                break
        if ok and side != 0:
            facets.append(tuple(sorted(subset)))
    return facets
