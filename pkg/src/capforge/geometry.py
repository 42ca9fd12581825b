"""
Planar primitives: polylines, arclength, turning angles, winding, simplicity, hulls.

Points are complex numbers ``x + iy`` throughout; a ``Point2`` is just a
``complex``.  All containers are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BoundaryPointError, GeometryError, OrientationError

Point2 = complex

#: relative intersection tolerance, scaled by total length
INTERSECTION_RTOL = 1e-12
#: polylines at or below this many segments are checked pairwise
BRUTE_FORCE_THRESHOLD = 64


def as_points(points) -> np.ndarray:
    """Coerce complex numbers, ``(x, y)`` pairs or an ``(n, 2)`` array to complex."""
    arr = np.asarray(points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        return arr[:, 0].astype(float) + 1j * arr[:, 1].astype(float)
    return np.asarray(arr, dtype=complex).reshape(-1)


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered planar points, optionally closed.

    For closed polylines the closing edge ``points[-1] -> points[0]`` is
    implicit; the first point is never repeated at the end.
    """

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = as_points(self.points).copy()
        if pts.size < 2:
            raise GeometryError("a polyline needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("polyline coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if np.any(self.edge_lengths == 0.0):
            k = int(np.flatnonzero(self.edge_lengths == 0.0)[0])
            raise GeometryError(f"zero-length edge {k}: consecutive points coincide")

    def __len__(self):
        return self.points.size

    @property
    def n_edges(self) -> int:
        return self.points.size if self.closed else self.points.size - 1

    @property
    def starts(self) -> np.ndarray:
        return self.points[: self.n_edges]

    @property
    def ends(self) -> np.ndarray:
        return np.roll(self.points, -1)[: self.n_edges] if self.closed else self.points[1:]

    @property
    def edges(self) -> np.ndarray:
        return self.ends - self.starts

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.abs(self.edges)

    @property
    def length(self) -> float:
        return float(math.fsum(self.edge_lengths))

    @property
    def diameter(self) -> float:
        pts = self.points
        if pts.size > 2000:
            pts = convex_hull_points(pts)
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    @property
    def signed_area(self) -> float:
        return signed_area(self)

    @property
    def is_degenerate(self) -> bool:
        """True for closed polylines whose vertices all lie on one line (e.g. a doubled segment)."""
        if not self.closed:
            return False
        z = self.points - self.points.mean()
        far = z[np.argmax(np.abs(z))]
        u = far / abs(far)
        return bool(np.max(np.abs(np.imag(np.conj(u) * z))) <= INTERSECTION_RTOL * self.length)

    def reversed(self) -> "Polyline":
        """Same closed curve traversed the other way, keeping the first point first."""
        if self.closed:
            return Polyline(np.concatenate([self.points[:1], self.points[:0:-1]]), True)
        return Polyline(self.points[::-1], False)

    def transformed(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Polyline":
        return Polyline(fn(self.points), self.closed)

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"Polyline({self.points.size} points, {kind}, L={self.length:.6g})"


@dataclass(frozen=True, eq=False)
class ArcLengthParam:
    """Unit-speed parametrization ``s(t)`` of a polyline.

    ``cumulative_lengths[k]`` is the arclength at the end of edge ``k``; the
    last entry is the total length ``L``.  ``directions[k]`` is the unit
    tangent ``s'(t)`` on edge ``k``.
    """

    origin: complex
    starts: np.ndarray
    cumulative_lengths: np.ndarray
    directions: np.ndarray

    @property
    def length(self) -> float:
        return float(self.cumulative_lengths[-1])

    @property
    def edge_starts_t(self) -> np.ndarray:
        """Arclength at the start of every edge (first entry 0)."""
        return np.concatenate([[0.0], self.cumulative_lengths[:-1]])

    def edge_index(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.cumulative_lengths, t, side="right")
        return np.clip(k, 0, self.cumulative_lengths.size - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = self.edge_index(t)
        return self.starts[k] + (t - self.edge_starts_t[k]) * self.directions[k]


def arclength_parametrize(p: Polyline) -> ArcLengthParam:
    lengths = p.edge_lengths
    cum = np.cumsum(lengths)
    # the cumulative sum drifts from fsum by a few ulps on long polylines
    cum[-1] = math.fsum(lengths)
    if np.any(np.diff(cum) <= 0):
        raise GeometryError("cumulative lengths must increase strictly")
    return ArcLengthParam(
        origin=complex(p.points[0]),
        starts=p.starts.copy(),
        cumulative_lengths=cum,
        directions=p.edges / lengths,
    )


@dataclass(frozen=True, eq=False)
class TurningData:
    """Tangent angle of a closed polygon as a step function of arclength.

    ``alpha[k]`` is the tangent angle on edge ``k`` relative to the first edge
    (so ``alpha[0] == 0``); ``initial_angle`` is the absolute direction of the
    first edge.  ``jump_t[j]`` / ``jumps[j]`` list the exterior turning
    ``pi - theta`` at each vertex; the closing vertex ``points[0]`` is reported
    at ``t = L``.
    """

    initial_angle: float
    alpha: np.ndarray
    jump_t: np.ndarray
    jumps: np.ndarray
    edge_ends: np.ndarray

    @property
    def interior_angles(self) -> np.ndarray:
        return np.pi - self.jumps

    @property
    def total_turning(self) -> float:
        return float(math.fsum(self.jumps))

    @property
    def absolute_alpha(self) -> np.ndarray:
        return self.initial_angle + self.alpha

    def __call__(self, t, absolute=False):
        k = np.clip(np.searchsorted(self.edge_ends, np.asarray(t, float), side="right"),
                    0, self.alpha.size - 1)
        return self.alpha[k] + (self.initial_angle if absolute else 0.0)


def _vertex_turns(p: Polyline) -> np.ndarray:
    """Signed exterior angle at each vertex of a closed polyline, vertex 0 first."""
    d = p.edges
    return np.angle(d / np.roll(d, 1))


def turning_angles(p: Polyline) -> TurningData:
    if not p.closed:
        raise GeometryError("turning angles need a closed polyline")
    turns = _vertex_turns(p)
    total = math.fsum(turns)
    if total < 0:
        raise OrientationError("polyline runs clockwise (negative total turning)")
    if p.signed_area < -INTERSECTION_RTOL * p.length**2:
        raise OrientationError("polyline runs clockwise (negative signed area)")
    cum = np.cumsum(p.edge_lengths)
    cum[-1] = p.length
    # vertex k (k >= 1) sits at the end of edge k-1; vertex 0 closes at t = L
    jumps = np.concatenate([turns[1:], turns[:1]])
    alpha = np.concatenate([[0.0], np.cumsum(turns[1:])])
    return TurningData(
        initial_angle=float(np.angle(p.edges[0])),
        alpha=alpha,
        jump_t=cum.copy(),
        jumps=jumps,
        edge_ends=cum,
    )


def signed_area(p: Polyline) -> float:
    pts = p.points
    if not p.closed:
        return 0.0
    # shift to the centroid of vertices to limit cancellation
    z = pts - pts.mean()
    return 0.5 * float(np.sum(_cross(z, np.roll(z, -1))))


def ensure_ccw(p: Polyline) -> Polyline:
    """Return ``p`` traversed counterclockwise (the first point is kept)."""
    if p.closed and p.signed_area < 0:
        return p.reversed()
    return p


# ---------------------------------------------------------------------------
# distances


def point_segment_distance(q, a, b):
    """Distance from ``q`` to segments ``[a, b]`` (broadcasting) and the foot parameter."""
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(denom > 0, ((q - a) * np.conj(ab)).real / denom, 0.0)
    u = np.clip(u, 0.0, 1.0)
    return np.abs(q - (a + u * ab)), u


def segment_distance(a0, a1, b0, b1):
    """Minimum distance between segments ``[a0, a1]`` and ``[b0, b1]`` (broadcasting)."""
    da, db = a1 - a0, b1 - b0
    d1 = _cross(da, b0 - a0)
    d2 = _cross(da, b1 - a0)
    d3 = _cross(db, a0 - b0)
    d4 = _cross(db, a1 - b0)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce([
        point_segment_distance(a0, b0, b1)[0],
        point_segment_distance(a1, b0, b1)[0],
        point_segment_distance(b0, a0, a1)[0],
        point_segment_distance(b1, a0, a1)[0],
    ])
    return np.where(proper, 0.0, dist)


def _segment_meeting_point(a0, a1, b0, b1) -> complex:
    da, db = a1 - a0, b1 - b0
    den = _cross(da, db)
    if den != 0:
        u = _cross(b0 - a0, db) / den
        if 0.0 <= u <= 1.0:
            cand = a0 + u * da
            if point_segment_distance(cand, b0, b1)[0] <= 1e-9 * (abs(da) + abs(db)):
                return complex(cand)
    # touching or overlapping: midpoint of the closest pair of endpoints/feet
    options = []
    for q, s0, s1 in ((a0, b0, b1), (a1, b0, b1), (b0, a0, a1), (b1, a0, a1)):
        d, u = point_segment_distance(q, s0, s1)
        options.append((float(d), complex(0.5 * (q + s0 + u * (s1 - s0)))))
    return min(options, key=lambda o: o[0])[1]


class SegmentIndex:
    """Nearest-segment queries against a polyline.

    Long edges are cut into pieces no longer than ``max_piece`` and the piece
    midpoints go into a k-d tree.  Queries return exact distances whenever the
    k nearest pieces certify them and fall back to brute force otherwise.
    """

    def __init__(self, p: Polyline, max_piece=None, k=16):
        self.polyline = p
        starts, ends = p.starts, p.ends
        lengths = p.edge_lengths
        if max_piece is None:
            max_piece = max(p.diameter / 256.0, float(np.median(lengths)))
        n_pieces = np.maximum(1, np.ceil(lengths / max_piece).astype(int))
        owner = np.repeat(np.arange(starts.size), n_pieces)
        first = np.concatenate([[0], np.cumsum(n_pieces)[:-1]])
        j = np.arange(owner.size) - first[owner]
        frac0 = j / n_pieces[owner]
        frac1 = (j + 1) / n_pieces[owner]
        d = ends - starts
        self._owner = owner
        self._frac0 = frac0
        self._frac1 = frac1
        self._a = starts[owner] + frac0 * d[owner]
        self._b = starts[owner] + frac1 * d[owner]
        mid = 0.5 * (self._a + self._b)
        self._half = float(np.max(np.abs(self._b - self._a))) / 2.0
        self._k = min(k, owner.size)
        self._tree = cKDTree(np.column_stack([mid.real, mid.imag])) if owner.size > BRUTE_FORCE_THRESHOLD else None

    def _brute(self, q):
        best_d = np.full(q.shape, np.inf)
        best_i = np.zeros(q.shape, dtype=int)
        best_u = np.zeros(q.shape)
        chunk = max(1, 2_000_000 // self._a.size)
        for s in range(0, q.size, chunk):
            qq = q[s:s + chunk, None]
            d, u = point_segment_distance(qq, self._a[None, :], self._b[None, :])
            i = np.argmin(d, axis=1)
            rows = np.arange(i.size)
            best_d[s:s + chunk] = d[rows, i]
            best_i[s:s + chunk] = i
            best_u[s:s + chunk] = u[rows, i]
        return best_d, best_i, best_u

    def query(self, q, exact=True):
        """Distance, edge index, edge parameter and foot point for each query.

        With ``exact=False`` the returned distance may be a certified lower
        bound instead of the exact value (cheap, enough for random walks);
        ``certified`` marks rows whose distance is exact.
        """
        q = np.atleast_1d(np.asarray(q, dtype=complex))
        if self._tree is None:
            d, i, u = self._brute(q)
            certified = np.ones(q.shape, dtype=bool)
        else:
            dm, idx = self._tree.query(np.column_stack([q.real, q.imag]), k=self._k)
            dm = dm.reshape(q.size, -1)
            idx = idx.reshape(q.size, -1)
            dd, uu = point_segment_distance(q[:, None], self._a[idx], self._b[idx])
            j = np.argmin(dd, axis=1)
            rows = np.arange(q.size)
            d = dd[rows, j]
            i = idx[rows, j]
            u = uu[rows, j]
            bound = dm[:, -1] - self._half
            certified = d <= bound
            if exact and not np.all(certified):
                miss = ~certified
                d2, i2, u2 = self._brute(q[miss])
                d[miss], i[miss], u[miss] = d2, i2, u2
                certified[:] = True
            elif not exact:
                d = np.where(certified, d, np.maximum(bound, 0.0))
        owner = self._owner[i]
        edge_u = self._frac0[i] + u * (self._frac1[i] - self._frac0[i])
        p = self.polyline
        foot = p.starts[owner] + edge_u * p.edges[owner]
        return d, owner, edge_u, foot, certified


def distance_to_polyline(p: Polyline, q) -> np.ndarray:
    return SegmentIndex(p).query(q)[0]


# ---------------------------------------------------------------------------
# winding and containment


def winding_numbers(p: Polyline, qs, check_boundary=True) -> np.ndarray:
    """Winding number of a closed polyline around each query point."""
    if not p.closed:
        raise GeometryError("winding number needs a closed polyline")
    qs = np.atleast_1d(np.asarray(qs, dtype=complex))
    if check_boundary:
        d = distance_to_polyline(p, qs)
        bad = d <= INTERSECTION_RTOL * p.length
        if np.any(bad):
            raise BoundaryPointError(f"query point {qs[bad][0]} lies on the polyline")
    pts = p.points
    nxt = np.roll(pts, -1)
    out = np.empty(qs.size)
    chunk = max(1, 4_000_000 // pts.size)
    for s in range(0, qs.size, chunk):
        q = qs[s:s + chunk, None]
        out[s:s + chunk] = np.sum(np.angle((nxt[None, :] - q) / (pts[None, :] - q)), axis=1)
    return np.rint(out / (2 * np.pi)).astype(int)


def winding_number(p: Polyline, q: Point2) -> int:
    return int(winding_numbers(p, [q])[0])


def contains_points(p: Polyline, qs, tol=None) -> np.ndarray:
    """Even-odd containment; points within ``tol`` of the boundary count as inside."""
    qs = np.atleast_1d(np.asarray(qs, dtype=complex))
    a, b = p.starts, p.ends
    inside = np.zeros(qs.size, dtype=bool)
    chunk = max(1, 4_000_000 // a.size)
    for s in range(0, qs.size, chunk):
        q = qs[s:s + chunk, None]
        cond = (a.imag[None, :] > q.imag) != (b.imag[None, :] > q.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = a.real + (q.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
        hits = cond & (q.real < xcross)
        inside[s:s + chunk] = np.sum(hits, axis=1) % 2 == 1
    if tol is None:
        tol = INTERSECTION_RTOL * p.length
    if tol > 0:
        inside |= distance_to_polyline(p, qs) <= tol
    return inside


# ---------------------------------------------------------------------------
# simplicity


@dataclass(frozen=True)
class SimplicityVerdict:
    """Outcome of :func:`is_simple`; truthy when the polyline is simple."""

    simple: bool
    pair: tuple | None = None
    point: complex | None = None

    def __bool__(self):
        return self.simple


def _segment_arrays(p: Polyline):
    return p.starts, p.ends


def _adjacent_overlaps(p: Polyline, tol: float):
    """Adjacent edges may only share their common endpoint."""
    a, b = _segment_arrays(p)
    m = a.size
    if m < 2:
        return []
    i = np.arange(m - 1)
    j = i + 1
    if p.closed and m > 2:
        i = np.append(i, m - 1)
        j = np.append(j, 0)
    # edges (i: a_i -> b_i) and (j: a_j -> b_j) meet at b_i == a_j
    bad = (point_segment_distance(b[j], a[i], b[i])[0] < tol) | \
          (point_segment_distance(a[i], a[j], b[j])[0] < tol)
    if p.closed and m == 2:
        bad[:] = True
    return [(int(min(x, y)), int(max(x, y))) for x, y in zip(i[bad], j[bad])]


def _nonadjacent_mask(i, j, m, closed):
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    adjacent = (hi - lo == 1) | (closed & (lo == 0) & (hi == m - 1))
    return (lo != hi) & ~adjacent


def _candidate_pairs_sweep(a, b, tol):
    """Sort-and-sweep along x: pairs whose x-extents and y-extents overlap."""
    xmin = np.minimum(a.real, b.real) - tol
    xmax = np.maximum(a.real, b.real) + tol
    ymin = np.minimum(a.imag, b.imag) - tol
    ymax = np.maximum(a.imag, b.imag) + tol
    order = np.argsort(xmin, kind="stable")
    xs = xmin[order]
    hi = np.searchsorted(xs, xmax[order], side="right")
    pos = np.arange(order.size)
    counts = np.maximum(hi - pos - 1, 0)
    block = 4_000_000
    start = 0
    while start < order.size:
        stop = start
        tot = 0
        while stop < order.size and (tot + counts[stop] <= block or stop == start):
            tot += counts[stop]
            stop += 1
        c = counts[start:stop]
        if tot:
            rep = np.repeat(np.arange(start, stop), c)
            offs = np.arange(tot) - np.repeat(np.cumsum(c) - c, c)
            si = order[rep]
            sj = order[rep + 1 + offs]
            keep = (ymin[si] <= ymax[sj]) & (ymin[sj] <= ymax[si])
            yield si[keep], sj[keep]
        start = stop


def _all_pairs(m):
    i, j = np.triu_indices(m, k=1)
    return i, j


def crossing_pairs(p: Polyline, tol=None, method="auto"):
    """All pairs of edges (i < j) that violate simplicity, sorted lexicographically."""
    a, b = _segment_arrays(p)
    m = a.size
    if tol is None:
        tol = INTERSECTION_RTOL * p.length
    found = set(_adjacent_overlaps(p, tol))
    if method == "auto":
        method = "brute" if m <= BRUTE_FORCE_THRESHOLD else "sweep"
    gen = [_all_pairs(m)] if method == "brute" else _candidate_pairs_sweep(a, b, tol)
    for i, j in gen:
        keep = _nonadjacent_mask(i, j, m, p.closed)
        i, j = i[keep], j[keep]
        if i.size == 0:
            continue
        d = segment_distance(a[i], b[i], a[j], b[j])
        hit = d < tol
        for x, y in zip(i[hit], j[hit]):
            found.add((int(min(x, y)), int(max(x, y))))
    return sorted(found)


def is_simple(p: Polyline, tol=None, method="auto") -> SimplicityVerdict:
    """Check that no two non-adjacent edges meet and adjacent edges only share an endpoint.

    Returns the lexicographically first offending edge pair and a point where
    the two edges meet.
    """
    pairs = crossing_pairs(p, tol=tol, method=method)
    if not pairs:
        return SimplicityVerdict(True)
    i, j = pairs[0]
    a, b = _segment_arrays(p)
    return SimplicityVerdict(False, (i, j), _segment_meeting_point(a[i], b[i], a[j], b[j]))


# ---------------------------------------------------------------------------
# convex hull


def convex_hull_points(points) -> np.ndarray:
    """Counterclockwise hull vertices (monotone chain), collinear points dropped."""
    pts = np.unique(as_points(points))
    if pts.size == 0:
        raise GeometryError("no points")
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    if pts.size < 3:
        return pts

    def chain(seq):
        out = []
        for z in seq:
            while len(out) >= 2 and _cross(out[-1] - out[-2], z - out[-2]) <= 0:
                out.pop()
            out.append(z)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def convex_hull(points) -> Polyline:
    """Closed counterclockwise hull.

    Collinear input yields the two extreme points as a degenerate closed
    polyline (``is_degenerate`` is True); coincident input is rejected.
    """
    hull = convex_hull_points(points)
    if hull.size < 2:
        raise GeometryError("all points coincide: hull is a single point")
    return Polyline(hull, closed=True)


# ---------------------------------------------------------------------------
# comparison helpers


def densify(p: Polyline, spacing: float) -> np.ndarray:
    """Points along ``p`` no farther apart than ``spacing`` (vertices included)."""
    a, d = p.starts, p.edges
    n = np.maximum(1, np.ceil(np.abs(d) / spacing).astype(int))
    owner = np.repeat(np.arange(a.size), n)
    first = np.concatenate([[0], np.cumsum(n)[:-1]])
    frac = (np.arange(owner.size) - first[owner]) / n[owner]
    out = a[owner] + frac * d[owner]
    if not p.closed:
        out = np.append(out, p.points[-1])
    return out


def hausdorff_distance(x, y) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    tx = cKDTree(np.column_stack([x.real, x.imag]))
    ty = cKDTree(np.column_stack([y.real, y.imag]))
    d1 = ty.query(np.column_stack([x.real, x.imag]))[0].max()
    d2 = tx.query(np.column_stack([y.real, y.imag]))[0].max()
    return float(max(d1, d2))


def polyline_hausdorff(a: Polyline, b: Polyline, spacing: float | None = None) -> float:
    """Hausdorff distance between two polylines as curves, not vertex sets.

    Each curve is densified to ``spacing`` and measured against the other's
    segments, so the error is at most ``spacing / 2``.
    """
    if spacing is None:
        spacing = 1e-4 * max(a.diameter, b.diameter)
    da = densify(a, spacing)
    db = densify(b, spacing)
    return float(max(distance_to_polyline(b, da).max(), distance_to_polyline(a, db).max()))


def reflect_across_line(z, origin: complex, direction: complex):
    """Mirror image of ``z`` across the line through ``origin`` with the given direction."""
    u = direction / abs(direction)
    return origin + u * u * np.conj(np.asarray(z) - origin)


def regular_polygon(n: int, radius=1.0, center=0j, phase=0.0) -> Polyline:
    k = np.arange(n)
    return Polyline(center + radius * np.exp(1j * (phase + 2 * np.pi * k / n)))


@dataclass(frozen=True, eq=False)
class SmoothCurve:
    """A closed curve given analytically by arclength: position and tangent angle."""

    position: Callable
    angle: Callable
    length: float


def circle_curve(radius=1.0, center=0j) -> SmoothCurve:
    return SmoothCurve(
        position=lambda t: center + radius * np.exp(1j * np.asarray(t) / radius),
        angle=lambda t: np.asarray(t) / radius + np.pi / 2,
        length=2 * np.pi * radius,
    )


def polyline_from_iter(points: Iterable[Sequence[float]], closed=True) -> Polyline:
    return Polyline(as_points(list(points)), closed)
