"""
Circumference deficits of small circles on the surface glued from a shape and its cap.

Around a glued boundary point the circle of radius ``r`` splits into an arc in
the shape and an arc in the cap; each is measured exactly in its own flat
chart.  The curvature density at ``s(t)`` is the limit of
``(2*pi*r - C(r)) / r**2`` and the curvature of an atom is the limit of
``(2*pi*r - C(r)) / r``.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .cap import CapDevelopment
from .errors import ChartError
from .geometry import Polyline, arclength_parametrize, contains_points, point_segment_distance
from .measure import BoundaryMeasure, make_curvature

#: radius ladder ``10**(-2 - 0.2 k)`` for ``k = 0 .. 5``
DEFAULT_RADII = 10.0 ** (-2.0 - 0.2 * np.arange(6))


@dataclass(frozen=True)
class LensQuery:
    """Circle of radius ``r`` centred on a circle of radius ``R``."""

    R: float
    r: float

    def __post_init__(self):
        if not (self.R > 0 and 0 < self.r < self.R):
            raise ValueError("need 0 < r < R")


def lens_arclength(q: LensQuery) -> float:
    """Length of the part of the small circle inside the big disk."""
    R, r = q.R, q.r
    return r * (math.pi - 2.0 * math.atan(r * r / math.sqrt(4 * R * R * r * r - r**4)))


def lens_quotient(q: LensQuery) -> float:
    """``(pi r - A) / r**2``, which tends to ``1/R``."""
    return (math.pi * q.r - lens_arclength(q)) / q.r**2


def _circle_crossings(region: Polyline, centre: complex, r: float):
    a, b = region.starts, region.ends
    near = (point_segment_distance(centre, a, b)[0] <= r) & \
        (np.maximum(np.abs(a - centre), np.abs(b - centre)) >= r)
    a, b = a[near], b[near]
    d = b - a
    w = a - centre
    A = np.abs(d) ** 2
    B = 2 * np.real(np.conj(d) * w)
    C = np.abs(w) ** 2 - r * r
    disc = B * B - 4 * A * C
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    roots = np.concatenate([(-B - sq) / (2 * A), (-B + sq) / (2 * A)])
    owner = np.concatenate([np.arange(a.size), np.arange(a.size)])
    valid = np.concatenate([ok, ok]) & (roots >= 0) & (roots <= 1)
    pts = a[owner[valid]] + roots[valid] * d[owner[valid]]
    ang = np.sort(np.mod(np.angle(pts - centre), 2 * np.pi))
    if ang.size > 1:
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        ang = ang[gaps > 1e-12]
    return ang


def arc_length_inside(region: Polyline, centre: complex, r: float, max_crossings: int | None = 2):
    """Length of the circle ``|z - centre| = r`` inside a closed polygon.

    Crossing angles come from exact circle-segment intersections; each arc
    between consecutive crossings is classified by its midpoint.  More than
    ``max_crossings`` crossings means the circle leaves the local chart.
    """
    ang = _circle_crossings(region, complex(centre), r)
    if max_crossings is not None and ang.size > max_crossings:
        raise ChartError(f"circle of radius {r:g} crosses the boundary {ang.size} times")
    if ang.size == 0:
        inside = contains_points(region, [centre + r], tol=0.0)[0]
        return 2 * math.pi * r if inside else 0.0
    nxt = np.append(ang[1:], ang[0] + 2 * np.pi)
    mids = centre + r * np.exp(1j * 0.5 * (ang + nxt))
    inside = contains_points(region, mids, tol=0.0)
    return float(r * np.sum((nxt - ang)[inside]))


def _partners(shape: Polyline, t: float):
    """Arclength positions glued to the same point as ``t`` (both sides of a slit)."""
    if not shape.is_degenerate:
        return [t]
    param = arclength_parametrize(shape)
    p = param(t)
    out = [t]
    starts = param.edge_starts_t
    for k in range(shape.n_edges):
        a, d = shape.starts[k], shape.edges[k]
        dist, u = point_segment_distance(p, a, a + d)
        tk = starts[k] + u * shape.edge_lengths[k]
        if dist <= 1e-12 * shape.length and abs(tk - t) > 1e-9 * shape.length \
                and all(abs(tk - s) > 1e-9 * shape.length for s in out):
            out.append(float(tk))
    return out


_SAMPLES = weakref.WeakKeyDictionary()


def _cap_chart(cap: CapDevelopment, t: float, r: float, per_radius: int = 64) -> Polyline:
    """Cap boundary polygon, resampled finely within ``4 r`` of ``t``.

    The stored boundary only has knots at measure breakpoints, which may be
    coarser than ``r``.
    """
    if cap not in _SAMPLES:
        _SAMPLES[cap] = cap.curve.sample()
    ts, pts = _SAMPLES[cap]
    ts, pts = ts[:-1], pts[:-1]
    L = cap.length
    w = 4.0 * r
    far = np.abs(np.mod(ts - t + 0.5 * L, L) - 0.5 * L) > w
    local = t + np.linspace(-w, w, 8 * per_radius + 1)
    t_all = np.concatenate([np.mod(ts[far] - t + 0.5 * L, L), np.mod(local - t + 0.5 * L, L)])
    z_all = np.concatenate([pts[far], cap.curve(np.mod(local, L))])
    order = np.argsort(t_all, kind="stable")
    return Polyline(z_all[order])


def surface_circle_circumference(shape: Polyline, measure: BoundaryMeasure, cap: CapDevelopment,
                                 t: float, r: float) -> float:
    """Circumference of the radius-``r`` circle around the glued point ``s(t)``."""
    if not cap.closes:
        raise ChartError("the cap does not close, so there is no glued surface")
    total = 0.0
    param = arclength_parametrize(shape)
    if not shape.is_degenerate:
        total += arc_length_inside(shape, complex(param(t)), r)
    for tt in _partners(shape, t):
        total += arc_length_inside(_cap_chart(cap, tt, r), complex(cap.curve(tt)), r)
    return total


def one_sided_quotient(region: Polyline, centre: complex, r: float) -> float:
    """``(pi r - C_r) / r**2`` for a single flat side."""
    return (math.pi * r - arc_length_inside(region, centre, r)) / r**2


@dataclass(frozen=True)
class CurvatureEstimate:
    value: float
    radii: np.ndarray = field(repr=False)
    quotients: np.ndarray = field(repr=False)
    monotone: bool = True

    @property
    def reliable(self) -> bool:
        return self.monotone


def curvature_limit_estimate(shape, measure, cap, t, radii=DEFAULT_RADII) -> CurvatureEstimate:
    """Extrapolate ``(2*pi*r - C(r)) / r**2`` to ``r = 0`` over a geometric ladder.

    For a boundary with continuous curvature the quotient is
    ``delta + b r**2 + ...``; a least-squares fit in ``r**2`` removes the
    leading correction.  A ladder that is not monotone is flagged as unreliable.
    """
    radii = np.asarray(radii, dtype=float)
    q = np.array([(2 * math.pi * r - surface_circle_circumference(shape, measure, cap, t, r)) / r**2
                  for r in radii])
    dq = np.diff(q)
    scale = max(np.max(np.abs(q)), 1e-12)
    monotone = bool(np.all(dq >= -1e-9 * scale) or np.all(dq <= 1e-9 * scale))
    if radii.size > 1:
        value = float(np.polyfit(radii**2, q, 1)[1])
    else:
        value = float(q[0])
    return CurvatureEstimate(value, radii, q, monotone)


def cone_deficit(shape, measure, cap, t, r) -> float:
    """``(2*pi*r - C(r)) / r``, the curvature concentrated at ``s(t)``."""
    return (2 * math.pi * r - surface_circle_circumference(shape, measure, cap, t, r)) / r


def reference_density(measure: BoundaryMeasure, L: float, t) -> np.ndarray:
    """``kappa'(t) = 4*pi * density`` of the measure at ``t``."""
    return make_curvature(measure, L).slope(t)


def curvature_report(shape, measure, cap, ts, radii=DEFAULT_RADII) -> list:
    """Rows ``{t, estimate, reference, relative_error, reliable}``."""
    rows = []
    ref = reference_density(measure, shape.length, np.asarray(ts, dtype=float))
    for t, d in zip(ts, ref):
        est = curvature_limit_estimate(shape, measure, cap, t, radii)
        for tt in _partners(shape, t)[1:]:
            d = d + reference_density(measure, shape.length, tt)
        rel = abs(est.value - d) / abs(d) if d else abs(est.value)
        rows.append({"t": float(t), "estimate": est.value, "reference": float(d),
                     "relative_error": float(rel), "reliable": est.reliable})
    return rows
