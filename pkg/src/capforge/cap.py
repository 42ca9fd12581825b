"""
Cap developments from a shape and a boundary measure.

The developed cap boundary is ``s_hat(t) = s(0) + int_0^t exp(i(alpha - kappa))``
where ``alpha`` is the tangent angle of the counterclockwise shape boundary and
``kappa`` the cumulative curvature of the measure.  For polygons with atoms and
piecewise-constant densities the integrand is ``exp(i(a + b x))`` on every
piece, so each piece is a segment or a circular arc and is integrated in
closed form.  No claim is made that a metric exists: the result carries the
closure defect, a planarity verdict and the winding sign, and callers decide.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import BoundaryPointError, ConvergenceError, GeometryError, MeasureError
from .geometry import (
    INTERSECTION_RTOL,
    Polyline,
    SimplicityVerdict,
    arclength_parametrize,
    contains_points,
    convex_hull_points,
    is_simple,
    point_segment_distance,
    reflect_across_line,
    signed_area,
    turning_angles,
    winding_numbers,
)
from .measure import BoundaryMeasure, make_curvature, triangle_measure

log = logging.getLogger(__name__)

CLOSURE_RTOL = 1e-6
#: arcs of the developed boundary are sampled at most this many radians apart
ARC_STEP = np.pi / 90


def _arc_factor(u):
    """``(1 - exp(-iu)) / (iu)``, the average of ``exp(-ix)`` over ``[0, u]``; 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5j * u) * np.sinc(u / (2 * np.pi))


@dataclass(frozen=True, eq=False)
class CapCurve:
    """Piecewise closed-form evaluator of the developed cap boundary.

    On piece ``k`` (``breakpoints[k] <= t <= breakpoints[k+1]``) the tangent is
    ``exp(i(phases[k] - rates[k] * (t - breakpoints[k])))``.
    """

    breakpoints: np.ndarray
    knots: np.ndarray
    phases: np.ndarray
    rates: np.ndarray

    @property
    def length(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, self.phases.size - 1)
        h = t - self.breakpoints[k]
        return self.knots[k] + np.exp(1j * self.phases[k]) * h * _arc_factor(self.rates[k] * h)

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, self.phases.size - 1)
        return np.exp(1j * (self.phases[k] - self.rates[k] * (t - self.breakpoints[k])))

    def sample(self, arc_step=ARC_STEP):
        """Knots plus interior points on arcs; the final point is ``s_hat(L)``."""
        h = np.diff(self.breakpoints)
        n = np.maximum(1, np.ceil(np.abs(self.rates) * h / arc_step).astype(int))
        owner = np.repeat(np.arange(h.size), n)
        first = np.concatenate([[0], np.cumsum(n)[:-1]])
        frac = (np.arange(owner.size) - first[owner]) / n[owner]
        t = self.breakpoints[owner] + frac * h[owner]
        t = np.append(t, self.breakpoints[-1])
        return t, self(t)


@dataclass(frozen=True, eq=False)
class GluingTable:
    """Rows ``(t, s(t), s_hat(t))`` identifying shape and cap boundaries by arclength."""

    t: np.ndarray
    source: np.ndarray
    cap: np.ndarray

    def __len__(self):
        return self.t.size

    def rows(self):
        return list(zip(self.t.tolist(), self.source.tolist(), self.cap.tolist()))

    def to_dict(self) -> dict:
        return {
            "columns": ["t", "s_x", "s_y", "cap_x", "cap_y"],
            "rows": [[float(t), s.real, s.imag, c.real, c.imag]
                     for t, s, c in zip(self.t, self.source, self.cap)],
        }


@dataclass(frozen=True, eq=False)
class CapDevelopment:
    """Candidate cap development and its diagnostics.

    ``boundary`` follows ``s_hat`` in increasing ``t`` (clockwise for a genuine
    cap).  It is closed when the closure defect is within tolerance, open
    otherwise.
    """

    boundary: Polyline
    closure_defect: float
    planar: SimplicityVerdict
    winding_ok: bool
    gluing: GluingTable
    curve: CapCurve
    closure_tol: float
    obstructions: tuple = ()

    @property
    def closes(self) -> bool:
        return self.closure_defect <= self.closure_tol

    @property
    def length(self) -> float:
        return self.curve.length

    @property
    def knots(self) -> np.ndarray:
        return self.curve.knots

    def to_dict(self) -> dict:
        pts = self.boundary.points
        return {
            "boundary": [[z.real, z.imag] for z in pts],
            "boundary_closed": self.boundary.closed,
            "closure_defect": self.closure_defect,
            "closure_tol": self.closure_tol,
            "closes": self.closes,
            "planar": bool(self.planar),
            "first_crossing": None if self.planar else {
                "edges": list(self.planar.pair),
                "point": [self.planar.point.real, self.planar.point.imag],
            },
            "winding_ok": self.winding_ok,
            "obstructions": [{"t": t, "theta": th, "theta_hat": tt} for t, th, tt in self.obstructions],
            "gluing": self.gluing.to_dict(),
        }


def cap_angles(thetas, masses):
    """Cap interior angles ``2*pi - theta - 4*pi*mu`` and flags for angles outside ``(0, 2*pi)``."""
    thetas = np.asarray(thetas, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if thetas.shape != masses.shape:
        raise ValueError("thetas and masses must have the same length")
    hat = 2 * np.pi - thetas - 4 * np.pi * masses
    return hat, (hat <= 0) | (hat >= 2 * np.pi)


def _unique_breaks(values, L):
    vals = np.sort(np.clip(values, 0.0, L))
    tol = 1e-13 * L
    keep = [0.0]
    for v in vals:
        if v - keep[-1] > tol:
            keep.append(float(v))
    if L - keep[-1] <= tol:
        keep[-1] = L
    else:
        keep.append(L)
    return np.array(keep)


def _winding_sign_ok(boundary: Polyline, simple: bool) -> bool:
    """A clockwise cap boundary winds non-positively around every point."""
    if not boundary.closed:
        return False
    if simple:
        return signed_area(boundary) <= 0
    a, d = boundary.starts, boundary.edges
    mid = a + 0.5 * d
    normal = 1j * d / np.abs(d)
    eps = 1e-6 * np.abs(d)
    probes = np.concatenate([mid + eps * normal, mid - eps * normal])
    w = winding_numbers(boundary, probes, check_boundary=False)
    return bool(np.all(w <= 0))


def cap_boundary(shape: Polyline, m: BoundaryMeasure, closure_tol: float | None = None,
                 check_simple: bool = True, arc_step: float = ARC_STEP,
                 gluing_rows: int = 0) -> CapDevelopment:
    """Develop the cap of ``(shape, m)``; see the module docstring."""
    if not shape.closed:
        raise GeometryError("cap_boundary needs a closed shape")
    if check_simple and not shape.is_degenerate:
        verdict = is_simple(shape)
        if not verdict:
            raise GeometryError(f"shape is not simple: edges {verdict.pair} meet at {verdict.point}")
    td = turning_angles(shape)
    L = shape.length
    if m.length is not None and abs(m.length - L) > 1e-9 * L:
        raise MeasureError(f"measure length {m.length!r} does not match shape length {L!r}")
    kappa = make_curvature(m, L)
    param = arclength_parametrize(shape)

    d = m.densities
    breaks = _unique_breaks(np.concatenate([param.cumulative_lengths, m.atom_positions, d[:, 0], d[:, 1]]), L)
    h = np.diff(breaks)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    edge = param.edge_index(mid)
    alpha = td.initial_angle + td.alpha[edge]
    rates = kappa.slope(mid)
    # kappa just after each breakpoint, read at the piece midpoint so atoms
    # merged into a breakpoint by _unique_breaks are counted on the right side
    phases = alpha - (kappa(mid) - rates * 0.5 * h)
    steps = np.exp(1j * phases) * h * _arc_factor(rates * h)
    knots = shape.points[0] + np.concatenate([[0.0], np.cumsum(steps)])
    curve = CapCurve(breaks, knots, phases, rates)

    if closure_tol is None:
        closure_tol = CLOSURE_RTOL * L
    defect = float(abs(knots[-1] - knots[0]))
    _, pts = curve.sample(arc_step)
    closed = defect <= closure_tol
    boundary = Polyline(pts[:-1], True) if closed else Polyline(pts, False)
    planar = is_simple(boundary)
    winding_ok = _winding_sign_ok(boundary, bool(planar)) if closed else False

    obstructions = _angle_obstructions(shape, td, kappa, breaks[:-1])
    cap = CapDevelopment(boundary, defect, planar, winding_ok,
                         GluingTable(np.zeros(0), np.zeros(0, complex), np.zeros(0, complex)),
                         curve, float(closure_tol), obstructions)
    gl = gluing_table(shape, cap, gluing_rows)
    return CapDevelopment(boundary, defect, planar, winding_ok, gl, curve, float(closure_tol), obstructions)


def _angle_obstructions(shape, td, kappa, ts):
    L = shape.length
    vertex_t = np.concatenate([[0.0], td.jump_t[:-1]])
    vertex_turn = np.concatenate([td.jumps[-1:], td.jumps[:-1]])
    tol = 1e-12 * L
    out = []
    for t in ts:
        j = np.searchsorted(vertex_t, t - tol)
        turn = vertex_turn[j] if j < vertex_t.size and abs(vertex_t[j] - t) <= tol else 0.0
        theta = np.pi - turn
        conc = kappa.atom_mass_at(t, tol)
        hat = 2 * np.pi - theta - conc
        if not 0 < hat < 2 * np.pi:
            out.append((float(t), float(theta), float(hat)))
    return tuple(out)


def gluing_table(shape: Polyline, cap: CapDevelopment, n_rows: int = 0) -> GluingTable:
    """Rows at every vertex of shape and cap plus ``n_rows`` uniform arclength samples."""
    L = shape.length
    param = arclength_parametrize(shape)
    ts = [cap.curve.breakpoints[:-1], param.edge_starts_t]
    if n_rows:
        ts.append(np.linspace(0.0, L, n_rows, endpoint=False))
    t = _unique_breaks(np.concatenate(ts), L)[:-1]
    return GluingTable(t, param(t), cap.curve(t))


def integrate_cap_boundary(alpha, kappa, L, t_out, breaks=(), s0=0j, epsabs=1e-12):
    """Quadrature route for smooth data: ``s0 + int_0^t exp(i(alpha - kappa))``.

    ``alpha`` and ``kappa`` are callables of arclength.  Used to cross-check the
    closed-form polygon path and conformal-angle formulas.
    """
    t_out = np.asarray(t_out, dtype=float)
    nodes = np.unique(np.concatenate([[0.0], np.asarray(breaks, float), t_out]))

    def part(fn, a, b):
        val, _ = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=1e-12, limit=200)
        return val

    acc = [0j]
    for a, b in zip(nodes[:-1], nodes[1:]):
        re = part(lambda x: math.cos(alpha(x) - kappa(x)), a, b)
        im = part(lambda x: math.sin(alpha(x) - kappa(x)), a, b)
        acc.append(acc[-1] + complex(re, im))
    acc = np.array(acc)
    return s0 + acc[np.searchsorted(nodes, t_out)]


# ---------------------------------------------------------------------------
# the naive cap


@dataclass(frozen=True, eq=False)
class NaiveCap:
    """Convex hull with every pocket reflected outward across its chord.

    ``union_boundary`` is the boundary of hull plus flaps, in the shape's own
    frame, with the same vertex count and edge lengths as the shape.
    """

    hull: Polyline
    flaps: tuple
    chords: tuple
    union_boundary: Polyline
    measure: BoundaryMeasure
    planar: SimplicityVerdict


def naive_cap(shape: Polyline) -> NaiveCap:
    if not shape.closed:
        raise GeometryError("naive_cap needs a closed shape")
    hull_pts = convex_hull_points(shape.points)
    if hull_pts.size < 3:
        raise GeometryError("degenerate hull: shape is contained in a line")
    td = turning_angles(shape)
    pts = shape.points
    n = pts.size
    lookup = {complex(z): i for i, z in enumerate(pts)}
    hull_idx = np.sort([lookup[complex(z)] for z in hull_pts])
    hull = Polyline(pts[hull_idx], True)
    hull_turn = np.angle(hull.edges / np.roll(hull.edges, 1))

    union = pts.copy()
    flaps, chords = [], []
    scale = shape.length
    for k, i in enumerate(hull_idx):
        j = hull_idx[(k + 1) % hull_idx.size]
        chain = [(i + s) % n for s in range(1, (j - i) % n or n)]
        if not chain:
            continue
        a, b = pts[i], pts[j]
        off = point_segment_distance(pts[chain], a, b)[0]
        union[chain] = reflect_across_line(pts[chain], a, b - a)
        if np.any(off > INTERSECTION_RTOL * scale):
            flaps.append(Polyline(np.concatenate([[a], union[chain], [b]]), False))
            chords.append((complex(a), complex(b)))

    vertex_t = np.concatenate([[0.0], td.jump_t[:-1]])
    masses = hull_turn / math.fsum(hull_turn)
    measure = BoundaryMeasure(np.column_stack([vertex_t[hull_idx], masses]), length=shape.length)
    union_boundary = Polyline(union, True)
    return NaiveCap(hull, tuple(flaps), tuple(chords), union_boundary, measure, is_simple(union_boundary))


def bend_interval(length: float, angle: float):
    """Bend a segment at its midpoint and return the hull triangle and its cap measure.

    The triangle is ordered ``(A, M, B)`` with ``M`` the bend; the masses follow
    the same order.
    """
    if not 0 < angle < np.pi:
        raise ValueError("bend angle must lie in (0, pi)")
    half = 0.5 * length
    A = half * np.exp(1j * (np.pi / 2 + angle / 2))
    B = half * np.exp(1j * (np.pi / 2 - angle / 2))
    tri = Polyline([A, 0j, B], True)
    return tri, triangle_measure(tri)


# ---------------------------------------------------------------------------
# interior development for a general measure


def _log_branches(nodes, atoms, start_logs):
    """Continuous logs of ``nodes - a_k`` along an ordered path of nodes."""
    diff = nodes[:, None] - atoms[None, :]
    args = np.angle(diff)
    args = np.unwrap(np.vstack([np.imag(start_logs)[None, :], args]), axis=0)[1:]
    return np.log(np.abs(diff)) + 1j * args


def _development_integral(path, atoms, masses, order=16, max_depth=30):
    gx, gw = leggauss(order)
    # adding +0j clears a negative zero so that arg(-1) is +pi
    start_logs = np.log(-atoms.astype(complex) + 0j)
    segs = []
    for p0, p1 in zip(path[:-1], path[1:]):
        segs.extend(_subdivide(p0, p1, atoms, masses, start_logs, max_depth))
    # one ordered node list per path, so branch tracking is continuous end to end
    all_nodes = [path[0]]
    weights = []
    for a, b in segs:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        all_nodes.extend(mid + half * gx)
        all_nodes.append(b)
        weights.append(half * gw)
    nodes = np.array(all_nodes)
    logs = _log_branches(nodes, atoms, start_logs)
    integrand = np.exp(-2.0 * logs @ masses)
    total = 0j
    pos = 1
    for w in weights:
        total += np.sum(w * integrand[pos:pos + order])
        pos += order + 1
    return total


def _subdivide(p0, p1, atoms, masses, start_logs, max_depth):
    """Split ``[p0, p1]`` until the integrand phase turns less than pi/8 per piece
    and every piece is no longer than its distance to the nearest atom."""
    out = []
    stack = [(p0, p1, 0)]
    while stack:
        a, b, depth = stack.pop()
        dist = float(np.min(point_segment_distance(atoms, a, b)[0]))
        ends = np.array([a, b])
        diff = ends[:, None] - atoms[None, :]
        turn = np.angle(diff[1] / diff[0])
        rot = abs(2.0 * float(turn @ masses))
        if (rot < np.pi / 8 and abs(b - a) <= dist) or depth >= max_depth:
            if depth >= max_depth:
                raise ConvergenceError("path subdivision did not resolve the integrand near an atom")
            out.append((a, b))
        else:
            m = 0.5 * (a + b)
            stack.append((m, b, depth + 1))
            stack.append((a, m, depth + 1))
    out.sort(key=lambda s: abs(s[0] - p0))
    return out


def interior_development(J: Polyline, nu: BoundaryMeasure, z, tol: float | None = None,
                         order: int = 16, check_inside: bool = True):
    """Evaluate ``f(z) = int_0^z prod_k (zeta - a_k)^(-2 m_k) d zeta``.

    ``a_k`` are the atoms of ``nu`` placed on ``J``.  The branch of each factor
    starts at the principal value at ``zeta = 0`` and is continued along a
    straight path; if that path grazes an atom a two-segment detour inside
    ``J`` is tried.
    """
    if nu.densities.size:
        raise MeasureError("interior_development takes atomic measures only")
    param = arclength_parametrize(J)
    atoms = np.asarray(param(nu.atom_positions % J.length), dtype=complex)
    masses = nu.atom_masses / nu.atom_masses.sum()
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if tol is None:
        tol = 1e-9 * J.length
    if check_inside:
        inside = contains_points(J, np.append(zs, 0j), tol=0.0)
        if not inside[-1]:
            raise GeometryError("0 must lie inside J")
        if not np.all(inside[:-1]):
            raise GeometryError("z must lie inside J")
    out = np.empty(zs.size, dtype=complex)
    for n, zz in enumerate(zs):
        if zz == 0:
            out[n] = 0j
            continue
        path = _choose_path(J, atoms, zz, tol)
        out[n] = _development_integral(path, atoms, masses, order=order)
    return complex(out[0]) if scalar else out


def _choose_path(J, atoms, z, tol):
    straight = np.array([0j, z])
    if np.min(point_segment_distance(atoms, 0j, z)[0]) > tol:
        return straight
    for frac in (0.25, 0.5, 1.0):
        for sign in (1, -1):
            w = 0.5 * z + sign * frac * 1j * z
            path = np.array([0j, w, z])
            if not contains_points(J, [w], tol=0.0)[0]:
                continue
            dmin = min(np.min(point_segment_distance(atoms, a, b)[0]) for a, b in zip(path[:-1], path[1:]))
            if dmin > tol:
                return path
    raise BoundaryPointError(f"no path from 0 to {z} avoids the atoms by more than {tol}")
