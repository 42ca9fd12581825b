"""
Shapes used by the tests, the acceptance suite and the CLI.

The two spiral fixtures cut a pair of thin interleaved Archimedean channels
into a convex polygon.  Channel ``A`` follows ``b psi exp(i psi)`` and
channel ``B`` is its point reflection through the spiral centre, so the two
interleave with gap ``pi b``.  Each channel ends half a turn apart just above
the edge it opens onto and reaches that edge by a straight vertical leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polyline, regular_polygon
from .measure import BoundaryMeasure


def unit_square() -> Polyline:
    return Polyline([0, 1, 1 + 1j, 1j])


def square(side: float = 2.0, centre: complex = 0j) -> Polyline:
    h = side / 2
    return Polyline(centre + h * np.array([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j]))


def equilateral_triangle(side: float = 1.0) -> Polyline:
    return Polyline(side * np.array([0, 1, np.exp(1j * np.pi / 3)]))


def random_triangle(rng: np.random.Generator, min_angle: float = 0.05) -> Polyline:
    """Counterclockwise triangle with every interior angle above ``min_angle``."""
    while True:
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        tri = Polyline(z)
        if tri.signed_area < 0:
            tri = tri.reversed()
        d = tri.edges
        ang = np.pi - np.abs(np.angle(d / np.roll(d, 1)))
        if np.all(ang > min_angle):
            return tri


def random_star_polygon(rng: np.random.Generator, n: int, jitter: float = 0.5) -> Polyline:
    """Simple counterclockwise polygon with vertices at sorted random angles.

    Angles are redrawn until every gap is below ``pi`` so the origin is inside.
    """
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        if np.max(np.diff(np.append(ang, ang[0] + 2 * np.pi))) < np.pi:
            break
    ang = ang + np.arange(n) * 1e-9
    rad = 1.0 + jitter * (rng.random(n) - 0.5)
    return Polyline(rad * np.exp(1j * ang))


def random_convex_polygon(rng: np.random.Generator, n: int) -> Polyline:
    """Convex hull of ``n`` Gaussian points (at least a triangle)."""
    from .geometry import convex_hull

    while True:
        z = rng.normal(size=max(n, 3)) + 1j * rng.normal(size=max(n, 3))
        hull = convex_hull(z)
        if hull.points.size >= 3 and abs(hull.signed_area) > 1e-3:
            return hull


def l_hexagon() -> Polyline:
    return Polyline([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j])


def notched_square(depth: float = 0.4, width: float = 0.3) -> Polyline:
    """Unit square with a rectangular notch cut into the middle of the bottom edge."""
    a = 0.5 - width / 2
    b = 0.5 + width / 2
    return Polyline([0, a, a + 1j * depth, b + 1j * depth, b, 1, 1 + 1j, 1j])


def circle_polygon(n: int, radius: float = 1.0, centre: complex = 0j) -> Polyline:
    return regular_polygon(n, radius, centre)


def ellipse_polygon(n: int, a: float = 1.5, b: float = 1.0) -> Polyline:
    t = 2 * np.pi * np.arange(n) / n
    return Polyline(a * np.cos(t) + 1j * b * np.sin(t))


def interval_slit(half: float = 2.0) -> Polyline:
    """The segment ``[-half, half]`` as a closed 2-gon, top side first."""
    return Polyline([half, -half])


def interval_harmonic_measure(bins_per_side: int, half: float = 2.0) -> BoundaryMeasure:
    """Harmonic measure of :func:`interval_slit` as piecewise-constant densities.

    The arcsine law ``dx / (pi sqrt(half**2 - x**2))`` is split evenly between
    the two sides; each bin carries its exact mass.
    """
    edges = np.linspace(0.0, 2 * half, bins_per_side + 1)
    cdf = 0.5 + np.arcsin(np.clip((half - edges) / half, -1, 1)) / np.pi
    mass = 0.5 * np.abs(np.diff(cdf))
    dens = mass / np.diff(edges)
    top = np.column_stack([edges[:-1], edges[1:], dens])
    # the bottom side runs from -half back to half, mirroring the top
    bottom = np.column_stack([2 * half + edges[:-1], 2 * half + edges[1:], dens[::-1]])
    return BoundaryMeasure(densities=np.vstack([top, bottom]), length=4 * half)


def ellipse_harmonic_measure(shape: Polyline) -> BoundaryMeasure:
    """Equal mass on every edge of an :func:`ellipse_polygon`.

    The exterior map ``w -> ((a + b) w + (a - b) / w) / 2`` sends ``exp(i t)`` to
    ``(a cos t, b sin t)``, so harmonic measure is uniform in the parameter ``t``
    that spaces the vertices.
    """
    n = shape.points.size
    lengths = shape.edge_lengths
    t = np.concatenate([[0.0], np.cumsum(lengths)])
    return BoundaryMeasure(densities=np.column_stack([t[:-1], t[1:], 1.0 / (n * lengths)]), length=shape.length)


# ---------------------------------------------------------------------------
# spiral channels


@dataclass(frozen=True)
class SpiralParams:
    centre: complex
    #: Archimedean pitch parameter; neighbouring turns of A and B are ``pi b`` apart
    b: float
    #: angle parameter at the inner tips
    psi_in: float
    #: full turns of channel A beyond ``psi_in``
    turns: int
    eps_a: float
    eps_b: float
    width: float
    spacing: float = 0.004


def _spiral_arc(p: SpiralParams, psi0, psi1, flip):
    n = max(8, int(math.ceil(p.b * 0.5 * (psi1**2 - psi0**2) / p.spacing)))
    # equal arclength steps: arclength grows like psi**2 for an Archimedean spiral
    psi = np.sqrt(np.linspace(psi0**2, psi1**2, n))
    z = p.b * psi * np.exp(1j * psi)
    return p.centre + (-z if flip else z)


def _centrelines(p: SpiralParams):
    """Spiral parts of A and B, each listed from the outer end to the tip."""
    k = math.ceil((p.psi_in + math.pi / 2) / (2 * math.pi))
    psi_a = 2 * math.pi * (k + p.turns) - math.pi / 2 + p.eps_a
    psi_b = psi_a + math.pi - p.eps_a - p.eps_b
    a = _spiral_arc(p, p.psi_in, psi_a, flip=False)[::-1]
    b = _spiral_arc(p, p.psi_in, psi_b, flip=True)[::-1]
    return a, b


def _offset(line, d):
    """Left offset by ``d`` with mitred joins."""
    seg = np.diff(line)
    u = seg / np.abs(seg)
    n_seg = 1j * u
    nrm = np.empty(line.size, dtype=complex)
    nrm[0], nrm[-1] = n_seg[0], n_seg[-1]
    bis = n_seg[:-1] + n_seg[1:]
    nrm[1:-1] = bis / np.abs(bis) ** 2 * 2
    return line + d * nrm


def _channel(opening: complex, spiral_part, width: float, edge_dir: complex, n_cap: int = 12):
    """Boundary of a channel from its opening on an edge to its tip and back.

    The returned chain starts on the edge at the wall reached first when the
    edge is walked along ``edge_dir`` and ends at the other wall.
    """
    line = np.concatenate([[opening], spiral_part])
    left = _offset(line, width / 2)
    right = _offset(line, -width / 2)
    # snap the wall ends onto the edge line through the opening
    for wall in (left, right):
        p0, p1 = wall[0], wall[1]
        s = np.imag(np.conj(edge_dir) * (opening - p1)) / np.imag(np.conj(edge_dir) * (p0 - p1))
        wall[0] = p1 + s * (p0 - p1)
    tip = line[-1]
    tan = (line[-1] - line[-2]) / abs(line[-1] - line[-2])
    s = np.linspace(0, np.pi, n_cap + 2)[1:-1]
    cap = tip + 0.5 * width * 1j * tan * np.exp(-1j * s)
    return np.concatenate([left, cap, right[::-1]])


@dataclass(frozen=True, eq=False)
class SpiralFixture:
    shape: Polyline
    params: SpiralParams
    #: arclength positions of the channel openings (first wall reached)
    openings: tuple
    #: index ranges of channel vertices in ``shape.points``
    channels: tuple


NAIVE_SPIRAL = SpiralParams(centre=0.5j, b=0.0095, psi_in=2 * math.pi, turns=5,
                            eps_a=0.1, eps_b=0.1, width=0.004)


def naive_spiral_fixture(params: SpiralParams = NAIVE_SPIRAL, span: float = 1.5, height: float = 1.2):
    """Convex pentagon with exterior angle ``pi/16`` at vertex 0 and two spiral channels.

    The channels open onto the two edges at vertex 0 and wind around each
    other above it.
    """
    tilt = math.pi / 32
    right_dir = np.exp(1j * tilt)
    left_dir = np.exp(1j * (math.pi - tilt))
    V = 0j
    PR = span * right_dir
    PL = span * left_dir
    top = max(PR.imag, PL.imag) + height
    TR = PR.real + 1j * top
    TL = PL.real + 1j * top
    a, b = _centrelines(params)
    open_a = _edge_foot(V, right_dir, a[0])
    open_b = _edge_foot(PL, -left_dir, b[0])
    chan_a = _channel(open_a, a, params.width, right_dir)
    chan_b = _channel(open_b, b, params.width, -left_dir)
    pts = np.concatenate([[V], chan_a, [PR, TR, TL, PL], chan_b])
    ia = (1, 1 + chan_a.size)
    ib = (pts.size - chan_b.size, pts.size)
    shape = Polyline(pts)
    t = np.concatenate([[0.0], np.cumsum(shape.edge_lengths)])
    return SpiralFixture(shape, params, (float(t[ia[0]]), float(t[ib[0]])), (ia, ib))


def _edge_foot(origin, direction, top):
    """Point on the edge line straight below ``top``."""
    s = (top.real - origin.real) / direction.real
    return origin + s * direction


HARMONIC_SPIRAL = SpiralParams(centre=-0.5j, b=0.0095, psi_in=2 * math.pi, turns=5,
                               eps_a=0.0, eps_b=0.0, width=0.004)
#: half the distance between the channel openings; chosen by Monte Carlo so the
#: bottom-edge stretch between the openings carries harmonic mass close to 1/32
HARMONIC_OPENING_HALF_GAP = 0.17


def harmonic_spiral_fixture(half_gap: float = HARMONIC_OPENING_HALF_GAP,
                            params: SpiralParams = HARMONIC_SPIRAL):
    """Square ``[-1, 1]**2`` with two spiral channels opening onto the bottom edge at ``x = -+half_gap``."""
    k = math.ceil((params.psi_in + math.pi / 2) / (2 * math.pi))
    r_a = params.b * (2 * math.pi * (k + params.turns))
    eps = math.asin(min(half_gap / r_a, 0.99))
    # the two ends sit on opposite sides of the downward direction
    r_b = r_a + params.b * math.pi
    eps_b = math.asin(min(half_gap / r_b, 0.99))
    p = SpiralParams(params.centre, params.b, params.psi_in, params.turns, eps, eps_b,
                     params.width, params.spacing)
    a, b = _centrelines(p)
    bottom = -1.0
    open_a = a[0].real + 1j * bottom
    open_b = b[0].real + 1j * bottom
    chan_a = _channel(open_a, a, p.width, 1 + 0j)
    chan_b = _channel(open_b, b, p.width, 1 + 0j)
    pts = np.concatenate([[-1 - 1j], chan_b, chan_a, [1 - 1j, 1 + 1j, -1 + 1j]])
    ib = (1, 1 + chan_b.size)
    ia = (ib[1], ib[1] + chan_a.size)
    shape = Polyline(pts)
    t = np.concatenate([[0.0], np.cumsum(shape.edge_lengths)])
    return SpiralFixture(shape, p, (float(t[ib[0]]), float(t[ia[0]])), (ib, ia))
