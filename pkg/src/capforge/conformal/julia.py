"""
Polygonal approximations of Julia sets by iterated preimages of a point.

A circle ``C`` through the basepoint ``b`` that encloses the filled Julia set
is pulled back level by level.  If ``gamma_k`` is sampled at ``tau = j / M``,
then ``gamma_{k+1}(j / M)`` is the preimage of ``gamma_k(d j / M)`` continuing
``gamma_{k+1}((j - 1) / M)``.  After ``n`` levels the ``d**n`` preimages of ``b``
are ``gamma_n[::m]`` with ``M = m d**n``, already in cyclic (external angle)
order.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import ConvergenceError
from ..geometry import Polyline, arclength_parametrize, winding_numbers
from ..measure import BoundaryMeasure
from .polynomial import PolynomialMap, check_connected, quadratic

log = logging.getLogger(__name__)

#: two candidate branches closer than this ratio count as ambiguous
AMBIGUITY_RATIO = 0.5
MAX_SAMPLES_PER_VERTEX = 1024


def _start_circle(f: PolynomialMap, b: complex, M: int):
    a = np.abs(f.coefficients)
    R_K = float(max(2.0, a[:-1].sum() / a[-1]))
    tau = np.arange(M) / M
    if abs(b) >= R_K:
        return b * np.exp(2j * np.pi * tau)
    if b == 0:
        raise ValueError("basepoint 0 needs an explicit enclosing circle")
    # a large circle through b, centred on the far side of the origin
    rho = 4.0 * R_K
    u = b / abs(b)
    centre = b - rho * u
    return centre + rho * u * np.exp(2j * np.pi * tau)


def _pull_back_quadratic(c, target):
    """Continuous square-root branch of ``target - c``; returns ``(w, worst_ratio)``."""
    p = np.sqrt(target - c)
    nxt = np.roll(p, -1)
    same = np.abs(nxt - p)
    flip = np.abs(nxt + p)
    ratio = float(np.max(np.minimum(same, flip) / np.maximum(np.maximum(same, flip), 1e-300)))
    flips = (flip < same)[:-1]
    sign = np.concatenate([[1.0], np.where(np.cumsum(flips) % 2 == 1, -1.0, 1.0)])
    w = sign * p
    if w[0].real < 0 or (w[0].real == 0 and w[0].imag < 0):
        w = -w
    return w, ratio, w[-1], w[0]


def _pull_back_general(f: PolynomialMap, target):
    coeffs = f.coefficients
    d = f.degree
    M = target.size
    comp = np.zeros((M, d, d), dtype=complex)
    monic = coeffs[:-1] / coeffs[-1]
    comp[:, :, -1] = -monic
    comp[:, 0, -1] += target / coeffs[-1]
    comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
    roots = np.linalg.eigvals(comp)
    w = np.empty(M, dtype=complex)
    w[0] = roots[0][np.argmax(roots[0].real)]
    worst = 0.0
    for j in range(1, M):
        dist = np.abs(roots[j] - w[j - 1])
        order = np.sort(dist)
        worst = max(worst, order[0] / max(order[1], 1e-300))
        w[j] = roots[j][np.argmin(dist)]
    return w, worst, w[-1], w[0]


def _pull_back(f, target):
    if f.is_quadratic_normal:
        return _pull_back_quadratic(f.c, target)
    return _pull_back_general(f, target)


def pulled_back_curves(f: PolynomialMap, basepoint, depth: int, m: int = 64):
    """Sampled curves ``gamma_0 ... gamma_depth``; raises when a branch choice is ambiguous."""
    d = f.degree
    M = m * d**depth
    gamma = _start_circle(f, complex(basepoint), M)
    out = [gamma]
    idx = (d * np.arange(M)) % M
    crit = np.atleast_1d(f.critical_points())
    for level in range(depth):
        gamma, ratio, last, first = _pull_back(f, gamma[idx])
        if ratio >= AMBIGUITY_RATIO:
            raise ConvergenceError(f"ambiguous branch at level {level + 1} (ratio {ratio:.3f})")
        # the continuation past the last sample must land back on the first one
        close = np.abs(last - first)
        local = max(abs(gamma[1] - gamma[0]), abs(gamma[-1] - gamma[-2]))
        if close > 2.0 * local or close >= np.abs(last + first):
            raise ConvergenceError(f"pulled-back curve does not close at level {level + 1}")
        out.append(gamma)
    return out, crit


def julia_boundary(f, basepoint, depth: int, m: int = 64, n_max: int = 2000):
    """``d**depth`` preimages of ``basepoint`` in cyclic order, with equal weights.

    Returns ``(polygon, measure)``.  The sampling density ``m`` per final
    vertex doubles whenever branch tracking is ambiguous.
    """
    if not isinstance(f, PolynomialMap):
        f = quadratic(f)
    check_connected(f, n_max)
    d = f.degree
    while True:
        try:
            curves, crit = pulled_back_curves(f, basepoint, depth, m)
            gamma = curves[-1]
            verts = gamma[::m]
            poly = Polyline(verts, True)
            w = winding_numbers(Polyline(gamma, True), crit, check_boundary=False)
            if np.any(w != 1):
                raise ConvergenceError(f"pulled-back curve winds {w.tolist()} times around the critical points")
            break
        except ConvergenceError as exc:
            if 2 * m > MAX_SAMPLES_PER_VERTEX:
                raise ConvergenceError(f"branch tracking failed at {m} samples per vertex: {exc}") from exc
            log.info("refining branch tracking: %s", exc)
            m *= 2
    n = verts.size
    if n != d**depth:
        raise ConvergenceError("wrong vertex count")
    param = arclength_parametrize(poly)
    t = param.edge_starts_t
    measure = BoundaryMeasure(np.column_stack([t, np.full(n, 1.0 / n)]), length=poly.length)
    return poly, measure
