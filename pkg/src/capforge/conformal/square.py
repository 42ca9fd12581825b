"""
Exact harmonic measure of a square from its exterior Schwarz-Christoffel map.

For ``Phi'(w) = C (1 - w**-4)**(1/2)`` the corners sit at ``w = 1, i, -1, -i`` and
``|ds / d theta|`` is proportional to ``|sin 2 theta|**(1/2)``.  Along one edge
the fraction ``p`` of the side reached at conformal angle ``theta = v / 2`` is

    p = I_x(3/4, 1/2) / 2,  x = sin(v)**2,   for v <= pi/2,

and symmetric beyond, where ``I`` is the regularized incomplete beta function.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from ..geometry import Polyline
from ..measure import BoundaryMeasure


def _edge_fraction(v):
    """Fraction of the side covered when ``2 * theta`` runs from 0 to ``v`` in ``[0, pi]``."""
    v = np.asarray(v, dtype=float)
    half = np.minimum(v, np.pi - v)
    p = 0.5 * special.betainc(0.75, 0.5, np.sin(half) ** 2)
    return np.where(v <= np.pi / 2, p, 1.0 - p)


def _edge_angle(p):
    """Inverse of :func:`_edge_fraction`: ``v`` in ``[0, pi]`` for fraction ``p``."""
    p = np.asarray(p, dtype=float)
    lo = np.minimum(p, 1.0 - p)
    x = special.betaincinv(0.75, 0.5, 2.0 * lo)
    v = np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))
    return np.where(p <= 0.5, v, np.pi - v)


def square_conformal_angle(t, side: float = 1.0):
    """``theta(t)`` for a square traversed counterclockwise from a corner, with ``theta(0) = 0``."""
    t = np.asarray(t, dtype=float)
    k = np.clip(np.floor(t / side), 0, 3)
    p = t / side - k
    return 0.5 * np.pi * k + 0.5 * _edge_angle(p)


def square_arclength(theta, side: float = 1.0):
    """Inverse of :func:`square_conformal_angle`."""
    theta = np.asarray(theta, dtype=float)
    k = np.clip(np.floor(theta / (0.5 * np.pi)), 0, 3)
    v = 2.0 * (theta - 0.5 * np.pi * k)
    return side * (k + _edge_fraction(v))


def square_harmonic_cdf(t, side: float = 1.0):
    return square_conformal_angle(t, side) / (2 * np.pi)


def square_harmonic_atoms(shape: Polyline, n: int) -> BoundaryMeasure:
    """``n`` equal atoms at the harmonic-measure quantiles ``(k + 1/2) / n`` of a square."""
    side = shape.length / 4
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    t = square_arclength(theta, side)
    return BoundaryMeasure(np.column_stack([t, np.full(n, 1.0 / n)]), length=shape.length)
