"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy import integrate

from capforge.geometry import Polyline, reflect_across_line
from capforge.measure import BoundaryMeasure


def random_measure(rng, L, n_atoms, n_dens):
    """Valid measure with atoms and density pieces, every atom below 0.45."""
    w = rng.dirichlet(np.ones(n_atoms + n_dens))
    while w[:n_atoms].max(initial=0.0) >= 0.45:
        w = rng.dirichlet(np.ones(n_atoms + n_dens))
    atoms = np.column_stack([rng.uniform(0, L, n_atoms), w[:n_atoms]])
    cuts = np.sort(rng.uniform(0, L, 2 * n_dens)).reshape(-1, 2)
    cuts[:, 1] = np.maximum(cuts[:, 1], cuts[:, 0] + 1e-6)
    dens = np.column_stack([cuts, w[n_atoms:] / (cuts[:, 1] - cuts[:, 0])])
    return BoundaryMeasure(atoms, dens, L)


def mirrored_vertices(shape: Polyline) -> np.ndarray:
    """Shape vertices reflected across the line of its first edge."""
    z = shape.points
    return reflect_across_line(z, z[0], z[1] - z[0])


def quad_path_integral(fn, a: complex, b: complex, pieces: int = 1) -> complex:
    """``int_a^b fn(zeta) d zeta`` along the segment, by adaptive real quadrature."""
    d = b - a
    edges = np.linspace(0.0, 1.0, pieces + 1)
    total = 0j
    for u0, u1 in zip(edges[:-1], edges[1:]):
        re = integrate.quad(lambda u: (fn(a + u * d) * d).real, u0, u1, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
        im = integrate.quad(lambda u: (fn(a + u * d) * d).imag, u0, u1, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
        total += complex(re, im)
    return total


def arcsine_cdf(x, half=2.0):
    return 0.5 + np.arcsin(np.clip(np.asarray(x) / half, -1, 1)) / math.pi


def joukowski_slit_theta(t):
    """Conformal angle of the slit ``[-2, 2]`` traversed top side first from ``x = 2``."""
    t = np.asarray(t, dtype=float)
    top = t <= 4
    x = np.where(top, 2 - t, t - 6)
    ac = np.arccos(np.clip(x / 2, -1, 1))
    return np.where(top, ac, 2 * math.pi - ac)
