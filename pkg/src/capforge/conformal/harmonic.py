"""
Monte Carlo harmonic measure from infinity by walk on spheres.

Walkers start uniformly on a launch circle around the shape (the exact
hitting distribution of that circle from infinity).  Each step jumps to a
uniform point on the largest circle that avoids the shape.  A walker that
wanders outside the launch circle is returned to it by sampling the exterior
Poisson kernel exactly, so the finite launch radius introduces no bias.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError
from ..geometry import Polyline, SegmentIndex, arclength_parametrize, point_segment_distance
from ..measure import BoundaryMeasure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HarmonicSampler:
    walkers: int = 100_000
    seed: int = 0
    #: launch radius as a multiple of the shape diameter (must exceed 2)
    launch_factor: float = 4.0
    #: walkers stop within ``eps_rel * diameter`` of the boundary
    eps_rel: float = 1e-4
    max_steps: int = 100_000
    chunk: int = 16_384

    def __post_init__(self):
        if self.launch_factor <= 2:
            raise ValueError("launch radius must exceed twice the diameter")
        if self.walkers <= 0:
            raise ValueError("walker count must be positive")


@dataclass(frozen=True, eq=False)
class HarmonicHits:
    """Accepted boundary hits with their arclength positions."""

    points: np.ndarray
    t: np.ndarray
    edge: np.ndarray
    launched: int
    discarded: int
    mean_steps: float

    @property
    def discard_rate(self) -> float:
        return self.discarded / self.launched

    def measure(self, shape: Polyline, bins: int | None = None, binned_as: str = "atoms") -> BoundaryMeasure:
        return _measure_from_t(self.t, shape.length, bins, binned_as)


def _measure_from_t(t, L, bins, binned_as):
    if bins is None:
        pos, counts = np.unique(t, return_counts=True)
        return BoundaryMeasure(np.column_stack([pos, counts / t.size]), length=L)
    edges = np.linspace(0.0, L, bins + 1)
    counts, _ = np.histogram(t, bins=edges)
    mass = counts / t.size
    if binned_as == "density":
        return BoundaryMeasure(densities=np.column_stack([edges[:-1], edges[1:], mass / np.diff(edges)]), length=L)
    keep = mass > 0
    centres = 0.5 * (edges[:-1] + edges[1:])
    return BoundaryMeasure(np.column_stack([centres[keep], mass[keep]]), length=L)


def _reenter(z, centre, R, rng):
    """Hit point on the launch circle for walkers outside it (exterior Poisson kernel)."""
    rel = z - centre
    rho = np.abs(rel)
    q = R / rho
    zeta = np.exp(2j * np.pi * rng.random(z.size))
    # inversion in the circle turns the exterior kernel into the interior one at q
    return centre + R * (rel / rho) * (zeta + q) / (1 + q * zeta)


def _walk_chunk(index, n, centre, R, r_shape, eps, max_steps, rng):
    z = centre + R * np.exp(2j * np.pi * rng.random(n))
    steps = np.zeros(n, dtype=int)
    done = np.zeros(n, dtype=bool)
    lost = np.zeros(n, dtype=bool)
    active = np.arange(n)
    while active.size:
        zz = z[active]
        # far from the shape the enclosing circle gives a free lower bound
        d = np.abs(zz - centre) - r_shape
        near = d < 0.5 * r_shape
        if np.any(near):
            d[near] = index.query(zz[near], exact=False)[0]
            close = np.flatnonzero(near & (d <= eps))
            if close.size:
                d[close] = index.query(zz[close], exact=True)[0]
        hit = d <= eps
        done[active[hit]] = True
        move = active[~hit]
        if move.size == 0:
            break
        dm = d[~hit]
        zn = z[move] + dm * np.exp(2j * np.pi * rng.random(move.size))
        out = np.abs(zn - centre) > R
        if np.any(out):
            zn[out] = _reenter(zn[out], centre, R, rng)
        z[move] = zn
        steps[move] += 1
        over = steps[move] >= max_steps
        lost[move[over]] = True
        active = move[~over]
    return z, done, lost, steps


def _resolve_sides(shape, z):
    """On a zero-area shape both sides of a segment coincide; keep the edge the walker sees from outside."""
    a, d = shape.starts, shape.edges
    cand_d, cand_u = point_segment_distance(z[:, None], a[None, :], a[None, :] + d[None, :])
    right = np.real(np.conj(d)[None, :] * 1j * (z[:, None] - a[None, :])) >= 0
    best = cand_d.min(axis=1, keepdims=True)
    tie = cand_d <= best + 1e-12 * shape.length
    score = np.where(tie & right, 0, 1) * 1.0 + np.where(tie, 0, 2)
    pick = np.argmin(score, axis=1)
    rows = np.arange(z.size)
    return pick, cand_u[rows, pick]


def harmonic_measure_mc(shape: Polyline, sampler: HarmonicSampler | None = None) -> HarmonicHits:
    """Boundary hits of ``sampler.walkers`` Brownian paths started at infinity."""
    if sampler is None:
        sampler = HarmonicSampler()
    if not shape.closed:
        raise GeometryError("harmonic measure needs a closed shape")
    pts = shape.points
    centre = 0.5 * (complex(pts.real.min(), pts.imag.min()) + complex(pts.real.max(), pts.imag.max()))
    diam = shape.diameter
    R = sampler.launch_factor * diam
    eps = sampler.eps_rel * diam
    index = SegmentIndex(shape, k=4)
    r_shape = float(np.max(np.abs(pts - centre)))
    seqs = np.random.SeedSequence(sampler.seed).spawn((sampler.walkers + sampler.chunk - 1) // sampler.chunk)
    hits, edges, us = [], [], []
    discarded = 0
    total_steps = 0
    remaining = sampler.walkers
    for ss in seqs:
        n = min(sampler.chunk, remaining)
        remaining -= n
        rng = np.random.default_rng(ss)
        z, done, lost, steps = _walk_chunk(index, n, centre, R, r_shape, eps, sampler.max_steps, rng)
        discarded += int(np.count_nonzero(lost))
        total_steps += int(steps.sum())
        zf = z[done]
        if shape.is_degenerate:
            e, u = _resolve_sides(shape, zf)
        else:
            _, e, u, _, _ = index.query(zf, exact=True)
        hits.append(zf)
        edges.append(e)
        us.append(u)
    if discarded:
        log.warning("discarded %d of %d walkers after %d steps", discarded, sampler.walkers, sampler.max_steps)
    edge = np.concatenate(edges)
    u = np.concatenate(us)
    param = arclength_parametrize(shape)
    t = np.minimum(param.edge_starts_t[edge] + u * shape.edge_lengths[edge], shape.length)
    foot = shape.starts[edge] + u * shape.edges[edge]
    return HarmonicHits(foot, t, edge, sampler.walkers, discarded, total_steps / sampler.walkers)
