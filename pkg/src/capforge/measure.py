"""
Boundary probability measures and the cumulative curvature they induce.

A measure lives on the arclength interval ``[0, L]`` of a closed boundary:
finitely many atoms plus piecewise-constant densities.  The curvature
function is ``kappa(t) = 4*pi*mu((0, t])``; an atom sitting at ``t = 0`` is the
same boundary point as ``t = L`` and is only counted at the closing point.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MeasureError
from .geometry import Polyline, SegmentIndex, arclength_parametrize, turning_angles

log = logging.getLogger(__name__)

MASS_TOL = 1e-10
#: atoms heavier than ``0.5 - NEAR_INVALID_MARGIN`` are reported as near-invalid
NEAR_INVALID_MARGIN = 0.01
FOUR_PI = 4.0 * np.pi


def _as_table(rows, width):
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, width))
    return arr.reshape(-1, width)


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Atoms ``(t, mass)`` and density pieces ``(t0, t1, value)`` on ``[0, length]``."""

    atoms: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    densities: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    length: float | None = None
    rejected_samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "atoms", _as_table(self.atoms, 2))
        object.__setattr__(self, "densities", _as_table(self.densities, 3))

    @property
    def atom_positions(self) -> np.ndarray:
        return self.atoms[:, 0]

    @property
    def atom_masses(self) -> np.ndarray:
        return self.atoms[:, 1]

    @property
    def total_mass(self) -> float:
        d = self.densities
        return math.fsum(self.atom_masses) + math.fsum((d[:, 1] - d[:, 0]) * d[:, 2])

    def with_length(self, length: float) -> "BoundaryMeasure":
        return BoundaryMeasure(self.atoms, self.densities, float(length), self.rejected_samples)

    def to_dict(self) -> dict:
        out = {
            "atoms": self.atoms.tolist(),
            "densities": self.densities.tolist(),
        }
        if self.length is not None:
            out["length"] = self.length
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryMeasure":
        return cls(data.get("atoms", []), data.get("densities", []), data.get("length"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BoundaryMeasure":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MeasureVerdict:
    ok: bool
    violations: tuple = ()
    warnings: tuple = ()

    def __bool__(self):
        return self.ok

    @property
    def kinds(self) -> set:
        return {kind for kind, _ in self.violations}

    def message(self) -> str:
        return "; ".join(f"{kind}: {detail}" for kind, detail in self.violations) or "ok"


def validate(m: BoundaryMeasure, length: float | None = None) -> MeasureVerdict:
    """Check total mass 1, non-negativity, atoms strictly below 1/2, positions in range."""
    violations = []
    warnings = []
    L = m.length if length is None else length
    masses = m.atom_masses
    d = m.densities
    if np.any(masses < 0) or np.any(d[:, 2] < 0):
        violations.append(("negativity", "negative mass or density"))
    if np.any(d[:, 1] < d[:, 0]):
        violations.append(("interval", "density interval with t1 < t0"))
    total = m.total_mass
    if not abs(total - 1.0) <= MASS_TOL:
        violations.append(("total-mass", f"total mass {total!r} differs from 1"))
    if masses.size:
        heavy = float(masses.max())
        if heavy >= 0.5:
            violations.append(("oversized-atom", f"atom of mass {heavy!r} is not below 1/2"))
        elif heavy > 0.5 - NEAR_INVALID_MARGIN:
            warnings.append(("near-invalid", f"atom of mass {heavy!r} is close to 1/2"))
    if L is not None:
        tol = 1e-12 * max(L, 1.0)
        pos = np.concatenate([m.atom_positions, d[:, 0], d[:, 1]])
        if np.any(pos < -tol) or np.any(pos > L + tol):
            violations.append(("position", f"support outside [0, {L!r}]"))
    return MeasureVerdict(not violations, tuple(violations), tuple(warnings))


@dataclass(frozen=True, eq=False)
class CurvatureFunction:
    """Right-continuous, nondecreasing ``t -> kappa(t)`` on ``[0, L]``.

    The measure is rescaled by its (validated) total so that ``kappa(L)`` is
    ``4*pi`` to rounding.
    """

    length: float
    atom_t: np.ndarray
    atom_cum: np.ndarray
    density_breaks: np.ndarray
    density_cum: np.ndarray
    density_break_slopes: np.ndarray
    scale: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.atom_t, t, side="right")
        cum = np.concatenate([[0.0], self.atom_cum])
        atoms = cum[k]
        dens = np.interp(t, self.density_breaks, self.density_cum)
        out = self.scale * (atoms + dens)
        return np.where(t <= 0, 0.0, out)

    def slope(self, t):
        """Curvature density ``kappa'(t)`` (right limit) away from atoms."""
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.density_breaks, t, side="right") - 1,
                    0, max(self.density_break_slopes.size - 1, 0))
        if self.density_break_slopes.size == 0:
            return np.zeros_like(t)
        return self.scale * self.density_break_slopes[k]

    def atom_mass_at(self, t, tol=0.0):
        """Curvature concentrated at ``t`` (``t = 0`` and ``t = L`` are the same point)."""
        t = float(t)
        if t <= tol:
            t = self.length
        lo = np.searchsorted(self.atom_t, t - tol, side="left")
        hi = np.searchsorted(self.atom_t, t + tol, side="right")
        below = self.atom_cum[lo - 1] if lo > 0 else 0.0
        upto = self.atom_cum[hi - 1] if hi > 0 else 0.0
        return self.scale * (upto - below)


def make_curvature(m: BoundaryMeasure, L: float | None = None) -> CurvatureFunction:
    L = m.length if L is None else float(L)
    if L is None:
        raise MeasureError("boundary length is required")
    verdict = validate(m, L)
    if not verdict:
        raise MeasureError(verdict.message(), verdict)
    pos = np.where(m.atom_positions <= 0.0, L, np.minimum(m.atom_positions, L))
    order = np.argsort(pos, kind="stable")
    atom_t = pos[order]
    atom_cum = np.cumsum(m.atom_masses[order])

    d = m.densities
    d = d[(d[:, 1] > d[:, 0]) & (d[:, 2] > 0)]
    breaks = np.unique(np.concatenate([[0.0, L], np.clip(d[:, :2].ravel(), 0, L)]))
    if d.shape[0]:
        # pieces may overlap: add each value on its break range by a difference array
        lo = np.searchsorted(breaks, np.clip(d[:, 0], 0, L))
        hi = np.searchsorted(breaks, np.clip(d[:, 1], 0, L))
        delta = np.zeros(breaks.size)
        np.add.at(delta, lo, d[:, 2])
        np.add.at(delta, hi, -d[:, 2])
        slopes = np.cumsum(delta)[:-1]
    else:
        slopes = np.zeros(breaks.size - 1)
    cum = np.concatenate([[0.0], np.cumsum(slopes * np.diff(breaks))])
    total = (atom_cum[-1] if atom_cum.size else 0.0) + cum[-1]
    return CurvatureFunction(
        length=L,
        atom_t=atom_t,
        atom_cum=atom_cum,
        density_breaks=breaks,
        density_cum=cum,
        density_break_slopes=slopes,
        scale=FOUR_PI / total,
    )


def turning_measure(shape: Polyline) -> BoundaryMeasure:
    """Atoms ``(pi - theta) / (2*pi)`` at every vertex of a counterclockwise polygon.

    For a convex polygon this is the measure whose cap is the mirror image of
    the polygon.  Vertex 0 is reported at ``t = 0``.
    """
    td = turning_angles(shape)
    L = shape.length
    pos = np.concatenate([[0.0], td.jump_t[:-1]])
    turns = np.concatenate([td.jumps[-1:], td.jumps[:-1]])
    masses = turns / math.fsum(turns)
    return BoundaryMeasure(np.column_stack([pos, masses]), length=L)


def triangle_measure(tri: Polyline) -> BoundaryMeasure:
    """Masses ``(pi - theta_v) / (2*pi)`` at the vertices of a triangle."""
    if tri.points.size != 3 or not tri.closed:
        raise MeasureError("triangle_measure needs a closed polyline with three vertices")
    if tri.is_degenerate:
        raise MeasureError("degenerate triangle")
    return turning_measure(tri)


def project_to_arclength(hits, shape: Polyline):
    """Arclength position of the nearest boundary point and the distance to it."""
    idx = SegmentIndex(shape)
    d, edge, u, _, _ = idx.query(np.asarray(hits, dtype=complex))
    param = arclength_parametrize(shape)
    t = param.edge_starts_t[edge] + u * shape.edge_lengths[edge]
    return np.minimum(t, shape.length), d


def measure_from_samples(hits, shape: Polyline, bins: int | None = None, tol: float | None = None,
                         binned_as: str = "atoms") -> BoundaryMeasure:
    """Empirical measure of boundary hits.

    Each accepted hit gets mass ``1/N``.  With ``bins`` the hits are histogrammed
    into uniform arclength bins and reported either as atoms at bin centres or
    as piecewise-constant densities.  Hits farther than ``tol`` from the
    boundary are rejected and counted in ``rejected_samples``.
    """
    hits = np.atleast_1d(np.asarray(hits, dtype=complex))
    if hits.size == 0:
        raise MeasureError("no samples")
    L = shape.length
    if tol is None:
        tol = 1e-3 * shape.diameter
    t, dist = project_to_arclength(hits, shape)
    ok = dist <= tol
    rejected = int(np.count_nonzero(~ok))
    if rejected:
        log.warning("rejected %d of %d samples farther than %g from the boundary",
                    rejected, hits.size, tol)
    t = t[ok]
    if t.size == 0:
        raise MeasureError("every sample was rejected")
    n = t.size
    if bins is None:
        pos, counts = np.unique(t, return_counts=True)
        return BoundaryMeasure(np.column_stack([pos, counts / n]), length=L, rejected_samples=rejected)
    edges = np.linspace(0.0, L, bins + 1)
    counts, _ = np.histogram(t, bins=edges)
    mass = counts / n
    if binned_as == "atoms":
        keep = mass > 0
        centres = 0.5 * (edges[:-1] + edges[1:])
        return BoundaryMeasure(np.column_stack([centres[keep], mass[keep]]), length=L,
                               rejected_samples=rejected)
    if binned_as == "density":
        width = np.diff(edges)
        return BoundaryMeasure(densities=np.column_stack([edges[:-1], edges[1:], mass / width]),
                               length=L, rejected_samples=rejected)
    raise ValueError(f"unknown binning mode {binned_as!r}")


def uniform_measure(L: float) -> BoundaryMeasure:
    return BoundaryMeasure(densities=[[0.0, L, 1.0 / L]], length=L)
