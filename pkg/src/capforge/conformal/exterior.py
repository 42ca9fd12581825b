"""
Exterior Riemann maps ``Phi`` of the unit disk complement and the harmonic cap development.

``Phi(z) = scale * z + a_0 + a_1 / z + a_2 / z**2 + ...`` maps ``|z| > 1`` onto the
complement of a shape.  The development of the harmonic cap is the power
series ``g(z) = int_0^z Phi'(1/x) dx``; for the Laurent form above this is

    g(z) = scale * z - sum_k k * a_k * z**(k + 2) / (k + 2).

Going once around the unit circle with ``g`` traces the cap boundary, and the
conformal angle ``theta(t) = arg Phi^-1(s(t))`` gives the curvature function
``kappa = 2 * theta`` of the same cap in arclength form.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DisconnectedJuliaSetError
from ..geometry import Polyline, arclength_parametrize
from .polynomial import PolynomialMap, check_connected, quadratic

log = logging.getLogger(__name__)

KINDS = ("identity", "joukowski", "laurent")
NEWTON_STEPS = 60


class SeriesConvergenceWarning(UserWarning):
    """The Laurent tail is not small enough to trust boundary values."""


@dataclass(frozen=True, eq=False)
class ExteriorMap:
    """Exterior conformal map with Laurent coefficients ``laurent = (a_0, a_1, ...)``."""

    kind: str = "laurent"
    laurent: np.ndarray = None
    scale: float = 1.0
    truncation_error: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown exterior map kind {self.kind!r}")
        coeffs = np.zeros(1, complex) if self.laurent is None else np.asarray(self.laurent, dtype=complex)
        if coeffs.size == 0:
            coeffs = np.zeros(1, complex)
        if self.kind == "joukowski":
            coeffs = np.array([0, 1], dtype=complex)
        elif self.kind == "identity":
            coeffs = np.zeros(1, complex)
        object.__setattr__(self, "laurent", coeffs)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @classmethod
    def identity(cls, radius: float = 1.0) -> "ExteriorMap":
        return cls("identity", scale=radius)

    @classmethod
    def joukowski(cls) -> "ExteriorMap":
        return cls("joukowski")

    @property
    def order(self) -> int:
        """Index of the last stored coefficient ``a_k``."""
        return self.laurent.size - 1

    @property
    def robin_constant(self) -> float:
        """``gamma`` in ``G(z) = log|z| + gamma + o(1)``."""
        return -float(np.log(self.scale))

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        inv = 1.0 / w
        acc = np.zeros(w.shape, dtype=complex)
        for a in self.laurent[:0:-1]:
            acc = (acc + a) * inv
        return self.scale * w + self.laurent[0] + acc

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        inv = 1.0 / w
        k = np.arange(1, self.laurent.size)
        acc = np.zeros(w.shape, dtype=complex)
        for kk, a in zip(k[::-1], self.laurent[:0:-1]):
            acc = (acc - kk * a) * inv
        return self.scale + acc * inv

    def inverse(self, z, side=None):
        """``Phi^-1(z)`` with ``|w| >= 1``.

        ``side`` (unit normals pointing away from the shape) breaks ties where
        two boundary preimages coincide in the image, as on both sides of a slit.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        side = None if side is None else np.broadcast_to(np.asarray(side, dtype=complex), z.shape)
        if self.kind == "identity":
            return (z - self.laurent[0]) / self.scale
        if self.kind == "joukowski":
            root = np.sqrt(z - 2) * np.sqrt(z + 2)
            w1, w2 = 0.5 * (z + root), 0.5 * (z - root)
            return self._pick(np.stack([w1, w2], axis=-1), side)
        return self._laurent_inverse(z, side)

    def _pick(self, cands, side):
        mod = np.abs(cands)
        best = np.argmax(mod, axis=-1)
        tie = np.abs(mod[..., 0] - mod[..., 1]) <= 1e-9 * np.maximum(mod.max(axis=-1), 1.0) \
            if cands.shape[-1] == 2 else np.zeros(cands.shape[:-1], bool)
        if side is not None and np.any(tie):
            # pushing w outward moves Phi(w) along w * Phi'(w): keep the root that moves off the shape
            push = cands * self.derivative(cands)
            score = np.real(np.conj(side)[..., None] * push)
            best = np.where(tie, np.argmax(score, axis=-1), best)
        return np.take_along_axis(cands, best[..., None], axis=-1)[..., 0]

    def _laurent_inverse(self, z, side):
        w = (z - self.laurent[0]) / self.scale
        w = np.where(np.abs(w) < 1.5, 1.5 * np.exp(1j * np.angle(w)), w)
        for _ in range(NEWTON_STEPS):
            step = (self(w) - z) / self.derivative(w)
            w = w - step
            if np.all(np.abs(step) <= 1e-15 * np.abs(w)):
                break
        bad = ~(np.abs(self(w) - z) <= 1e-12 * np.maximum(1.0, np.abs(z))) | (np.abs(w) < 1 - 1e-9)
        for i in np.flatnonzero(bad):
            w[i] = self._inverse_by_roots(z[i], None if side is None else side[i])
        return w

    def _inverse_by_roots(self, z, side):
        # w^N (Phi(w) - z) is a polynomial in w of degree N + 1
        poly = np.concatenate([[self.scale, self.laurent[0] - z], self.laurent[1:]])
        roots = np.roots(poly)
        outside = roots[np.abs(roots) >= 1 - 1e-7]
        if outside.size == 0:
            raise ConvergenceError(f"no preimage of {z} outside the unit disk")
        mod = np.abs(outside)
        ties = outside[mod >= mod.max() - 1e-7]
        if ties.size > 1 and side is not None:
            push = ties * self.derivative(ties)
            return complex(ties[np.argmax(np.real(np.conj(side) * push))])
        return complex(outside[np.argmax(mod)])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "scale": self.scale,
            "laurent": [[a.real, a.imag] for a in self.laurent],
            "truncation_error": self.truncation_error,
        }


def bottcher_series(f, order: int = 64, n_max: int = 2000) -> ExteriorMap:
    """Laurent coefficients of the Böttcher map of ``z**2 + c`` up to ``a_{order-1}``.

    Writing ``Phi(z) = z (1 + sum_j b_j z**-j)`` and matching powers in
    ``Phi(z)**2 + c = Phi(z**2)`` gives

        2 b_n = beta_n - sum_{j=1}^{n-1} b_j b_{n-j} - c [n == 2],

    with ``beta_n = b_{n/2}`` for even ``n`` and 0 otherwise; ``a_{j-1} = b_j``.
    """
    if not isinstance(f, PolynomialMap):
        f = quadratic(f)
    if not f.is_quadratic_normal:
        raise ValueError("the series path handles z**2 + c only")
    check_connected(f, n_max)
    c = f.c
    b = np.zeros(order + 1, dtype=complex)
    for n in range(1, order + 1):
        beta = b[n // 2] if n % 2 == 0 else 0.0
        conv = np.dot(b[1:n], b[n - 1:0:-1]) if n > 1 else 0.0
        b[n] = 0.5 * (beta - conv - (c if n == 2 else 0.0))
    laurent = b[1:]
    tail = float(np.max(np.abs(laurent[-4:]))) if laurent.size >= 4 else float(np.max(np.abs(laurent)))
    head = float(np.max(np.abs(laurent))) or 1.0
    if tail > 0.05 * head:
        warnings.warn(f"Böttcher coefficients decay slowly (last {tail:.3g}); boundary values are approximate",
                      SeriesConvergenceWarning, stacklevel=2)
    kind = "identity" if not np.any(laurent) else "laurent"
    if kind == "identity":
        return ExteriorMap("identity")
    return ExteriorMap("laurent", laurent, truncation_error=tail)


def functional_residual(Phi: ExteriorMap, c, radius: float = 1.5, n: int = 512) -> float:
    """``max |Phi(z)**2 + c - Phi(z**2)|`` on ``|z| = radius``."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(np.abs(Phi(z) ** 2 + c - Phi(z * z))))


def development_coefficients(Phi: ExteriorMap) -> np.ndarray:
    """Taylor coefficients ``[g_1, g_2, ...]`` of ``g`` (``g_0 = 0`` is omitted)."""
    a = Phi.laurent
    k = np.arange(a.size)
    out = np.zeros(a.size + 2, dtype=complex)
    out[0] = Phi.scale
    out[k + 1] = -k * a / (k + 2)
    return out


def _eval_series(coeffs, z):
    """``sum_j coeffs[j] * z**(j + 1)`` by Horner."""
    acc = np.zeros(np.shape(z), dtype=complex)
    for a in coeffs[::-1]:
        acc = (acc + a) * z
    return acc


def harmonic_cap_development(Phi: ExteriorMap, z, boundary_tol: float = 1e-6):
    """Evaluate the development ``g`` at points of the closed unit disk."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1 + 1e-12):
        raise ValueError("g is evaluated on the closed unit disk only")
    coeffs = development_coefficients(Phi)
    on_circle = np.abs(z) >= 1 - 1e-12
    if np.any(on_circle) and Phi.kind == "laurent":
        tail = series_tail(Phi)
        if tail > boundary_tol:
            warnings.warn(f"series tail {tail:.3g} at |z| = 1 exceeds {boundary_tol:g}",
                          SeriesConvergenceWarning, stacklevel=2)
    out = _eval_series(coeffs, z)
    return complex(out) if out.ndim == 0 else out


def development_derivative(Phi: ExteriorMap, z):
    """``g'(z)``, equal to ``Phi'(1/z)`` away from 0."""
    coeffs = development_coefficients(Phi)
    scaled = coeffs * np.arange(1, coeffs.size + 1)
    return np.polyval(scaled[::-1], np.asarray(z, dtype=complex))


def series_tail(Phi: ExteriorMap, last: int = 8) -> float:
    """Size of the last few terms of ``g`` on the unit circle, a truncation proxy."""
    coeffs = development_coefficients(Phi)
    return float(np.sum(np.abs(coeffs[-last:])))


def conformal_angle(Phi: ExteriorMap, shape: Polyline, t, grid: int = 4096) -> np.ndarray:
    """Continuous branch of ``arg Phi^-1(s(t)) - arg Phi^-1(s(0))`` rising from 0 to ``2*pi``."""
    t = np.asarray(t, dtype=float)
    L = shape.length
    param = arclength_parametrize(shape)
    dense = np.union1d(np.linspace(0.0, L, grid + 1), np.clip(t, 0.0, L))
    pos = param(dense)
    # outward normal of a counterclockwise boundary
    side = -1j * param.directions[param.edge_index(dense)]
    w = Phi.inverse(pos, side=side)
    theta = np.unwrap(np.angle(w))
    theta = theta - theta[0]
    if abs(theta[-1] - 2 * np.pi) > 1e-6:
        raise ConvergenceError(f"conformal angle ends at {theta[-1]!r}, not 2*pi")
    if np.any(np.diff(theta) < -1e-9):
        raise ConvergenceError("conformal angle is not monotone along the boundary")
    theta[-1] = 2 * np.pi
    return np.interp(t, dense, theta)


def basepoint_angle(Phi: ExteriorMap, s0, side=None) -> float:
    return float(np.angle(Phi.inverse(np.asarray([s0]), side=side)[0]))


def harmonic_cap_boundary(Phi: ExteriorMap, theta0: float = 0.0, n: int = 4096, s0=None):
    """Cap boundary from the series, parametrized by the conformal angle.

    ``s_hat(theta) = s0 + exp(2i theta0) (g(exp(-i theta0)) - g(exp(-i (theta0 + theta))))``
    with ``s0 = Phi(exp(i theta0))``; this is ``-g`` moved so that it starts at
    the shape basepoint and runs clockwise like the arclength construction.
    Returns ``(theta, points)`` with ``n + 1`` samples, the last closing the curve.
    """
    theta = 2 * np.pi * np.arange(n + 1) / n
    if s0 is None:
        s0 = complex(Phi(np.exp(1j * theta0)))
    rot = np.exp(2j * theta0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesConvergenceWarning)
        start = harmonic_cap_development(Phi, np.exp(-1j * theta0))
        g = harmonic_cap_development(Phi, np.exp(-1j * (theta0 + theta)))
    return theta, s0 + rot * (start - g)
