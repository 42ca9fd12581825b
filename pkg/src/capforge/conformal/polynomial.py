"""Polynomial maps, escape-time Green functions and the metric density ``exp(-2G)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DisconnectedJuliaSetError

DEFAULT_N_MAX = 2000
#: orbits are followed until ``|w|`` passes this before the logarithm is taken
BAILOUT = 1e10


@dataclass(frozen=True, eq=False)
class PolynomialMap:
    """``f(z) = sum_k coefficients[k] * z**k`` with degree at least 2."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.trim_zeros(np.asarray(self.coefficients, dtype=complex), "b")
        if coeffs.size < 3:
            raise ValueError("polynomial degree must be at least 2")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coefficients[-1])

    @property
    def is_quadratic_normal(self) -> bool:
        """True for ``z**2 + c``."""
        a = self.coefficients
        return self.degree == 2 and a[2] == 1 and a[1] == 0

    @property
    def c(self) -> complex:
        if not self.is_quadratic_normal:
            raise ValueError("not of the form z**2 + c")
        return complex(self.coefficients[0])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.coefficients[-1], dtype=complex)
        for a in self.coefficients[-2::-1]:
            out = out * z + a
        return out

    def derivative(self) -> np.ndarray:
        """Ascending coefficients of ``f'``."""
        return self.coefficients[1:] * np.arange(1, self.coefficients.size)

    def critical_points(self) -> np.ndarray:
        return np.roots(self.derivative()[::-1]) if self.degree > 2 else \
            np.array([-self.coefficients[1] / (2 * self.coefficients[2])])

    @property
    def escape_radius(self) -> float:
        """Radius beyond which every orbit escapes to infinity."""
        a = np.abs(self.coefficients)
        lower = a[:-1].sum() / a[-1]
        return float(max(2.0, 2.0 * lower, (2.0 / a[-1]) ** (1.0 / (self.degree - 1)))) + 1.0

    def to_dict(self) -> dict:
        if self.is_quadratic_normal:
            return {"type": "quadratic", "c": [self.c.real, self.c.imag]}
        return {"coeffs": [[a.real, a.imag] for a in self.coefficients]}

    @classmethod
    def from_dict(cls, data: dict) -> "PolynomialMap":
        if data.get("type") == "quadratic":
            re, im = data["c"]
            return quadratic(complex(re, im))
        coeffs = [complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in data["coeffs"]]
        return cls(coeffs)


def quadratic(c) -> PolynomialMap:
    return PolynomialMap([complex(c), 0, 1])


def escape_times(f: PolynomialMap, z, n_max: int = DEFAULT_N_MAX, bailout: float = BAILOUT):
    """Iterate until ``|f^n(z)| > bailout``; returns ``(n, f^n(z), escaped)``."""
    w = np.array(z, dtype=complex, ndmin=1).copy()
    n = np.zeros(w.shape, dtype=int)
    escaped = np.abs(w) > bailout
    active = ~escaped
    R = f.escape_radius
    # orbits that pass R are sure to escape, so they are followed past n_max
    sure = np.abs(w) > R
    for step in range(n_max + 200):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        if step >= n_max:
            idx = idx[sure[idx]]
            if idx.size == 0:
                break
        w[idx] = f(w[idx])
        n[idx] += 1
        a = np.abs(w[idx])
        sure[idx] |= a > R
        done = a > bailout
        escaped[idx[done]] = True
        active[idx[done]] = False
    return n, w, escaped


def green_polynomial(f: PolynomialMap, z, n_max: int = DEFAULT_N_MAX, bailout: float = BAILOUT):
    """Escape-time Green function ``lim d^-n log|f^n(z)|`` with the Böttcher correction.

    Near infinity ``G(w) = log|w| + log|a_d|/(d - 1) + O(1/|w|)``; at the
    bailout radius the remainder is far below double precision once divided by
    ``d^n``.  Points that do not escape within ``n_max`` get 0.
    """
    scalar = np.ndim(z) == 0
    n, w, escaped = escape_times(f, z, n_max, bailout)
    d = f.degree
    shift = np.log(abs(f.leading)) / (d - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(escaped, (np.log(np.abs(w)) + shift) * float(d) ** (-n.astype(float)), 0.0)
    g = np.maximum(g, 0.0)
    return float(g[0]) if scalar else g


def critical_orbit_escape(f: PolynomialMap, n_max: int = DEFAULT_N_MAX):
    """First critical point whose orbit escapes, with its orbit prefix; ``None`` if all stay bounded."""
    R = f.escape_radius
    for cp in np.atleast_1d(f.critical_points()):
        w = complex(cp)
        orbit = [w]
        for _ in range(n_max):
            w = complex(f(w))
            orbit.append(w)
            if abs(w) > R:
                return complex(cp), orbit
    return None


def check_connected(f: PolynomialMap, n_max: int = DEFAULT_N_MAX) -> None:
    bad = critical_orbit_escape(f, n_max)
    if bad is not None:
        cp, orbit = bad
        shown = " -> ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in orbit[:6])
        raise DisconnectedJuliaSetError(
            f"critical point {cp} escapes after {len(orbit) - 1} steps ({shown} ...); "
            "the filled Julia set is disconnected")


@dataclass(frozen=True, eq=False)
class GreenEvaluator:
    """Green function of a shape with pole at infinity.

    ``source`` is an :class:`ExteriorMap` (``G = log|Phi^-1|``) or a
    :class:`PolynomialMap` (escape time).
    """

    source: object
    n_max: int = DEFAULT_N_MAX
    bailout: float = BAILOUT

    def __call__(self, z):
        if isinstance(self.source, PolynomialMap):
            return green_polynomial(self.source, z, self.n_max, self.bailout)
        scalar = np.ndim(z) == 0
        w = self.source.inverse(np.atleast_1d(np.asarray(z, dtype=complex)))
        g = np.maximum(np.log(np.abs(w)), 0.0)
        return float(g[0]) if scalar else g

    @property
    def robin_constant(self) -> float:
        if isinstance(self.source, PolynomialMap):
            return float(np.log(abs(self.source.leading))) / (self.source.degree - 1)
        return self.source.robin_constant


def metric_density(G: GreenEvaluator, z):
    """Conformal factor ``exp(-2 G(z))`` of the metric glued from shape and cap."""
    return np.exp(-2.0 * G(z))
