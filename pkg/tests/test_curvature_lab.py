import math

import numpy as np
import pytest

from capforge import fixtures
from capforge.cap import cap_boundary
from capforge.conformal import HarmonicSampler, harmonic_measure_mc
from capforge.curvature_lab import (
    DEFAULT_RADII,
    LensQuery,
    arc_length_inside,
    cone_deficit,
    curvature_limit_estimate,
    curvature_report,
    lens_arclength,
    lens_quotient,
    one_sided_quotient,
    surface_circle_circumference,
)
from capforge.errors import ChartError
from capforge.geometry import arclength_parametrize
from capforge.measure import BoundaryMeasure, triangle_measure, turning_measure, uniform_measure


@pytest.fixture(scope="module")
def doubled_disk():
    shape = fixtures.circle_polygon(2**16)
    m = uniform_measure(shape.length)
    return shape, m, cap_boundary(shape, m)


@pytest.fixture(scope="module")
def interval():
    shape = fixtures.interval_slit()
    m = fixtures.interval_harmonic_measure(2048)
    return shape, m, cap_boundary(shape, m)


# the lens formula


def test_lens_examples():
    assert lens_quotient(LensQuery(1.0, 0.01)) == pytest.approx(1.0, abs=1e-3)
    assert lens_quotient(LensQuery(2.0, 0.01)) == pytest.approx(0.5, abs=1e-3)
    a = lens_arclength(LensQuery(1.0, 1.0 - 1e-9))
    assert 0 < a < math.pi


def test_lens_domain():
    with pytest.raises(ValueError):
        LensQuery(1.0, 1.0)
    with pytest.raises(ValueError):
        LensQuery(-1.0, 0.1)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 5.0])
def test_lens_limit(R):
    assert lens_quotient(LensQuery(R, 1e-3 * R)) == pytest.approx(1 / R, rel=1e-3)


def test_lens_matches_polygon_arc():
    # the formula against an exact arc measurement on a fine circle polygon
    disk = fixtures.circle_polygon(2**16, radius=1.0)
    r = 0.05
    assert arc_length_inside(disk, 1.0 + 0j, r) == pytest.approx(lens_arclength(LensQuery(1.0, r)), rel=1e-6)


# one-sided quotients and flat points


@pytest.mark.parametrize("R", [1.0, 2.0])
def test_one_sided_quotient_circle(R):
    disk = fixtures.circle_polygon(2**16, radius=R)
    assert one_sided_quotient(disk, complex(R), 1e-3) == pytest.approx(1 / R, rel=1e-2)


def test_flat_interior_point():
    sq = fixtures.unit_square()
    assert arc_length_inside(sq, 0.5 + 0.5j, 0.1) == pytest.approx(2 * math.pi * 0.1, abs=1e-15)
    assert arc_length_inside(sq, 5 + 5j, 0.1) == 0.0


def test_chart_error_for_large_circle():
    # radius 0.6 around the centre of the unit square crosses all four sides
    with pytest.raises(ChartError):
        arc_length_inside(fixtures.unit_square(), 0.5 + 0.5j, 0.6)


def test_open_cap_has_no_surface():
    sq = fixtures.unit_square()
    m = BoundaryMeasure([[0.5, 0.4], [1.0, 0.3], [3.0, 0.3]], length=4.0)
    cap = cap_boundary(sq, m)
    with pytest.raises(ChartError):
        surface_circle_circumference(sq, m, cap, 0.5, 0.01)


# curvature estimates


def test_doubled_disk(doubled_disk):
    shape, m, cap = doubled_disk
    for t in (0.3, 2.0, 5.0):
        q = (2 * math.pi * 0.01 - surface_circle_circumference(shape, m, cap, t, 0.01)) / 1e-4
        assert q == pytest.approx(2.0, rel=1e-2)
        est = curvature_limit_estimate(shape, m, cap, t)
        assert est.value == pytest.approx(2.0, rel=0.05)
        assert est.reliable


def test_interval_arcsine_density(interval):
    shape, m, cap = interval
    for t in (1.0, 2.0, 2.7):
        x = 2 - t
        # arcsine density on both sides: 2 * 4 pi / (2 pi sqrt(4 - x**2))
        ref = 4 / math.sqrt(4 - x * x)
        assert curvature_limit_estimate(shape, m, cap, t).value == pytest.approx(ref, rel=1e-3)


def test_ellipse_harmonic_density():
    shape = fixtures.ellipse_polygon(2**16)
    m = fixtures.ellipse_harmonic_measure(shape)
    cap = cap_boundary(shape, m)
    rows = curvature_report(shape, m, cap, [0.2, 2.5])
    for row in rows:
        assert row["relative_error"] < 0.05


def test_ellipse_measure_matches_monte_carlo():
    # the exact ellipse measure against sampled bin masses
    shape = fixtures.ellipse_polygon(4096)
    exact = fixtures.ellipse_harmonic_measure(shape)
    N = 40_000
    hits = harmonic_measure_mc(shape, HarmonicSampler(walkers=N, seed=4))
    bins = 8
    edges = np.linspace(0, shape.length, bins + 1)
    mc = np.histogram(hits.t, edges)[0] / N
    param = arclength_parametrize(shape)
    cum = np.concatenate([[0.0], np.cumsum(exact.densities[:, 2] * np.diff(exact.densities[:, :2]).ravel())])
    ref = np.diff(np.interp(edges, np.append(param.edge_starts_t, shape.length), cum))
    sigma = np.sqrt(ref * (1 - ref) / N)
    assert np.all(np.abs(mc - ref) < 5 * sigma)


def test_vanishing_density_is_flat():
    sq = fixtures.unit_square()
    m = turning_measure(sq)
    cap = cap_boundary(sq, m)
    assert abs(curvature_limit_estimate(sq, m, cap, 0.5).value) < 1e-2


@pytest.mark.parametrize("t,mass", [(1.0, 0.25), (2.0, 0.25)])
def test_cone_point(t, mass):
    sq = fixtures.unit_square()
    m = turning_measure(sq)
    cap = cap_boundary(sq, m)
    for r in (1e-2, 1e-3):
        assert cone_deficit(sq, m, cap, t, r) == pytest.approx(4 * math.pi * mass, abs=1e-6)


def test_cone_point_triangle():
    tri = fixtures.equilateral_triangle()
    m = triangle_measure(tri)
    cap = cap_boundary(tri, m)
    assert cap.closes
    assert cone_deficit(tri, m, cap, 1.0, 1e-3) == pytest.approx(4 * math.pi / 3, abs=1e-6)


def test_report_rows(interval):
    shape, m, cap = interval
    rows = curvature_report(shape, m, cap, [2.0], radii=DEFAULT_RADII[:3])
    assert set(rows[0]) == {"t", "estimate", "reference", "relative_error", "reliable"}
    assert rows[0]["reference"] == pytest.approx(2.0, rel=1e-6)
