import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capforge import fixtures
from capforge.errors import BoundaryPointError, GeometryError, OrientationError
from capforge.geometry import (
    Polyline,
    arclength_parametrize,
    contains_points,
    convex_hull,
    convex_hull_points,
    crossing_pairs,
    ensure_ccw,
    hausdorff_distance,
    is_simple,
    point_segment_distance,
    polyline_hausdorff,
    reflect_across_line,
    regular_polygon,
    turning_angles,
    winding_number,
    winding_numbers,
)


def brute_force_simple(p: Polyline) -> bool:
    """O(n^2) segment test with exact orientation predicates."""
    a, b = p.starts, p.ends
    m = a.size

    def orient(p0, p1, q):
        return np.sign(np.imag(np.conj(p1 - p0) * (q - p0)))

    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (p.closed and i == 0 and j == m - 1):
                continue
            o1, o2 = orient(a[i], b[i], a[j]), orient(a[i], b[i], b[j])
            o3, o4 = orient(a[j], b[j], a[i]), orient(a[j], b[j], b[i])
            if o1 * o2 <= 0 and o3 * o4 <= 0:
                return False
    return True


# arclength


def test_unit_square_arclength():
    s = arclength_parametrize(fixtures.unit_square())
    assert s.length == 4.0
    assert s(0.5) == pytest.approx(0.5 + 0j)
    assert s(0.0) == 0j


def test_open_segment():
    s = arclength_parametrize(Polyline([0, 3], closed=False))
    assert s.length == 3.0
    np.testing.assert_allclose(s.directions, [1 + 0j])


def test_equilateral_cumulative_lengths():
    s = arclength_parametrize(fixtures.equilateral_triangle())
    np.testing.assert_allclose(s.cumulative_lengths, [1, 2, 3], atol=1e-15)
    np.testing.assert_allclose(np.abs(s.directions), 1.0, atol=1e-12)


def test_zero_length_edge_rejected():
    with pytest.raises(GeometryError):
        Polyline([0, 1, 1, 1j])


@given(st.integers(3, 40), st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_length_is_sum_of_edges(n, seed):
    p = fixtures.random_star_polygon(np.random.default_rng(seed), n)
    s = arclength_parametrize(p)
    assert s.length == math.fsum(np.abs(np.diff(np.append(p.points, p.points[0]))))
    t = np.sort(np.random.default_rng(seed).uniform(0, s.length, 20))
    # unit speed: chords never exceed the arclength between them
    assert np.all(np.abs(np.diff(s(t))) <= np.diff(t) + 1e-12)


# turning angles


def test_square_turning():
    td = turning_angles(fixtures.unit_square())
    np.testing.assert_allclose(td.jumps, [np.pi / 2] * 4)
    assert td.alpha[0] == 0.0


def test_triangle_turning():
    td = turning_angles(fixtures.equilateral_triangle())
    np.testing.assert_allclose(td.jumps, [2 * np.pi / 3] * 3)


def test_l_hexagon_turning():
    td = turning_angles(fixtures.l_hexagon())
    assert sorted(np.round(td.jumps / (np.pi / 2)).astype(int).tolist()) == [-1, 1, 1, 1, 1, 1]
    assert td.total_turning == pytest.approx(2 * np.pi, abs=1e-9)


def test_clockwise_rejected():
    with pytest.raises(OrientationError):
        turning_angles(fixtures.unit_square().reversed())


@given(st.integers(3, 60), st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_turning_sums_to_two_pi(n, seed):
    p = fixtures.random_star_polygon(np.random.default_rng(seed), n)
    assert turning_angles(p).total_turning == pytest.approx(2 * np.pi, abs=1e-9)


# winding numbers


def test_winding_examples():
    sq = fixtures.unit_square()
    assert winding_number(sq, 0.5 + 0.5j) == 1
    assert winding_number(sq, 5 + 5j) == 0
    assert winding_number(sq.reversed(), 0.5 + 0.5j) == -1


def test_winding_on_boundary_raises():
    with pytest.raises(BoundaryPointError):
        winding_number(fixtures.unit_square(), 0.5 + 0j)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 2 * np.pi), st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_winding_rigid_motion_invariant(dx, dy, phi, seed):
    rng = np.random.default_rng(seed)
    p = fixtures.random_star_polygon(rng, 12)
    q = rng.uniform(-1.5, 1.5, 30) + 1j * rng.uniform(-1.5, 1.5, 30)
    q = q[np.abs(q) > 0]
    try:
        w0 = winding_numbers(p, q)
    except BoundaryPointError:
        return
    move = lambda z: np.exp(1j * phi) * z + complex(dx, dy)  # noqa: E731
    np.testing.assert_array_equal(winding_numbers(p.transformed(move), move(q)), w0)


def test_contains_matches_winding():
    p = fixtures.l_hexagon()
    q = np.random.default_rng(3).uniform(-0.5, 2.5, 200) + 1j * np.random.default_rng(4).uniform(-0.5, 2.5, 200)
    np.testing.assert_array_equal(contains_points(p, q, tol=0.0), winding_numbers(p, q) != 0)


# simplicity


def test_convex_quad_simple():
    assert is_simple(Polyline([0, 2, 2 + 1j, 0.5j]))


def test_bowtie_crossing():
    v = is_simple(Polyline([0, 1 + 1j, 1, 1j]))
    assert not v
    assert v.pair == (0, 2)
    assert v.point == pytest.approx(0.5 + 0.5j)


def test_thousand_gon_simple_matches_brute_force():
    p = fixtures.circle_polygon(1000)
    assert is_simple(p)
    assert brute_force_simple(p)


@given(st.integers(4, 40), st.integers(0, 2**31 - 1), st.booleans())
@settings(max_examples=60, deadline=None)
def test_is_simple_agrees_with_brute_force(n, seed, scramble):
    rng = np.random.default_rng(seed)
    p = fixtures.random_star_polygon(rng, n)
    if scramble:
        z = p.points.copy()
        i, j = rng.choice(n, 2, replace=False)
        z[[i, j]] = z[[j, i]]
        p = Polyline(z)
    assert bool(is_simple(p)) == brute_force_simple(p)


@pytest.mark.parametrize("n", [65, 400, 2000])
def test_sweep_agrees_with_all_pairs(n):
    rng = np.random.default_rng(n)
    p = fixtures.random_star_polygon(rng, n, jitter=0.9)
    z = p.points.copy()
    z[[3, n // 2]] = z[[n // 2, 3]]
    bad = Polyline(z)
    for q in (p, bad):
        assert bool(crossing_pairs(q, method="sweep")) == bool(crossing_pairs(q, method="all"))
    assert is_simple(p) and not is_simple(bad)


def test_fixtures_simple():
    for p in (fixtures.l_hexagon(), fixtures.notched_square(), fixtures.ellipse_polygon(500),
              fixtures.naive_spiral_fixture().shape, fixtures.harmonic_spiral_fixture().shape):
        assert is_simple(p)


# convex hull


def test_hull_square_with_interior_point():
    h = convex_hull([0, 1, 1 + 1j, 1j, 0.5 + 0.5j])
    assert h.points.size == 4
    assert h.signed_area == pytest.approx(1.0)


def test_hull_circle_points_ccw():
    z = np.exp(2j * np.pi * np.arange(12) / 12)
    h = convex_hull(z[::-1])
    assert h.points.size == 12
    assert h.signed_area > 0


def test_hull_collinear_flagged():
    h = convex_hull([0, 1, 2, 3])
    assert h.is_degenerate
    assert h.points.size == 2


def test_hull_coincident_rejected():
    with pytest.raises(GeometryError):
        convex_hull([1 + 1j, 1 + 1j, 1 + 1j])


def test_hull_drops_collinear_points():
    assert convex_hull_points([0, 0.5, 1, 1 + 1j, 1j]).size == 4


@given(st.integers(3, 200), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_hull_contains_inputs(n, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    h = convex_hull(z)
    assert np.all(contains_points(h, z, tol=1e-9))


# misc


def test_point_segment_distance():
    d, u = point_segment_distance(np.array([0.5 + 1j, 2 + 0j]), 0j, 1 + 0j)
    np.testing.assert_allclose(d, [1.0, 1.0])
    np.testing.assert_allclose(u, [0.5, 1.0])


def test_reflection_is_involution():
    z = np.array([1 + 2j, -3 + 0.5j])
    r = reflect_across_line(z, 1j, 1 + 1j)
    np.testing.assert_allclose(reflect_across_line(r, 1j, 1 + 1j), z)
    # points on the line are fixed
    assert reflect_across_line(1j + 2 * (1 + 1j), 1j, 1 + 1j) == pytest.approx(1j + 2 * (1 + 1j))


def test_ensure_ccw():
    sq = fixtures.unit_square()
    assert ensure_ccw(sq.reversed()).signed_area > 0


def test_hausdorff():
    assert hausdorff_distance([0, 1], [0, 1, 1 + 0.5j]) == pytest.approx(0.5)
    a = regular_polygon(4)
    assert polyline_hausdorff(a, a) == pytest.approx(0.0, abs=1e-12)
    b = regular_polygon(4, phase=np.pi / 4)
    # corners of one square sit 1 - 1/sqrt(2) outside the other
    assert polyline_hausdorff(a, b) == pytest.approx(1 - 1 / math.sqrt(2), rel=1e-6)
