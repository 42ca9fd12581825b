import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capforge import fixtures
from capforge.errors import MeasureError
from capforge.geometry import Polyline
from oracles import random_measure

from capforge.measure import (
    BoundaryMeasure,
    make_curvature,
    measure_from_samples,
    triangle_measure,
    turning_measure,
    uniform_measure,
    validate,
)


def test_uniform_curvature():
    k = make_curvature(uniform_measure(3.0), 3.0)
    t = np.linspace(0, 3, 7)
    np.testing.assert_allclose(k(t), 4 * np.pi * t / 3, atol=1e-13)
    assert k(3.0) == pytest.approx(4 * np.pi, abs=1e-12)
    assert k(0.0) == 0.0


def test_equilateral_jumps():
    tri = fixtures.equilateral_triangle()
    m = triangle_measure(tri)
    np.testing.assert_allclose(m.atom_masses, [1 / 3] * 3, atol=1e-15)
    k = make_curvature(m, tri.length)
    # jumps at t = 1 and t = 2; the vertex at t = 0 counts at t = L
    np.testing.assert_allclose(k([0.999, 1.0, 1.999, 2.0, 2.999, 3.0]),
                               [0, 4 * np.pi / 3, 4 * np.pi / 3, 8 * np.pi / 3, 8 * np.pi / 3, 4 * np.pi],
                               atol=1e-12)


def test_single_heavy_atom_rejected():
    v = validate(BoundaryMeasure([[0.5, 1.0]], length=1.0))
    assert not v.ok and "oversized-atom" in v.kinds
    with pytest.raises(MeasureError):
        make_curvature(BoundaryMeasure([[0.5, 1.0]], length=1.0))


def test_validate_examples():
    assert "oversized-atom" in validate(BoundaryMeasure([[0, 0.5], [1, 0.5]], length=2)).kinds
    assert validate(BoundaryMeasure([[0, 1 / 3], [1, 1 / 3], [2, 1 / 3]], length=3)).ok
    assert validate(BoundaryMeasure([[0, 0.3], [1, 0.3], [2, 0.3]], length=3)).kinds == {"total-mass"}
    assert "negativity" in validate(BoundaryMeasure([[0, -0.1], [1, 0.6], [2, 0.5]], length=3)).kinds


def test_right_isosceles_masses():
    m = triangle_measure(Polyline([0, 1, 1j]))
    # right angle at t = 0, the two pi/4 corners at t = 1 and t = 1 + sqrt(2)
    np.testing.assert_allclose(m.atom_positions, [0, 1, 1 + math.sqrt(2)])
    np.testing.assert_allclose(m.atom_masses, [1 / 4, 3 / 8, 3 / 8], atol=1e-15)
    assert math.fsum(m.atom_masses) == pytest.approx(1.0, abs=1e-15)


def test_thin_triangle_near_invalid():
    m = triangle_measure(Polyline([0, 1, 0.5 + 0.005j]))
    v = validate(m)
    assert v.ok and "near-invalid" in {w[0] for w in v.warnings}


def test_degenerate_triangle_rejected():
    with pytest.raises(MeasureError):
        triangle_measure(Polyline([0, 1], closed=True))


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_triangle_masses_sum_to_one(seed):
    m = triangle_measure(fixtures.random_triangle(np.random.default_rng(seed)))
    assert math.fsum(m.atom_masses) == pytest.approx(1.0, abs=1e-14)
    assert np.all(m.atom_masses < 0.5)


@given(st.integers(0, 2**31 - 1), st.integers(0, 6), st.integers(0, 4), st.floats(0.5, 20))
@settings(max_examples=100, deadline=None)
def test_gauss_bonnet_and_monotone(seed, n_atoms, n_dens, L):
    if n_atoms + n_dens < 3:
        n_atoms = 3
    rng = np.random.default_rng(seed)
    m = random_measure(rng, L, n_atoms, n_dens)
    assert validate(m).ok
    k = make_curvature(m, L)
    assert k(L) == pytest.approx(4 * np.pi, abs=1e-9)
    t = np.sort(rng.uniform(0, L, 200))
    assert np.all(np.diff(k(t)) >= -1e-12)


def test_atom_at_zero_counts_at_closing_point():
    m = BoundaryMeasure([[0.0, 0.25], [1.0, 0.25], [2.0, 0.25], [3.0, 0.25]], length=4.0)
    k = make_curvature(m, 4.0)
    assert k(0.0) == 0.0
    assert k(3.5) == pytest.approx(3 * np.pi)
    assert k(4.0) == pytest.approx(4 * np.pi)


def test_turning_measure_of_square():
    m = turning_measure(fixtures.unit_square())
    np.testing.assert_allclose(np.sort(m.atom_positions), [0, 1, 2, 3])
    np.testing.assert_allclose(m.atom_masses, 0.25)


def test_measure_json_round_trip():
    m = BoundaryMeasure([[0.5, 0.5 - 1e-3]], [[1.0, 2.0, 0.5 + 1e-3]], 3.0)
    back = BoundaryMeasure.from_json(m.to_json())
    np.testing.assert_array_equal(back.atoms, m.atoms)
    np.testing.assert_array_equal(back.densities, m.densities)
    assert back.length == 3.0


def test_samples_single_point():
    sq = fixtures.unit_square()
    m = measure_from_samples(np.full(10, 0.5 + 0j), sq)
    assert m.atoms.shape == (1, 2)
    assert "oversized-atom" in validate(m).kinds


def test_samples_empty():
    with pytest.raises(MeasureError):
        measure_from_samples([], fixtures.unit_square())


def test_samples_rejects_far_hits():
    m = measure_from_samples([0.5 + 0j, 0.5 + 0.5j, 1 + 0.3j], fixtures.unit_square())
    assert m.rejected_samples == 1
    assert m.total_mass == pytest.approx(1.0)


def test_binned_circle_samples():
    # binomial bound: 5 sigma of sqrt(p (1 - p) / N)
    rng = np.random.default_rng(7)
    N = 100_000
    circle = fixtures.circle_polygon(4096)
    hits = np.exp(2j * np.pi * rng.random(N))
    m = measure_from_samples(hits, circle, bins=4)
    sigma = math.sqrt(0.25 * 0.75 / N)
    np.testing.assert_allclose(m.atom_masses, 0.25, atol=5 * sigma)
    d = measure_from_samples(hits, circle, bins=4, binned_as="density")
    assert d.total_mass == pytest.approx(1.0)
