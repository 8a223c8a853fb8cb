"""Potential definitions, closed-form levels, classical Hamiltonian."""

import math

import numpy as np
import pytest

import phasegrid as pg
from phasegrid.errors import NotAvailableError, SingularPointError


def test_harmonic_evaluate_quadratic():
    spec = pg.harmonic(mass=2.0, omega=3.0)
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(pg.evaluate(spec, x), 0.5 * 2.0 * 9.0 * x**2,
                               rtol=0, atol=0)
    assert pg.evaluate(spec, 0.0) == 0.0


def test_morse_shape():
    spec = pg.morse(depth=12.0, beta=0.5, mass=6.0)
    assert pg.evaluate(spec, 0.0) == 0.0
    # dissociation plateau on the stretched side, steep wall on the other
    assert abs(pg.evaluate(spec, 40.0) - 12.0) < 1e-6
    assert pg.evaluate(spec, -2.0) > 12.0


def test_coulomb1d_singular_at_origin():
    spec = pg.coulomb1d(charge=1.0)
    assert pg.evaluate(spec, 2.0) == -0.5
    with pytest.raises(SingularPointError):
        pg.evaluate(spec, np.array([0.5, 0.0]))


def test_tabulated_matches_interp():
    xs = np.linspace(-1, 1, 21)
    vs = np.cos(xs)
    spec = pg.tabulated(xs, vs, mass=1.0)
    probe = np.linspace(-0.95, 0.95, 13)
    np.testing.assert_allclose(pg.evaluate(spec, probe),
                               np.interp(probe, xs, vs))
    with pytest.raises(ValueError):
        pg.evaluate(spec, 1.5)


def test_triangle_alpha_threefold():
    # alpha has period 2*pi/3 and ranges over [0.05, 0.05 + 0.25]
    assert pg.triangle_alpha(0.0) == pytest.approx(0.05)
    assert pg.triangle_alpha(np.pi / 3) == pytest.approx(0.3)
    theta = np.linspace(0, 2 * np.pi, 97)
    np.testing.assert_allclose(pg.triangle_alpha(theta),
                               pg.triangle_alpha(theta + 2 * np.pi / 3),
                               atol=1e-12)


def test_triangle2d_polar_form():
    spec = pg.triangle2d()
    pts = np.array([[0.5, 0.0], [0.0, 1.2], [-0.7, 0.3]])
    r2 = np.sum(pts**2, axis=1)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    expect = (1.0 - np.exp(-pg.triangle_alpha(theta) * r2)) ** 2
    np.testing.assert_allclose(pg.evaluate(spec, pts), expect)
    assert pg.evaluate(spec, (0.0, 0.0)) == 0.0
    with pytest.raises(ValueError):
        pg.evaluate(spec, np.array([1.0, 2.0, 3.0]))


def test_spec_validation():
    with pytest.raises(ValueError):
        pg.PotentialSpec(kind="nonsense", params={}, hbar=1.0)
    with pytest.raises(ValueError):
        pg.harmonic(mass=-1.0)
    with pytest.raises(ValueError):
        pg.morse(hbar=0.0)
    with pytest.raises(ValueError):
        pg.tabulated([0.0, 0.0], [1.0, 2.0])  # x not increasing


def test_classical_hamiltonian_1d_and_2d():
    spec = pg.harmonic()
    pt = pg.PhasePoint(x=(1.5,), p=(2.0,))
    assert pg.classical_hamiltonian(spec, pt) == pytest.approx(
        2.0**2 / 2.0 + 0.5 * 1.5**2)
    tri = pg.triangle2d(mass=96.0)
    pt2 = pg.PhasePoint(x=(0.3, -0.4), p=(1.0, 2.0))
    expect = (1.0 + 4.0) / (2 * 96.0) + pg.evaluate(tri, (0.3, -0.4))
    assert pg.classical_hamiltonian(tri, pt2) == pytest.approx(expect)
    with pytest.raises(ValueError):
        pg.classical_hamiltonian(tri, pt)


def test_harmonic_levels_need_truncation():
    spec = pg.harmonic(omega=2.0, hbar=0.5)
    np.testing.assert_allclose(pg.analytic_levels(spec, n_max=3),
                               [0.5, 1.5, 2.5, 3.5])
    with pytest.raises(ValueError):
        pg.analytic_levels(spec)


def test_morse_levels_against_direct_formula():
    spec = pg.morse(depth=12.0, beta=0.5, mass=6.0, hbar=1.0)
    w0 = spec.params["beta"] * math.sqrt(2 * 12.0 / 6.0)
    levels = pg.analytic_levels(spec)
    # independent evaluation of the anharmonic ladder
    n = np.arange(levels.size)
    y = w0 * (n + 0.5)
    np.testing.assert_allclose(levels, y - y**2 / 48.0, rtol=1e-14)
    # the ladder must stop while spacings are still positive
    assert np.all(np.diff(levels) > 0)
    assert levels.size == 24
    assert levels[-1] < 12.0
    # one more quantum would fold the ladder back down
    y_next = w0 * (levels.size + 0.5)
    assert y_next - y_next**2 / 48.0 <= levels[-1]


def test_morse_level_count_scales_with_hbar():
    # halving hbar doubles the number of bound states (up to rounding)
    n1 = pg.analytic_levels(pg.morse(hbar=1.0)).size
    n2 = pg.analytic_levels(pg.morse(hbar=0.5)).size
    assert n2 == pytest.approx(2 * n1, abs=1)


def test_levels_unavailable_for_triangle():
    with pytest.raises(NotAvailableError):
        pg.analytic_levels(pg.triangle2d())
