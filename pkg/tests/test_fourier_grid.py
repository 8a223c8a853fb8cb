"""Grids, sinc-DVR matrices, and the dense/matrix-free eigensolvers."""

import math

import numpy as np
import pytest

import phasegrid as pg
from phasegrid.fourier_grid import kinetic_matrix_fft_oracle


def test_grid_geometry():
    grid = pg.Grid1D(-5.0, 10.0, 20)
    assert grid.dx == pytest.approx(0.5)
    assert grid.points[0] == pytest.approx(-5.0)
    assert grid.points[-1] == pytest.approx(4.5)
    # momentum span times box length is N Planck cells
    assert 2 * grid.p_max(hbar=1.0) * grid.L == pytest.approx(
        2 * math.pi * grid.N)
    with pytest.raises(ValueError):
        pg.Grid1D(0.0, 1.0, 7)  # odd N unsupported
    with pytest.raises(ValueError):
        pg.Grid1D(0.0, -1.0, 8)


def test_theta_is_cardinal_on_grid():
    grid = pg.Grid1D(-3.0, 6.0, 8)
    x = grid.points
    peak = math.sqrt(grid.N / grid.L)
    for n in (0, 3, 7):
        vals = pg.theta_eval(grid, n, x)
        expect = np.zeros(8)
        expect[n] = peak
        np.testing.assert_allclose(vals, expect, atol=1e-12)
    # periodic: shifting the argument by L reproduces the function
    probe = np.linspace(-3.0, 3.0, 40, endpoint=False)
    np.testing.assert_allclose(pg.theta_eval(grid, 2, probe),
                               pg.theta_eval(grid, 2, probe + grid.L),
                               atol=1e-12)


@pytest.mark.parametrize("n", [8, 16, 30])
def test_kinetic_closed_form_matches_fft_oracle(n):
    grid = pg.Grid1D(-4.0, 8.0, n)
    t = pg.kinetic_matrix(grid, mass=1.7, hbar=0.9)
    t_ref = kinetic_matrix_fft_oracle(grid, mass=1.7, hbar=0.9)
    assert np.max(np.abs(t - t_ref)) < 1e-12 * np.max(np.abs(t_ref))
    # hermitian with constant diagonal
    np.testing.assert_allclose(t, t.T, atol=0)
    assert np.ptp(np.diag(t)) < 1e-12


def test_kinetic_spectrum_is_quadratic_ladder():
    grid = pg.Grid1D(-4.0, 8.0, 16)
    t = pg.kinetic_matrix(grid, mass=1.0, hbar=1.0)
    vals = np.sort(np.linalg.eigvalsh(t))
    j = np.concatenate([[0], np.repeat(np.arange(1, 8), 2), [8]])
    expect = np.sort(0.5 * (2 * np.pi * j / grid.L) ** 2)
    np.testing.assert_allclose(vals, expect, atol=1e-10)


def test_harmonic_square_grid_balances_the_box():
    for n in (16, 64):
        grid = pg.harmonic_square_grid(n, mass=2.0, omega=0.5, hbar=1.5)
        # position span equals momentum span over m*omega and the grid is
        # symmetric about the origin up to half a spacing
        assert grid.L == pytest.approx(2 * grid.p_max(1.5) / (2.0 * 0.5))
        assert abs(grid.points[0] + grid.points[-1]) < 1e-12
        assert grid.N == n


def test_fgh_harmonic_levels():
    grid = pg.harmonic_square_grid(64)
    out = pg.solve_fgh(grid, pg.harmonic())
    np.testing.assert_allclose(out.energies[:20], np.arange(20) + 0.5,
                               atol=1e-9)
    assert out.basis_label == "fgh"


def test_fgh_error_drops_with_grid_size():
    spec = pg.harmonic()
    errs = []
    for n in (16, 36, 64):
        out = pg.solve_fgh(pg.harmonic_square_grid(n), spec)
        errs.append(abs(out.energies[7] - 7.5))
    assert errs[0] > errs[1] > errs[2]


def test_grid2d_flat_ordering():
    gx = pg.Grid1D(-1.0, 2.0, 4)
    gy = pg.Grid1D(-2.0, 4.0, 6)
    grid = pg.Grid2D(gx, gy)
    assert grid.size == 24
    pts = grid.points
    # x index runs fastest
    np.testing.assert_allclose(pts[:4, 0], gx.points)
    np.testing.assert_allclose(pts[:4, 1], gy.points[0])
    assert grid.flat_index(2, 3) == 3 * 4 + 2
    np.testing.assert_allclose(pts[grid.flat_index(2, 3)],
                               [gx.points[2], gy.points[3]])


def test_operator2d_matches_dense():
    gx = pg.Grid1D(-3.0, 6.0, 8)
    grid = pg.Grid2D(gx, gx)
    spec = pg.triangle2d(mass=10.0)
    h_dense = pg.hamiltonian_fgh(grid, spec, assembly="dense")
    h_op = pg.hamiltonian_fgh(grid, spec, assembly="matfree")
    np.testing.assert_allclose(h_op.to_dense(), h_dense, atol=1e-12)
    rng = np.random.default_rng(5)
    v = rng.standard_normal(grid.size)
    np.testing.assert_allclose(h_op.matvec(v), h_dense @ v, atol=1e-10)


def test_matfree_eigsh_matches_dense():
    gx = pg.Grid1D(-4.0, 8.0, 10)
    grid = pg.Grid2D(gx, gx)
    spec = pg.triangle2d(mass=20.0)
    dense_vals = np.linalg.eigvalsh(
        pg.hamiltonian_fgh(grid, spec, assembly="dense"))
    h_op = pg.hamiltonian_fgh(grid, spec, assembly="matfree")
    from scipy.sparse.linalg import LinearOperator, eigsh

    op = LinearOperator(h_op.shape, matvec=h_op.matvec, dtype=float)
    vals = np.sort(eigsh(op, k=6, which="SA")[0])
    np.testing.assert_allclose(vals, dense_vals[:6], atol=1e-8)


def test_large_grid_uses_lanczos_and_needs_n_states():
    gx = pg.Grid1D(-8.0, 16.0, 72)
    grid = pg.Grid2D(gx, gx)  # 5184 points, above the dense limit
    spec = pg.triangle2d()
    with pytest.raises(ValueError):
        pg.solve_fgh(grid, spec)
    out = pg.solve_fgh(grid, spec, n_states=3)
    assert out.energies.size == 3
    assert np.all(np.diff(out.energies) >= -1e-12)


def test_fgh_2d_isotropic_harmonic_degeneracy():
    # separable quadratic well: levels n+1 with degeneracy n+1, assembled
    # by hand from the 1-d blocks as a cross-check on the kron convention
    gx = pg.harmonic_square_grid(16)
    spec1 = pg.harmonic()
    t = pg.kinetic_matrix(gx, 1.0)
    v1 = np.diag(pg.evaluate(spec1, gx.points))
    eye = np.eye(16)
    h = np.kron(eye, t + v1) + np.kron(t + v1, eye)
    vals = np.sort(np.linalg.eigvalsh(h))
    np.testing.assert_allclose(vals[:6], [1, 2, 2, 3, 3, 3], atol=1e-5)
