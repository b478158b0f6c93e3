import math

import numpy as np
import pytest

from helmgreen import dispersion as dsp
from helmgreen import helmholtz as hh
from helmgreen.errors import ConfigError, DomainError, PeriodicityError


def slab_model():
    density = dsp.OscillatorDensity(lorentz=((1.0, 2.0, 0.2),))
    return dsp.PermittivityModel(layers=((0.25, 0.75, density),))


def line_slab_model():
    density = dsp.OscillatorDensity(lines=((4.0, 1.0),), gap_nu0=3.5)
    return dsp.PermittivityModel(layers=((0.25, 0.75, density),))


# ---------------------------------------------------------------------------
# grid


def test_grid_spacing_dirichlet():
    g = hh.Grid1D(L=1.0, N=9)
    assert g.h == pytest.approx(0.1)
    assert g.points[0] == pytest.approx(0.1)
    assert g.points[-1] == pytest.approx(0.9)


def test_grid_spacing_bloch():
    g = hh.Grid1D(L=1.0, N=10, boundary="bloch")
    assert g.h == pytest.approx(0.1)
    assert g.points[0] == 0.0


def test_grid_validation():
    with pytest.raises(ConfigError):
        hh.Grid1D(L=1.0, N=4)
    with pytest.raises(ConfigError):
        hh.Grid1D(L=-1.0, N=16)
    with pytest.raises(ConfigError):
        hh.Grid1D(L=1.0, N=16, boundary="open")


# ---------------------------------------------------------------------------
# assembly and solves


def test_dispersive_diagonal_values():
    m = slab_model()
    g = hh.Grid1D(L=1.0, N=16)
    z = 1j
    op = hh.assemble(g, m, "dispersive", z)
    eps = hh.permittivity_profile(m, g.points, z)
    expect = z * z * eps - 2.0 / g.h**2
    assert np.allclose(op.diag, expect)
    assert np.allclose(op.offdiag, 1.0 / g.h**2)


def test_solve_matches_dense_oracle():
    m = slab_model()
    g = hh.Grid1D(L=1.0, N=48)
    op = hh.assemble(g, m, "dispersive", 0.8 + 0.6j)
    rng = np.random.default_rng(5)
    rhs = rng.standard_normal(48) + 1j * rng.standard_normal(48)
    x = op.solve(rhs)
    oracle = np.linalg.solve(op.dense(), rhs)
    assert np.max(np.abs(x - oracle)) < 1e-10
    assert op.residual(x, rhs) < 1e-12


def test_bloch_solve_matches_dense_oracle():
    m = slab_model()
    k = 1.0 + 0.2j
    g = hh.Grid1D(L=1.0, N=32, boundary="bloch", bloch_k=k)
    op = hh.assemble(g, m, "bloch", 2.0j)
    assert op.corner_lo == pytest.approx(np.exp(1j * k * 1.0) / g.h**2)
    rng = np.random.default_rng(6)
    rhs = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    x = op.solve(rhs)
    oracle = np.linalg.solve(op.dense(), rhs)
    assert np.max(np.abs(x - oracle)) < 1e-10


def test_solve_adjoint():
    m = slab_model()
    g = hh.Grid1D(L=1.0, N=24)
    op = hh.assemble(g, m, "dispersive", 0.5 + 1.0j)
    rng = np.random.default_rng(8)
    rhs = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    x = op.solve_adjoint(rhs)
    oracle = np.linalg.solve(op.dense().conj().T, rhs)
    assert np.max(np.abs(x - oracle)) < 1e-10


def test_two_freq_diagonal():
    m = slab_model()
    g = hh.Grid1D(L=1.0, N=16)
    z, xi = 1.0 + 1.0j, 0.5 + 0.3j
    op = hh.assemble(g, m, "two_freq", z, xi=xi)
    eps_xi = hh.permittivity_profile(m, g.points, xi)
    expect = z * z + z * xi * (eps_xi - 1.0) - 2.0 / g.h**2
    assert np.allclose(op.diag, expect)


def test_nondispersive_diagonal_real_constant():
    m = line_slab_model()
    g = hh.Grid1D(L=1.0, N=16)
    op = hh.assemble(g, m, "nondispersive", 1.0 + 0.5j, omega0=1.0)
    inside = (g.points >= 0.25) & (g.points <= 0.75)
    eps_in = 1.0 + 2.0 / (16.0 - 1.0)
    z2 = (1.0 + 0.5j) ** 2
    assert np.allclose(op.diag[inside], z2 * eps_in - 2.0 / g.h**2)
    assert np.allclose(op.diag[~inside], z2 * 1.0 - 2.0 / g.h**2)


# ---------------------------------------------------------------------------
# domain guards


def test_real_axis_undamped_rejected():
    g = hh.Grid1D(L=1.0, N=16)
    with pytest.raises(DomainError):
        hh.assemble(g, line_slab_model(), "dispersive", 2.0 + 0.0j)


def test_real_axis_damped_allowed():
    g = hh.Grid1D(L=1.0, N=16)
    op = hh.assemble(g, slab_model(), "dispersive", 2.0 + 0.0j)
    assert op.z == 2.0 + 0.0j


def test_two_freq_requires_upper_half():
    g = hh.Grid1D(L=1.0, N=16)
    with pytest.raises(DomainError):
        hh.assemble(g, slab_model(), "two_freq", 1j, xi=1.0 + 0.0j)


def test_bloch_margin_enforced():
    g = hh.Grid1D(L=1.0, N=16, boundary="bloch", bloch_k=1.0 + 2.0j)
    with pytest.raises(DomainError):
        hh.assemble(g, slab_model(), "bloch", 1.0j)


def test_layer_outside_cell_rejected():
    density = dsp.OscillatorDensity(lorentz=((1.0, 2.0, 0.2),))
    m = dsp.PermittivityModel(layers=((0.5, 1.5, density),))
    g = hh.Grid1D(L=1.0, N=16, boundary="bloch", bloch_k=0.1)
    with pytest.raises(PeriodicityError):
        hh.assemble(g, m, "bloch", 1.0j)


def test_unknown_kind_rejected():
    g = hh.Grid1D(L=1.0, N=16)
    with pytest.raises(ConfigError):
        hh.assemble(g, slab_model(), "static", 1j)


# ---------------------------------------------------------------------------
# Green matrix and coefficients


def test_green_matrix_reciprocity():
    g = hh.Grid1D(L=1.0, N=40)
    G = hh.green_matrix(hh.assemble(g, slab_model(), "dispersive", 1j)).values
    assert np.max(np.abs(G - G.T)) / np.max(np.abs(G)) < 1e-13


def test_green_matrix_schwarz():
    g = hh.Grid1D(L=1.0, N=40)
    m = slab_model()
    z = 0.7 + 0.9j
    G = hh.green_matrix(hh.assemble(g, m, "dispersive", z)).values
    Gm = hh.green_matrix(hh.assemble(g, m, "dispersive", -np.conj(z))).values
    assert np.max(np.abs(Gm - np.conj(G))) / np.max(np.abs(G)) < 1e-13


def test_coefficient_consistent_with_green_matrix():
    g = hh.Grid1D(L=1.0, N=32)
    op = hh.assemble(g, slab_model(), "dispersive", 1j)
    rng = np.random.default_rng(9)
    phi = rng.standard_normal(32)
    psi = rng.standard_normal(32)
    got = hh.coefficient(op, phi, psi)
    G = hh.green_matrix(op).values
    expect = g.h**2 * phi @ G @ psi
    assert got == pytest.approx(expect, rel=1e-12)


def test_norm_bound_holds():
    g = hh.Grid1D(L=1.0, N=48)
    m = slab_model()
    for z in (1j, 2.0 + 0.5j, -1.0 + 0.2j, 5.0 + 3.0j):
        op = hh.assemble(g, m, "dispersive", z)
        assert hh.inverse_norm(op) <= hh.norm_bound(op) * (1.0 + 1e-10)


def test_norm_bound_two_freq_holds():
    g = hh.Grid1D(L=1.0, N=48)
    m = slab_model()
    op = hh.assemble(g, m, "two_freq", 1.0 + 0.8j, xi=0.5 + 0.4j)
    assert hh.inverse_norm(op) <= hh.norm_bound(op) * (1.0 + 1e-10)


def test_inverse_norm_power_iteration_agrees_with_svd():
    g = hh.Grid1D(L=1.0, N=48)
    op = hh.assemble(g, slab_model(), "dispersive", 1j)
    dense = hh.inverse_norm(op)
    iterative = hh.inverse_norm(op, dense_cutoff=0)
    assert iterative == pytest.approx(dense, rel=1e-6)


def test_bloch_imag_eigs():
    assert hh.bloch_imag_eigs(0.3, 1j, c=1.0) == (1.0, 1.3, 0.7)


def test_resolvent_difference_ray_decreasing_cap():
    g = hh.Grid1D(L=1.0, N=32)
    m = slab_model()
    norms = hh.resolvent_difference_ray(m, g, 1.0, [100.0, 1000.0])
    w = dsp.chi_dot_at_zero(m.density_at(0.5))
    assert all(n <= 1.5 * w for n in norms)


# ---------------------------------------------------------------------------
# batched paths


def test_diagonal_batch_matches_assemble():
    g = hh.Grid1D(L=1.0, N=24)
    m = slab_model()
    zs = np.array([1j, 0.5 + 0.5j, 2.0 + 1.0j])
    diag = hh.diagonal_batch(g, m, "dispersive", zs)
    for i, z in enumerate(zs):
        op = hh.assemble(g, m, "dispersive", complex(z))
        assert np.allclose(diag[i], op.diag)


def test_solve_batch_matches_individual():
    g = hh.Grid1D(L=1.0, N=24)
    m = slab_model()
    zs = np.array([1j, 0.5 + 0.5j, 2.0 + 1.0j])
    diag = hh.diagonal_batch(g, m, "dispersive", zs)
    rng = np.random.default_rng(10)
    rhs = rng.standard_normal((3, 24)) + 0j
    x = hh.solve_batch(g, diag, rhs)
    for i, z in enumerate(zs):
        op = hh.assemble(g, m, "dispersive", complex(z))
        assert np.max(np.abs(x[i] - op.solve(rhs[i]))) < 1e-12
