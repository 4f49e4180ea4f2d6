import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qfound.bohm import (
    AllMasked,
    GridMismatch,
    GridWavefunction,
    PotentialSpec,
    bohm_fields,
    bohm_residual_detail,
    bohm_residuals,
    coherent_state,
    decompose,
    eigenstate_identity_check,
    evolve,
    evolve_trajectory,
    free_gaussian,
    hamilton_jacobi_compare,
    harmonic_eigenstates,
    plane_wave,
    quantum_potential,
    snapshot_table,
)
from qfound.hilbert import hermitian_eigensystem

FREE = PotentialSpec.free()
HO = PotentialSpec.harmonic(1.0)


def gaussian_vq_oracle():
    """Symbolic V_q of a Gaussian amplitude exp(-x^2 / 4 sigma^2)."""
    x, s, hb, m = sp.symbols("x sigma hbar m", positive=True)
    lam = sp.exp(-(x**2) / (4 * s**2))
    vq = sp.simplify(-(hb**2) / (2 * m) * sp.diff(lam, x, 2) / lam)
    return sp.lambdify((x, s, hb, m), vq)


def test_free_gaussian_solves_schrodinger_symbolically():
    x, t, s, m, hb, p0 = sp.symbols("x t sigma m hbar p0", positive=True)
    tau = 1 + sp.I * hb * t / (2 * m * s**2)
    psi = tau ** sp.Rational(-1, 2) * sp.exp(-((x - p0 * t / m) ** 2) / (4 * s**2 * tau) + sp.I * (p0 * x - p0**2 * t / (2 * m)) / hb)
    lhs = sp.I * hb * sp.diff(psi, t) + hb**2 / (2 * m) * sp.diff(psi, x, 2)
    assert sp.simplify(lhs / psi) == 0


def test_grid_wavefunction_validation():
    with pytest.raises(ValueError):
        GridWavefunction(0.0, 1.0, np.ones(10))
    with pytest.raises(ValueError):
        GridWavefunction(0.0, 1.0, 3 * np.ones(100))
    psi = GridWavefunction.create(0.0, 1.0, np.ones(100))
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        psi.values[0] = 0


def test_cfl_sanity_limit():
    g = free_gaussian(-10, 10, 201, sigma=1.0)
    evolve(g, FREE, g.dx**2, 1)  # the limit itself is allowed
    with pytest.raises(ValueError):
        evolve(g, FREE, 1.01 * g.dx**2, 1)
    with pytest.raises(ValueError):
        evolve(g, FREE, -1e-3, 1)


def test_free_gaussian_at_rest_spreads_symmetrically():
    g = free_gaussian(-20, 20, 2001, sigma=1.0)
    tr = evolve_trajectory(g, FREE, 4e-4, 2500, every=500)
    widths = [s.std_x() for s in tr]
    assert all(abs(s.mean_x()) < 1e-9 for s in tr)
    assert all(b > a for a, b in zip(widths, widths[1:]))
    assert all(abs(s.norm() - 1.0) < 1e-9 for s in tr)


def test_crank_nicolson_tracks_analytic_packet():
    g = free_gaussian(-20, 30, 5001, sigma=1.0, p0=1.0)
    out = evolve(g, FREE, 1e-4, 10_000, order=4)
    exact = free_gaussian(-20, 30, 5001, sigma=1.0, p0=1.0, t=1.0)
    assert abs(abs(exact.overlap(out)) - 1.0) < 1e-8


def test_ehrenfest_mean_position():
    g = free_gaussian(-30, 50, 8001, sigma=1.0, p0=1.0)
    out = evolve(g, FREE, 1e-4, 10_000, order=4)
    assert out.mean_x() == pytest.approx(1.0, rel=1e-6)
    assert abs(out.norm() - 1.0) < 1e-9


def test_ground_state_is_stationary():
    _, psi = harmonic_eigenstates(-10, 10, 2001, levels=1)[0]
    out = evolve(psi, HO, 1e-4, 5000)
    assert abs(abs(psi.overlap(out)) - 1.0) < 1e-7


def test_fd_eigenstates_agree_with_jacobi_on_small_grid():
    n, lo, hi = 80, -6.0, 6.0
    pairs = harmonic_eigenstates(lo, hi, n, levels=3)
    x = np.linspace(lo, hi, n)
    dx = x[1] - x[0]
    h = np.diag(1.0 / dx**2 + 0.5 * x**2) + np.diag(np.full(n - 1, -0.5 / dx**2), 1) + np.diag(np.full(n - 1, -0.5 / dx**2), -1)
    w, v = hermitian_eigensystem(h, method="jacobi")
    for j, (e, psi) in enumerate(pairs):
        assert e == pytest.approx(w[j], abs=1e-10)
        ref = v[:, j] / np.linalg.norm(v[:, j])
        got = psi.values / np.linalg.norm(psi.values)
        assert abs(abs(np.vdot(ref, got)) - 1.0) < 1e-10


def test_fd_levels_approach_harmonic_ladder():
    for j, (e, _) in enumerate(harmonic_eigenstates(-10, 10, 2001, levels=3)):
        assert e == pytest.approx(j + 0.5, abs=5e-5)


def test_plane_wave_decomposition():
    pw = plane_wave(-5, 5, 1001, p=2.0)
    f = quantum_potential(decompose(pw))
    assert np.ptp(f.lam) < 1e-12
    slope = np.polyfit(f.x, f.phi, 1)[0]
    assert slope == pytest.approx(2.0, abs=1e-8)
    assert np.nanmax(np.abs(f.v_q)) < 1e-9


def test_real_gaussian_has_flat_phase():
    f = decompose(free_gaussian(-10, 10, 801, sigma=1.0))
    ok = ~f.node_mask
    assert np.ptp(f.phi[ok]) == 0.0


def test_first_excited_state_splits_into_two_runs():
    _, psi = harmonic_eigenstates(-10, 10, 2000, levels=2)[1]
    f = decompose(psi)
    (a0, b0), (a1, b1) = f.runs()
    left, right = f.phi[a0:b0], f.phi[a1:b1]
    assert np.ptp(left) < 1e-12 and np.ptp(right) < 1e-12
    assert abs(left[0] - right[0]) == pytest.approx(math.pi, abs=1e-12)
    # the node sits between grid points yet is still masked
    assert f.node_mask[np.argmin(np.abs(f.x))]


def test_all_masked_is_an_error():
    with pytest.raises(AllMasked):
        decompose(free_gaussian(-10, 10, 101, sigma=1.0), node_threshold=2.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-8, 1e-2))
def test_reconstruction_on_unmasked_points(seed, thr):
    rng = np.random.default_rng(seed)
    x = np.linspace(-5, 5, 128)
    vals = np.exp(-(x**2)) * (rng.normal(size=128) + 1j * rng.normal(size=128) + 2.0)
    f = decompose(GridWavefunction.create(-5, 5, vals), node_threshold=thr)
    ok = ~f.node_mask
    psi = GridWavefunction.create(-5, 5, vals).values
    assert np.max(np.abs(f.reconstruct()[ok] - psi[ok])) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=4), st.floats(0.1, 10.0))
def test_constant_amplitude_has_no_quantum_potential(ks, mass):
    x = np.linspace(-3, 3, 200)
    phase = sum(k * np.sin((j + 1) * x) for j, k in enumerate(ks)) / 100.0
    f = bohm_fields(GridWavefunction.create(-3, 3, np.exp(1j * phase), mass=mass))
    assert np.nanmax(np.abs(f.v_q)) < 1e-9


def test_ground_state_quantum_potential_matches_oracle():
    # analytic ground state on a fine grid, and the FD eigenstate on dx = 0.01
    x = np.linspace(-8, 8, 8001)
    f = bohm_fields(GridWavefunction.create(-8, 8, np.exp(-(x**2) / 2)))
    band = np.abs(x) <= 4 / math.sqrt(2)
    assert np.max(np.abs(f.v_q[band] - (0.5 - 0.5 * x[band] ** 2))) < 1e-5
    _, psi = harmonic_eigenstates(-10, 10, 2001, levels=1)[0]
    f = bohm_fields(psi)
    band = np.abs(f.x) <= 4 / math.sqrt(2)
    assert np.max(np.abs(f.v_q[band] - (0.5 - 0.5 * f.x[band] ** 2))) < 1e-5


def test_free_gaussian_quantum_potential_matches_symbolic_oracle():
    oracle = gaussian_vq_oracle()
    sigma = 0.8
    f = bohm_fields(free_gaussian(-10, 10, 4001, sigma=sigma, p0=0.7))
    for xq in (0.0, sigma):
        i = int(np.argmin(np.abs(f.x - xq)))
        assert f.x[i] == pytest.approx(xq, abs=1e-9)
        assert f.v_q[i] == pytest.approx(oracle(f.x[i], sigma, 1.0, 1.0), abs=1e-5)


@pytest.mark.parametrize("level,tol", [(0, 1e-5), (1, 1e-4), (2, 1e-4)])
def test_eigenstate_identity(level, tol):
    _, psi = harmonic_eigenstates(-10, 10, 2001, levels=3)[level]
    assert eigenstate_identity_check(psi, HO, level + 0.5) < tol


def test_plane_wave_identity_is_dispersion_relation():
    # V = V_q = 0, so V + V_q - E + p^2/2m vanishes for E = p^2/2m
    p = 1.7
    pw = plane_wave(-5, 5, 501, p=p)
    assert eigenstate_identity_check(pw, FREE, 0.0) < 1e-9
    f = bohm_fields(pw)
    ok = np.isfinite(f.v_q)
    phi_x = np.gradient(f.phi, f.dx)[ok]
    assert np.max(np.abs(phi_x**2 / 2 - p * p / 2)) < 1e-9


def test_plane_wave_residuals_vanish():
    tr = [plane_wave(-5, 5, 1001, p=1.5, t=0.01 * k) for k in range(5)]
    r_hj, r_cont = bohm_residuals(tr, FREE)
    assert r_hj < 1e-8 and r_cont < 1e-8


def _analytic_free(n, tau):
    return [free_gaussian(-20, 20, n, sigma=1.0, p0=1.0, t=0.5 + k * tau) for k in range(3)]


def test_residuals_converge_at_second_order():
    prev = None
    for n in (401, 801, 1601):
        dx = 40 / (n - 1)
        r = bohm_residual_detail(_analytic_free(n, dx), FREE, bulk=1e-3)
        if prev is not None:
            assert prev.r_hj / r.r_hj >= 3.5
            assert prev.r_cont / r.r_cont >= 3.5
        prev = r


def test_coherent_state_residuals():
    tr = evolve_trajectory(coherent_state(-10, 10, 2001, shift=1.0), HO, 1e-4, 200, every=100)
    r = bohm_residual_detail(tr, HO, bulk=1e-3)
    assert r.r_hj < 1e-4 and r.r_cont < 1e-4
    assert r.r_hj_without_vq > 1.0


def test_residuals_reject_bad_trajectories():
    g = free_gaussian(-5, 5, 101, sigma=1.0)
    with pytest.raises(ValueError):
        bohm_residuals([g, g], FREE)
    other = free_gaussian(-5, 5, 201, sigma=1.0)
    with pytest.raises(GridMismatch):
        bohm_residuals([g, other, g], FREE)


def test_hamilton_jacobi_plane_wave_is_exact():
    tr = [plane_wave(-10, 10, 1001, p=1.3, t=0.01 * k) for k in range(11)]
    h = hamilton_jacobi_compare(tr)
    assert h.p0 == pytest.approx(1.3, abs=1e-12)
    assert h.sup_norm.max() < 1e-8


def _hj_run(sigma):
    g = free_gaussian(-40, 60, 4001, sigma=sigma, p0=1.0)
    return hamilton_jacobi_compare(evolve_trajectory(g, FREE, 6.25e-4, 3200, every=160))


def test_hamilton_jacobi_gap_is_integrated_quantum_potential():
    narrow, wide = _hj_run(0.5), _hj_run(2.0)
    for h, sigma in ((narrow, 0.5), (wide, 2.0)):
        late = h.times > 0.5
        assert np.allclose(h.center_difference[late], -h.integrated_vq[late], rtol=0.1)
        exact = -0.5 * np.arctan(h.times / (2 * sigma**2))
        assert np.allclose(h.center_difference[late], exact[late], rtol=0.1)
        assert np.all(np.diff(np.abs(h.center_difference)) > 0)
        assert h.r_hj < 0.2 * h.r_hj_without_vq
    assert np.all(np.abs(wide.center_difference[1:]) < np.abs(narrow.center_difference[1:]))


def test_snapshot_table_columns():
    psi = free_gaussian(-5, 5, 101, sigma=1.0, p0=0.5)
    tab = snapshot_table(psi)
    assert tab.shape == (101, 6)
    assert np.array_equal(tab[:, 0], psi.x)
    assert np.array_equal(tab[:, 1] + 1j * tab[:, 2], psi.values)
