import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfound.fock import (
    FockSpace,
    commutator_artifact,
    extended_phase_space,
    ladder_commutators,
    pauli_check,
    phase_operator_defects,
    sg_operator,
)


def test_ladder_action():
    f = FockSpace(16)
    for n in range(f.truncation):
        assert np.allclose(f.adag @ f.basis(n), math.sqrt(n + 1) * f.basis(n + 1), atol=1e-15)
    assert np.all(f.a @ f.basis(0) == 0)
    assert np.allclose(np.diag(f.number).real, np.arange(f.dim), atol=1e-14)
    with pytest.raises(ValueError):
        FockSpace(4)


@pytest.mark.parametrize("omega", [1.0, 2.5])
def test_ladder_commutators_interior(omega):
    na, nd = ladder_commutators(FockSpace(16, omega=omega))
    assert na < 1e-12 and nd < 1e-12


def test_quadrature_hamiltonian_matches_number_form_below_top():
    f = FockSpace(16, omega=1.7, mass=0.6)
    diff = f.hamiltonian(True) - f.hamiltonian(False)
    diff[-1, -1] = 0.0
    assert np.max(np.abs(diff)) < 1e-12


def test_truncation_artifact_is_localized_and_grows():
    arts = [commutator_artifact(FockSpace(n)) for n in (16, 32)]
    for art in arts:
        assert art.lowest_affected_level == art.truncation
        n = art.truncation
        assert art.norm_a == pytest.approx(math.sqrt(n) * (n + 1) / 2, rel=1e-12)
    assert arts[1].norm_a > arts[0].norm_a
    assert ladder_commutators(FockSpace(16), interior=True, from_quadratures=False)[0] < 1e-12


def test_sg_operator_shifts_down():
    f = FockSpace(16)
    e = sg_operator(f)
    assert np.max(np.abs(e @ f.basis(0))) < 1e-12
    for n in range(1, f.dim):
        assert np.allclose(e @ f.basis(n), f.basis(n - 1), atol=1e-12)
    assert np.allclose(e, sg_operator(f, method="lapack"), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(8, 40), st.floats(0.3, 4.0))
def test_phase_operator_algebra(n, omega):
    d1, d2, d3 = phase_operator_defects(FockSpace(n, omega=omega))
    assert d1 < 1e-12 and d2 < 1e-12 and d3 < 1e-12


def test_doubled_space_is_unitary_on_interior():
    f = FockSpace(32)
    ds = extended_phase_space(f)
    u1, u2 = ds.unitarity_defects()
    assert u1 < 1e-12 and u2 < 1e-12
    # the open line leaks only at its two ends
    assert ds.unitarity_defects(interior=False)[0] == pytest.approx(1.0)
    ring = extended_phase_space(f, cyclic=True)
    assert max(ring.unitarity_defects(interior=False)) < 1e-12


def test_doubled_space_restricts_to_e_and_links_vacua():
    f = FockSpace(16)
    ds = extended_phase_space(f)
    assert np.array_equal(ds.copy_plus_block()[:, 1:], sg_operator(f)[:, 1:])
    out = ds.e_tilde[:, ds.plus(0)]
    assert np.linalg.norm(out) == pytest.approx(1.0)
    assert out[ds.minus(0)] == 1.0


def test_pauli_obstruction():
    chk = pauli_check(24)
    assert chk.min_eigenvalue >= -1e-9
    assert chk.residual == pytest.approx(chk.floor, rel=1e-9)
    assert chk.residual > 1e-6
