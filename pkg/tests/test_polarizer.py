import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfound.polarizer import (
    CoincidenceResult,
    CopenhagenPhoton,
    HVModelParams,
    HVPhoton,
    MismatchedExperiments,
    Polarizer,
    Source,
    bell_from_coincidences,
    chain_probability_copenhagen,
    chsh_experiment,
    coincidence_experiment,
    copenhagen_probability,
    copenhagen_transmit,
    golden_section_minimize,
    hv_transmit,
    three_polarizer_scan,
    two_polarizer_curve,
)

angles = st.floats(min_value=-720.0, max_value=720.0, allow_nan=False)


def cos2(deg):
    return math.cos(math.radians(deg)) ** 2


def test_polarizer_validation_and_reduction():
    assert Polarizer(190.0).axis == pytest.approx(10.0)
    assert Polarizer(-30.0).axis == pytest.approx(150.0)
    with pytest.raises(ValueError):
        Polarizer(0.0, 0.5)
    with pytest.raises(ValueError):
        HVModelParams(sharpness=0.5)
    with pytest.raises(ValueError):
        HVModelParams(realign=1.5)
    with pytest.raises(ValueError):
        CopenhagenPhoton((1.0, 1.0))


@given(angles)
def test_axis_always_in_half_open_range(a):
    ax = Polarizer(a).axis
    assert 0.0 <= ax < 180.0


def test_copenhagen_aligned_and_crossed():
    ph = CopenhagenPhoton.linear(0.0)
    assert copenhagen_probability(ph, Polarizer(0.0)) == 1.0
    assert copenhagen_probability(ph, Polarizer(90.0)) == pytest.approx(0.0, abs=1e-30)


def test_copenhagen_thirty_degrees_monte_carlo():
    rng = np.random.default_rng(7)
    ph, pol = CopenhagenPhoton.linear(0.0), Polarizer(30.0)
    p = copenhagen_probability(ph, pol)
    assert p == pytest.approx(cos2(30.0), abs=1e-15)
    hits = np.count_nonzero(rng.random(1_000_000) < p)
    assert abs(hits / 1e6 - 0.75) < 0.002
    # the scalar transmit routine agrees on a smaller sample
    n = 20_000
    passed = sum(copenhagen_transmit(ph, pol, rng)[0] for _ in range(n))
    assert abs(passed / n - 0.75) < 4 * math.sqrt(0.75 * 0.25 / n)


def test_copenhagen_reprepares_along_axis():
    ok, out = copenhagen_transmit(CopenhagenPhoton.linear(0.0), Polarizer(0.0), np.random.default_rng(0))
    assert ok
    assert copenhagen_probability(out, Polarizer(0.0)) == pytest.approx(1.0)


def test_chain_probability_examples():
    assert chain_probability_copenhagen(0.0, 0.0) == 1.0
    assert chain_probability_copenhagen(45.0, 90.0) == pytest.approx(0.25, abs=1e-15)
    assert chain_probability_copenhagen(30.0, 90.0) == pytest.approx(0.1875, abs=1e-15)
    assert chain_probability_copenhagen(90.0, 30.0) == pytest.approx(0.0, abs=1e-30)


@given(st.floats(min_value=0.0, max_value=90.0))
def test_chain_orthogonal_final_stage_is_dark(alpha):
    assert chain_probability_copenhagen(alpha, alpha + 90.0) < 1e-30


@given(st.floats(0, 180), st.floats(0, 180), st.floats(0, 0.49))
def test_chain_with_leakage_is_stage_product(alpha, beta, eps):
    def stage(d):
        return eps + (1 - 2 * eps) * cos2(d)

    assert chain_probability_copenhagen(alpha, beta, eps) == pytest.approx(stage(alpha) * stage(alpha - beta), rel=1e-12, abs=1e-15)


def test_hv_aligned_kernel_always_transmits():
    rng = np.random.default_rng(1)
    for s in (1.0, 2.5, 7.0):
        for aux in (0.0, 0.5, 0.999999):
            ok, out = hv_transmit(HVPhoton(33.0, aux), Polarizer(33.0), HVModelParams(s, 0.3), rng)
            assert ok
            assert out.hidden_angle == pytest.approx(33.0)
            assert 0.0 <= out.hidden_aux < 1.0


def test_hv_realign_moves_toward_axis_along_short_way():
    rng = np.random.default_rng(2)
    ok, out = hv_transmit(HVPhoton(170.0, 0.0), Polarizer(10.0), HVModelParams(1.0, 0.5), rng)
    assert ok
    assert out.hidden_angle == pytest.approx(0.0, abs=1e-12) or out.hidden_angle == pytest.approx(180.0)


def test_hv_calibration_matches_malus_within_0p003():
    thetas = [0.0, 30.0, 45.0, 60.0, 90.0]
    pts = two_polarizer_curve("hv", thetas, 1_000_000, seed=3)
    for pt in pts:
        assert abs(pt.rate - cos2(pt.theta)) < 0.003


def test_hv_family_is_larger_than_malus():
    (pt,) = two_polarizer_curve("hv", [45.0], 200_000, seed=4, params=HVModelParams(4.0, 0.0))
    assert abs(pt.rate - 0.5) > 0.05


def test_copenhagen_curve_is_malus():
    for pt in two_polarizer_curve("copenhagen", [0.0, 20.0, 70.0], 200_000, seed=8):
        assert abs(pt.rate - cos2(pt.theta)) <= 4 * max(pt.stderr, 1e-12)


def test_coincidence_copenhagen_examples():
    same = coincidence_experiment(20.0, 20.0, Source.ENTANGLED_COPENHAGEN, 1_000_000, seed=5)
    assert abs(same.rate - 0.5) < 0.002
    crossed = coincidence_experiment(20.0, 110.0, Source.ENTANGLED_COPENHAGEN, 1_000_000, seed=5)
    assert crossed.rate < 0.001
    assert same.rate == same.n_coincidences / same.n_pairs
    assert same.singles_a + crossed.n_mp + crossed.n_mm >= 0


def test_coincidence_copenhagen_matches_joint_probability_oracle():
    # projective joint probability of the correlated state: 1/2 cos^2(alpha - beta)
    for a, b in ((0.0, 30.0), (10.0, 55.0), (80.0, 20.0)):
        r = coincidence_experiment(a, b, Source.ENTANGLED_COPENHAGEN, 400_000, seed=6)
        p = 0.5 * cos2(a - b)
        assert abs(r.rate - p) < 4 * math.sqrt(p * (1 - p) / r.n_pairs)


def test_common_hidden_angle_has_correlation_deficit():
    r = coincidence_experiment(0.0, 0.0, Source.COMMON_HIDDEN_ANGLE, 1_000_000, seed=7)
    assert r.rate < 0.5
    # analytic value for s=1 is <cos^4> = 3/8
    assert abs(r.rate - 0.375) < 0.003


def test_counts_are_consistent_and_deterministic():
    r1 = coincidence_experiment(12.0, 40.0, Source.COMMON_HIDDEN_ANGLE, 150_001, seed=9)
    r2 = coincidence_experiment(12.0, 40.0, Source.COMMON_HIDDEN_ANGLE, 150_001, seed=9)
    assert r1 == r2
    assert r1.n_pp + r1.n_pm + r1.n_mp + r1.n_mm == r1.n_pairs
    assert 0.0 <= r1.rate <= 1.0


def test_counts_independent_of_thread_count(monkeypatch):
    monkeypatch.setenv("QFOUND_THREADS", "1")
    r1 = coincidence_experiment(5.0, 50.0, Source.ENTANGLED_COPENHAGEN, 300_000, seed=10)
    monkeypatch.setenv("QFOUND_THREADS", "4")
    r4 = coincidence_experiment(5.0, 50.0, Source.ENTANGLED_COPENHAGEN, 300_000, seed=10)
    assert r1 == r4


def test_coincidence_rejects_empty_run():
    with pytest.raises(ValueError):
        coincidence_experiment(0.0, 0.0, Source.ENTANGLED_COPENHAGEN, 0, seed=0)


def _flat(a, b, n=1000):
    return CoincidenceResult(a, b, Source.COMMON_HIDDEN_ANGLE, n, 250, 250, 250, 250)


def test_bell_from_flat_source_is_zero():
    b, se = bell_from_coincidences(_flat(0, 1), _flat(0, 2), _flat(3, 1), _flat(3, 2))
    assert b == 0.0
    assert se == pytest.approx(2 * math.sqrt(1 / 1000))


def test_bell_rejects_mismatched_inputs():
    with pytest.raises(MismatchedExperiments):
        bell_from_coincidences(_flat(0, 1), _flat(0, 2, n=999), _flat(3, 1), _flat(3, 2))
    with pytest.raises(MismatchedExperiments):
        bell_from_coincidences(_flat(0, 1), _flat(0, 2), _flat(3, 5), _flat(3, 2))


def test_copenhagen_chsh_reaches_tsirelson():
    run = chsh_experiment(45.0, 0.0, 22.5, 67.5, Source.ENTANGLED_COPENHAGEN, 1_000_000, seed=11)
    assert abs(run.value - 2 * math.sqrt(2)) < 0.02
    assert abs(run.value) >= 2.7


@settings(max_examples=12, deadline=None)
@given(
    st.floats(1.0, 8.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 0.3),
    st.lists(st.floats(0.0, 180.0), min_size=4, max_size=4),
    st.integers(0, 2**31),
)
def test_common_hidden_angle_never_beats_two(s, r, eps, sets, seed):
    run = chsh_experiment(*sets, Source.COMMON_HIDDEN_ANGLE, 20_000, seed, HVModelParams(s, r), eps)
    assert abs(run.value) <= 2.0 + 3.0 * run.stderr


def test_golden_section_on_parabola():
    x, fx = golden_section_minimize(lambda t: (t - 1.234) ** 2, -5.0, 5.0, tol=1e-8)
    assert x == pytest.approx(1.234, abs=1e-7)
    assert fx < 1e-14


def test_three_polarizer_copenhagen_minimum_is_crossed():
    grid = np.arange(0.0, 90.0 + 1e-9, 5.0)
    pts = three_polarizer_scan("copenhagen", grid)
    for p in pts:
        d = (p.beta_star - (p.alpha + 90.0)) % 180.0
        assert min(d, 180.0 - d) < 1e-3
        assert p.p_min < 1e-12
    assert pts[0].beta_star == pytest.approx(90.0, abs=1e-3)


def test_three_polarizer_hv_scan_emits_curve():
    params = HVModelParams(4.0, 0.5)
    pts = three_polarizer_scan("hv", [0.0, 30.0, 60.0], n_photons=50_000, seed=12, params=params)
    assert len(pts) == 3
    for p in pts:
        assert 0.0 <= p.beta_star < 180.0
        assert 0.0 <= p.p_min <= 1.0
        assert p.p_copenhagen == pytest.approx(chain_probability_copenhagen(p.alpha, p.beta_star), abs=1e-9)
    again = three_polarizer_scan("hv", [0.0, 30.0, 60.0], n_photons=50_000, seed=12, params=params)
    assert pts == again


def test_three_polarizer_rejects_bad_grid():
    with pytest.raises(ValueError):
        three_polarizer_scan("copenhagen", [])
    with pytest.raises(ValueError):
        three_polarizer_scan("copenhagen", [120.0])


def test_source_parse():
    assert Source.parse("entangled-copenhagen") is Source.ENTANGLED_COPENHAGEN
    assert Source.parse("CommonHiddenAngle") is Source.COMMON_HIDDEN_ANGLE
