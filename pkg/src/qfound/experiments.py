"""Dispatch from a validated config to the owning module; returns a ResultTable."""

from __future__ import annotations

import math

import numpy as np

from . import bell, bohm, evolution, fock, polarizer
from .config import (
    BellBoundsConfig,
    BohmConfig,
    ChshConfig,
    CoincidenceConfig,
    ExperimentConfig,
    LhvConfig,
    PhaseOpConfig,
    PolarizerChainConfig,
    ScatteringConfig,
    ThreePolConfig,
    require_valid,
)
from .io import ResultTable


class ExperimentFailure(RuntimeError):
    """A numerical failure, tagged with the experiment that raised it."""


def grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid; the stop value is kept when it lands within 1e-9 steps."""
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + i * step for i in range(n + 1)]


def _hv(c) -> polarizer.HVModelParams:
    return polarizer.HVModelParams(c.sharpness, c.realign)


def run_bell_bounds(c: BellBoundsConfig) -> ResultTable:
    regimes = list(bell.Regime) if c.regime == "all" else [bell.Regime.parse(c.regime)]
    rows = []
    for r in regimes:
        value, cfg = bell.maximize_violation(r, c.dim, c.seed, c.restarts, c.max_evals)
        rows.append((r.value, c.dim, c.restarts, value, bell.CEILING[r], bell.bb_dagger_bound(cfg), bell.BBDAG_CEILING[r]))
    if c.n_random:
        norm, val = bell.random_noncommuting_search(c.n_random, c.seed)
        rows.append(("NonCommuting-random", 0, c.n_random, val, bell.CEILING[bell.Regime.NON_COMMUTING], norm, 12.0))
    cols = ["regime", "dim", "trials", "best_value", "ceiling", "bbdag_norm", "bbdag_ceiling"]
    return ResultTable(cols, rows, c)


def run_lhv(c: LhvConfig) -> ResultTable:
    rows = [(*s, v) for s, v in bell.lhv_strategies()]
    res = {"lhv_bound": bell.lhv_bound(), "mixture_max": bell.lhv_mixture_max(c.n_mixtures, c.seed)}
    return ResultTable(["a1", "a2", "b1", "b2", "value"], rows, c, res)


def run_chsh(c: ChshConfig) -> ResultTable:
    src = polarizer.Source.parse(c.source)
    run = polarizer.chsh_experiment(c.a1, c.a2, c.b1, c.b2, src, c.n_pairs, c.seed, _hv(c), c.imperfectness)
    rows = [
        (f"E{i}{j}", r.alpha, r.beta, r.n_pairs, r.correlation, r.correlation_stderr)
        for (i, j), r in zip(((1, 1), (1, 2), (2, 1), (2, 2)), run.results)
    ]
    rows.append(("B", math.nan, math.nan, c.n_pairs, run.value, run.stderr))
    return ResultTable(["label", "alpha", "beta", "n", "value", "stderr"], rows, c)


def run_polarizer_chain(c: PolarizerChainConfig) -> ResultTable:
    thetas = grid(c.theta_start, c.theta_stop, c.theta_step)
    pts = polarizer.two_polarizer_curve(c.model, thetas, c.n_photons, c.seed, _hv(c), c.imperfectness)
    rows = [(p.theta, c.model, p.n_first, p.n_second, p.rate, p.stderr, float(polarizer.malus(p.theta))) for p in pts]
    return ResultTable(["theta", "model", "n_first", "n_second", "rate", "stderr", "malus"], rows, c)


def run_three_pol(c: ThreePolConfig) -> ResultTable:
    alphas = grid(c.alpha_start, c.alpha_stop, c.alpha_step)
    pts = polarizer.three_polarizer_scan(c.model, alphas, c.n_photons, c.seed, _hv(c), c.imperfectness, c.tol)
    rows = [(p.alpha, p.beta_star, c.model, p.n_photons, p.p_min, p.p_copenhagen) for p in pts]
    return ResultTable(["alpha", "beta_star", "model", "n", "p_min", "p_copenhagen"], rows, c)


def run_coincidence(c: CoincidenceConfig) -> ResultTable:
    src = polarizer.Source.parse(c.source)
    rows = []
    for i, beta in enumerate(grid(c.beta_start, c.beta_stop, c.beta_step)):
        r = polarizer.coincidence_experiment(c.alpha, beta, src, c.n_pairs, c.seed, _hv(c), c.imperfectness, tag=i)
        rows.append((r.alpha, r.beta, src.value, r.n_pairs, r.n_pp, r.n_pm, r.n_mp, r.n_mm, r.rate, r.correlation, r.correlation_stderr))
    cols = ["alpha", "beta", "source", "n", "n_pp", "n_pm", "n_mp", "n_mm", "rate", "correlation", "stderr"]
    return ResultTable(cols, rows, c)


def run_bohm(c: BohmConfig) -> ResultTable:
    pot = bohm.PotentialSpec.harmonic(c.k)
    free = bohm.PotentialSpec.free()
    if c.mode == "identity":
        omega = math.sqrt(c.k / c.mass)
        rows = []
        for lvl, (e_fd, psi) in enumerate(bohm.harmonic_eigenstates(c.x_min, c.x_max, c.n, c.k, c.levels, c.mass, c.hbar)):
            e = c.hbar * omega * (lvl + 0.5)
            dev = bohm.eigenstate_identity_check(psi, pot, e, c.node_threshold)
            rows.append((lvl, e_fd, e, dev))
        return ResultTable(["level", "energy_fd", "energy_exact", "max_deviation"], rows, c)
    if c.mode == "convergence":
        rows, prev = [], None
        n = c.n
        for _ in range(3):
            g = bohm.free_gaussian(c.x_min, c.x_max, n, c.sigma, c.x0, c.p0, 0.0, c.mass, c.hbar)
            tau = g.dx
            inner = max(1, math.ceil(tau / (0.25 * bohm.cfl_limit(g))))
            start = bohm.free_gaussian(c.x_min, c.x_max, n, c.sigma, c.x0, c.p0, 0.5 - tau, c.mass, c.hbar)
            tr = bohm.evolve_trajectory(start, free, tau / inner, 2 * inner, every=inner)
            r = bohm.bohm_residual_detail(tr, free, c.node_threshold, c.bulk or None)
            ratios = (prev[0] / r.r_hj, prev[1] / r.r_cont) if prev else (math.nan, math.nan)
            rows.append((n, g.dx, r.r_hj, r.r_cont, *ratios))
            prev = (r.r_hj, r.r_cont)
            n = 2 * n - 1
        return ResultTable(["n", "dx", "r_hj", "r_cont", "ratio_hj", "ratio_cont"], rows, c)
    if c.mode == "coherent":
        psi = bohm.coherent_state(c.x_min, c.x_max, c.n, c.shift, c.k, c.mass, c.hbar)
        tr = bohm.evolve_trajectory(psi, pot, c.dt, c.steps, c.every)
        r = bohm.bohm_residual_detail(tr, pot, c.node_threshold, c.bulk or None)
        return ResultTable(["dx", "dt", "r_hj", "r_cont", "r_hj_without_vq"], [(psi.dx, c.dt, r.r_hj, r.r_cont, r.r_hj_without_vq)], c)
    g = bohm.free_gaussian(c.x_min, c.x_max, c.n, c.sigma, c.x0, c.p0, 0.0, c.mass, c.hbar)
    if c.mode == "hamilton-jacobi":
        tr = bohm.evolve_trajectory(g, free, c.dt, c.steps, c.every)
        h = bohm.hamilton_jacobi_compare(tr, None, c.node_threshold, c.bulk or None)
        closed = -0.5 * c.hbar * np.arctan(c.hbar * h.times / (2 * c.mass * c.sigma**2))
        rows = list(zip(h.times, h.center_difference, -h.integrated_vq, closed, h.sup_norm))
        return ResultTable(["t", "center_difference", "minus_integrated_vq", "closed_form", "sup_norm"], rows, c, {"p0": h.p0})
    psi = bohm.evolve(g, free, c.dt, c.steps)
    tab = bohm.snapshot_table(psi, bohm.bohm_fields(psi, c.node_threshold))
    return ResultTable(["x", "re_psi", "im_psi", "lambda", "phi", "v_q"], [tuple(r) for r in tab], c, {"t": psi.t})


def run_scattering(c: ScatteringConfig) -> ResultTable:
    if c.mode == "decay":
        model = evolution.DecayModel.build(c.n_in, c.n_res, c.n_out, c.gamma, c.kappa, c.mixing)
        t = np.linspace(0.0, c.t_max, c.t_points)
        tr = evolution.resonance_decay(model, t)
        g_fit, rmse = evolution.fit_exponential(t, tr.p_res)
        rows = list(zip(t, tr.p_in, tr.p_res, tr.p_out, np.exp(-c.gamma * t)))
        return ResultTable(["t", "p_in", "p_res", "p_out", "exp_decay"], rows, c, {"gamma_fit": g_fit, "relative_rmse": rmse})
    psi = bohm.free_gaussian(c.x_min, c.x_max, c.n, c.sigma, c.x0, c.p0)
    if c.mode == "trace":
        tr = evolution.monotonicity_trace(psi, c.dt, c.steps, c.every, c.order)
        slope = np.concatenate(([math.nan], tr.slope(), [math.nan]))
        rows = list(zip(tr.t, tr.r, tr.p2 / tr.mass, slope))
        return ResultTable(["t", "r", "p2_over_m", "slope"], rows, c, {"increasing": int(tr.strictly_increasing())})
    rep = evolution.transit(psi, c.dt, c.steps, c.every, c.order)
    rows = list(zip(rep.times, rep.r_values, rep.labels))
    return ResultTable(["t", "r", "label"], rows, c, {"transitions": rep.transitions()})


def run_phase_op(c: PhaseOpConfig) -> ResultTable:
    rows = []
    for n in c.truncation_list():
        f = fock.FockSpace(n, c.omega)
        ca, cd = fock.ladder_commutators(f)
        art = fock.commutator_artifact(f)
        d1, d2, d3 = fock.phase_operator_defects(f)
        u1, u2 = fock.extended_phase_space(f).unitarity_defects()
        rows.append((n, c.omega, ca, cd, art.norm_a, art.lowest_affected_level, d1, d2, d3, u1, u2))
    chk = fock.pauli_check(c.pauli_n, c.pauli_dx)
    cols = [
        "truncation", "omega", "comm_a", "comm_adag", "comm_a_full", "artifact_level",
        "isometry_defect", "coisometry_defect", "heisenberg_defect", "doubled_defect_1", "doubled_defect_2",
    ]
    res = {"pauli_min_eigenvalue": chk.min_eigenvalue, "pauli_residual": chk.residual, "pauli_floor": chk.floor}
    return ResultTable(cols, rows, c, res)


RUNNERS = {
    "bell-bounds": run_bell_bounds,
    "lhv-enumerate": run_lhv,
    "chsh-scan": run_chsh,
    "polarizer-chain": run_polarizer_chain,
    "three-pol": run_three_pol,
    "coincidence": run_coincidence,
    "bohm": run_bohm,
    "scattering": run_scattering,
    "phase-op": run_phase_op,
}


def run(config: ExperimentConfig) -> ResultTable:
    """Validate, then run. Numerical errors come back as ExperimentFailure naming the experiment."""
    require_valid(config)
    try:
        return RUNNERS[config.KIND](config)
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise ExperimentFailure(f"{config.KIND}: {exc}") from exc
