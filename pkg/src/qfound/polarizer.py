"""Photon transmission through polarizer chains.

Two models are simulated side by side:

* Copenhagen: a photon carries a polarization state; a polarizer projects
  it with probability ``eps + (1 - 2 eps) |<axis|psi>|^2`` and re-prepares it
  along its axis.
* Hidden variable (HV): a photon carries a hidden polarization angle and an
  auxiliary uniform number. It passes when ``aux < eps + (1 - 2 eps) K`` with
  kernel ``K(delta) = cos(delta)^(2 s)``; on passing the hidden angle moves a
  fraction ``r`` of the way toward the axis and ``aux`` is redrawn.

At ``s = 1, r = 1`` the HV model reproduces Malus' law for two polarizers
exactly, which is the calibration anchor for the whole family.

Angles are in degrees throughout. Monte Carlo ensembles are generated in
blocks of ``runtime.BLOCK_SIZE`` photons, block ``k`` drawing from the stream
``(seed, tag, k)``, so counts do not depend on the worker count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .runtime import blocks, pmap, stream

# stream tags, one per experiment family
_TAG_CURVE = 10
_TAG_COINCIDENCE = 11
_TAG_SCAN = 12


def reduce_angle(deg):
    """Reduce an axis angle into [0, 180)."""
    r = np.mod(deg, 180.0)
    # mod can round up to exactly 180 for tiny negative inputs
    r = np.where(r >= 180.0, 0.0, r)
    return float(r) if r.ndim == 0 else r


def wrap_delta(deg):
    """Signed axis difference folded into [-90, 90)."""
    return np.mod(np.asarray(deg, dtype=float) + 90.0, 180.0) - 90.0


def malus(delta_deg, eps: float = 0.0):
    """Imperfect-polarizer transmission eps + (1 - 2 eps) cos^2(delta)."""
    c = np.cos(np.radians(delta_deg))
    return eps + (1.0 - 2.0 * eps) * c * c


@dataclass(frozen=True)
class Polarizer:
    axis: float
    imperfectness: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.imperfectness < 0.5:
            raise ValueError("imperfectness must be in [0, 0.5)")
        object.__setattr__(self, "axis", reduce_angle(float(self.axis)))


# ---------------------------------------------------------------------------
# Copenhagen model


@dataclass(frozen=True)
class CopenhagenPhoton:
    """Polarization amplitudes over the {0 deg, 90 deg} linear basis."""

    amplitudes: tuple[complex, complex]

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (2,):
            raise ValueError("a polarization state has two amplitudes")
        if abs(np.vdot(a, a).real - 1.0) > 1e-12:
            raise ValueError("polarization state must have unit norm")
        object.__setattr__(self, "amplitudes", (complex(a[0]), complex(a[1])))

    @classmethod
    def linear(cls, angle_deg: float) -> "CopenhagenPhoton":
        t = math.radians(angle_deg)
        return cls((math.cos(t), math.sin(t)))

    def overlap2(self, axis_deg: float) -> float:
        t = math.radians(axis_deg)
        a0, a1 = self.amplitudes
        return abs(math.cos(t) * a0 + math.sin(t) * a1) ** 2


def copenhagen_probability(photon: CopenhagenPhoton, pol: Polarizer) -> float:
    eps = pol.imperfectness
    return eps + (1.0 - 2.0 * eps) * photon.overlap2(pol.axis)


def copenhagen_transmit(photon: CopenhagenPhoton, pol: Polarizer, rng: np.random.Generator):
    """Projective transmission; returns (transmitted, photon after the polarizer).

    An absorbed photon is reported in the orthogonal projected state.
    """
    passed = bool(rng.random() < copenhagen_probability(photon, pol))
    out_axis = pol.axis if passed else pol.axis + 90.0
    return passed, CopenhagenPhoton.linear(out_axis)


def chain_probability_copenhagen(alpha: float, beta: float, eps: float = 0.0) -> float:
    """Transmission through polarizers at alpha then beta of light prepared along 0 deg.

    With ``eps = 0`` this is cos^2(alpha) cos^2(alpha - beta).
    """
    return float(malus(alpha, eps) * malus(alpha - beta, eps))


# ---------------------------------------------------------------------------
# hidden-variable model


@dataclass(frozen=True)
class HVModelParams:
    sharpness: float = 1.0
    realign: float = 1.0

    def __post_init__(self):
        if not self.sharpness >= 1.0:
            raise ValueError("sharpness must be >= 1")
        if not 0.0 <= self.realign <= 1.0:
            raise ValueError("realign must be in [0, 1]")


@dataclass(frozen=True)
class HVPhoton:
    hidden_angle: float
    hidden_aux: float

    def __post_init__(self):
        if not 0.0 <= self.hidden_aux < 1.0:
            raise ValueError("hidden_aux must be in [0, 1)")
        object.__setattr__(self, "hidden_angle", reduce_angle(float(self.hidden_angle)))


def hv_kernel(delta_deg, sharpness: float):
    c2 = np.cos(np.radians(delta_deg)) ** 2
    return c2**sharpness


def hv_probability(delta_deg, params: HVModelParams, eps: float = 0.0):
    return eps + (1.0 - 2.0 * eps) * hv_kernel(delta_deg, params.sharpness)


def hv_step(lam, aux, pol: Polarizer, params: HVModelParams, fresh_aux):
    """Vectorized HV transmission. Returns (passed, new_lam, new_aux)."""
    delta = wrap_delta(pol.axis - lam)
    passed = aux < hv_probability(delta, params, pol.imperfectness)
    new_lam = np.where(passed, np.mod(lam + params.realign * delta, 180.0), lam)
    return passed, new_lam, fresh_aux


def hv_transmit(photon: HVPhoton, pol: Polarizer, params: HVModelParams, rng: np.random.Generator):
    passed, lam, aux = hv_step(
        np.array([photon.hidden_angle]),
        np.array([photon.hidden_aux]),
        pol,
        params,
        np.array([rng.random()]),
    )
    return bool(passed[0]), HVPhoton(float(lam[0]), float(aux[0]))


# ---------------------------------------------------------------------------
# two-polarizer curves


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    n_first: int
    n_second: int

    @property
    def rate(self) -> float:
        return self.n_second / self.n_first if self.n_first else float("nan")

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.n_first) if self.n_first else float("nan")


def _curve_block(args):
    model, theta, params, eps, seed, idx, k, lo, hi = args
    rng = stream(seed, _TAG_CURVE, idx, k)
    n = hi - lo
    lam = rng.uniform(0.0, 180.0, size=n)
    first, second = Polarizer(0.0, eps), Polarizer(theta, eps)
    if model == "copenhagen":
        p1 = malus(first.axis - lam, eps)
        pass1 = rng.random(n) < p1
        # re-prepared along 0 deg after the first polarizer
        pass2 = pass1 & (rng.random(n) < malus(second.axis - first.axis, eps))
    else:
        aux = rng.random(n)
        pass1, lam, aux = hv_step(lam, aux, first, params, rng.random(n))
        ok, _, _ = hv_step(lam, aux, second, params, rng.random(n))
        pass2 = pass1 & ok
    return int(pass1.sum()), int(pass2.sum())


def two_polarizer_curve(
    model: str,
    thetas,
    n_photons: int,
    seed: int,
    params: HVModelParams = HVModelParams(),
    eps: float = 0.0,
) -> list[CurvePoint]:
    """Unpolarized light through polarizers at 0 deg and theta; rate = N2 / N1."""
    if model not in ("copenhagen", "hv"):
        raise ValueError(f"unknown model {model!r}")
    out = []
    for idx, theta in enumerate(thetas):
        jobs = [(model, float(theta), params, eps, seed, idx, k, lo, hi) for k, lo, hi in blocks(n_photons)]
        counts = pmap(_curve_block, jobs)
        out.append(CurvePoint(float(theta), sum(c[0] for c in counts), sum(c[1] for c in counts)))
    return out


# ---------------------------------------------------------------------------
# EPR coincidence arrangement


class Source(enum.Enum):
    ENTANGLED_COPENHAGEN = "EntangledCopenhagen"
    COMMON_HIDDEN_ANGLE = "CommonHiddenAngle"

    @classmethod
    def parse(cls, text: str) -> "Source":
        key = text.replace("-", "").replace("_", "").lower()
        for s in cls:
            if s.value.lower() == key:
                return s
        raise ValueError(f"unknown source {text!r}")


@dataclass(frozen=True)
class CoincidenceResult:
    """Two-channel counts; '+' = transmitted, '-' = absorbed."""

    alpha: float
    beta: float
    source: Source
    n_pairs: int
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int

    @property
    def n_coincidences(self) -> int:
        return self.n_pp

    @property
    def rate(self) -> float:
        return self.n_pp / self.n_pairs

    @property
    def singles_a(self) -> int:
        return self.n_pp + self.n_pm

    @property
    def singles_b(self) -> int:
        return self.n_pp + self.n_mp

    @property
    def correlation(self) -> float:
        return (self.n_pp + self.n_mm - self.n_pm - self.n_mp) / self.n_pairs

    @property
    def correlation_stderr(self) -> float:
        e = self.correlation
        return math.sqrt(max(1.0 - e * e, 0.0) / self.n_pairs)


def _coincidence_block(args):
    alpha, beta, source, params, eps, seed, tag, k, lo, hi = args
    rng = stream(seed, _TAG_COINCIDENCE, tag, k)
    n = hi - lo
    pa, pb = Polarizer(alpha, eps), Polarizer(beta, eps)
    if source is Source.ENTANGLED_COPENHAGEN:
        # Phi+ polarization state: A's outcome is 50/50, B collapses onto
        # A's axis (transmitted) or the orthogonal axis (absorbed).
        a_pass = rng.random(n) < 0.5
        b_axis = np.where(a_pass, pa.axis, pa.axis + 90.0)
        b_pass = rng.random(n) < malus(pb.axis - b_axis, eps)
    else:
        lam = rng.uniform(0.0, 180.0, size=n)
        a_pass, _, _ = hv_step(lam, rng.random(n), pa, params, None)
        b_pass, _, _ = hv_step(lam, rng.random(n), pb, params, None)
    return (
        int(np.sum(a_pass & b_pass)),
        int(np.sum(a_pass & ~b_pass)),
        int(np.sum(~a_pass & b_pass)),
        int(np.sum(~a_pass & ~b_pass)),
    )


def coincidence_experiment(
    alpha: float,
    beta: float,
    source: Source,
    n_pairs: int,
    seed: int,
    params: HVModelParams = HVModelParams(),
    eps: float = 0.0,
    tag: int = 0,
) -> CoincidenceResult:
    """Photon pairs sent to polarizers at ``alpha`` (side A) and ``beta`` (side B).

    ``tag`` selects an independent random stream for the same seed, so the
    four settings of a CHSH run do not share photons.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    jobs = [(alpha, beta, source, params, eps, seed, tag, k, lo, hi) for k, lo, hi in blocks(n_pairs)]
    counts = np.sum(pmap(_coincidence_block, jobs), axis=0)
    return CoincidenceResult(float(alpha), float(beta), source, n_pairs, *(int(c) for c in counts))


class MismatchedExperiments(ValueError):
    pass


def bell_from_coincidences(r11, r12, r21, r22) -> tuple[float, float]:
    """B = E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2) and its standard error."""
    rs = (r11, r12, r21, r22)
    if len({r.n_pairs for r in rs}) != 1 or len({r.source for r in rs}) != 1:
        raise MismatchedExperiments("CHSH inputs must share n_pairs and source")
    if r11.alpha != r12.alpha or r21.alpha != r22.alpha or r11.beta != r21.beta or r12.beta != r22.beta:
        raise MismatchedExperiments("CHSH inputs do not form a 2x2 setting grid")
    b = r11.correlation + r12.correlation + r21.correlation - r22.correlation
    se = math.sqrt(sum(r.correlation_stderr**2 for r in rs))
    return b, se


@dataclass(frozen=True)
class ChshRun:
    results: tuple[CoincidenceResult, CoincidenceResult, CoincidenceResult, CoincidenceResult]
    value: float
    stderr: float


def chsh_experiment(
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    source: Source,
    n_pairs: int,
    seed: int,
    params: HVModelParams = HVModelParams(),
    eps: float = 0.0,
) -> ChshRun:
    settings = ((a1, b1), (a1, b2), (a2, b1), (a2, b2))
    results = tuple(
        coincidence_experiment(a, b, source, n_pairs, seed, params, eps, tag=i)
        for i, (a, b) in enumerate(settings)
    )
    value, se = bell_from_coincidences(*results)
    return ChshRun(results, value, se)


# ---------------------------------------------------------------------------
# three-polarizer minimal-transmission protocol

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, lo: float, hi: float, tol: float = 1e-4) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [lo, hi] to a bracket narrower than ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class ScanPoint:
    alpha: float
    beta_star: float
    p_min: float
    p_copenhagen: float
    n_photons: int


def _hv_survivors(alpha, params, eps, n, seed, idx):
    """Hidden angles of photons that passed the 0 deg and alpha polarizers, plus the count entering."""
    first, second = Polarizer(0.0, eps), Polarizer(alpha, eps)
    lams = []
    n_first = 0
    for k, lo, hi in blocks(n):
        rng = stream(seed, _TAG_SCAN, idx, k)
        m = hi - lo
        lam = rng.uniform(0.0, 180.0, size=m)
        pass1, lam, aux = hv_step(lam, rng.random(m), first, params, rng.random(m))
        lam, aux = lam[pass1], aux[pass1]
        n_first += int(pass1.sum())
        pass2, lam, _ = hv_step(lam, aux, second, params, None)
        lams.append(lam[pass2])
    return np.concatenate(lams), n_first


def three_polarizer_scan(
    model: str,
    alpha_grid,
    n_photons: int = 0,
    seed: int = 0,
    params: HVModelParams = HVModelParams(),
    eps: float = 0.0,
    tol: float = 1e-4,
) -> list[ScanPoint]:
    """For each alpha find the third-polarizer angle beta minimizing total transmission.

    Transmission is relative to light leaving the first (0 deg) polarizer.
    The search runs over one full period beta in [alpha, alpha + 180]; the
    reported beta is reduced to [0, 180). Copenhagen uses the closed form;
    the HV model pushes one fixed photon stream per alpha through the first
    two polarizers and averages the exact third-stage probability over the
    survivors, so the objective is deterministic and smooth in beta.
    """
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise ValueError("alpha grid is empty")
    if any(a < 0.0 or a > 90.0 for a in alphas):
        raise ValueError("alpha values must lie in [0, 90]")
    if model not in ("copenhagen", "hv"):
        raise ValueError(f"unknown model {model!r}")
    out = []
    for idx, alpha in enumerate(alphas):
        if model == "copenhagen":
            f = lambda beta, a=alpha: chain_probability_copenhagen(a, beta, eps)
            n_used = 0
        else:
            if n_photons < 1:
                raise ValueError("the HV scan needs n_photons >= 1")
            lam, n_first = _hv_survivors(alpha, params, eps, n_photons, seed, idx)
            f = lambda beta, lam=lam, n1=n_first: float(
                np.sum(hv_probability(wrap_delta(beta - lam), params, eps)) / n1
            )
            n_used = n_photons
        beta, pmin = golden_section_minimize(f, alpha, alpha + 180.0, tol)
        out.append(
            ScanPoint(
                alpha,
                reduce_angle(beta),
                pmin,
                chain_probability_copenhagen(alpha, beta, eps),
                n_used,
            )
        )
    return out
