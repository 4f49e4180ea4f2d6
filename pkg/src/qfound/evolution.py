"""Irreversibility diagnostics for free motion and a directional decay toy.

The dilation observable R = (pq + qp)/2 separates incoming (<R> < 0) from
outgoing (<R> > 0) states. Under free evolution d<R>/dt = <p^2>/m > 0, so
every packet drifts from the incoming to the outgoing side exactly once.
A three-block stochastic generator In -> Resonance -> Out models a
resonance that decays one way only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .bohm import CrankNicolson, GridWavefunction, PotentialSpec, cfl_limit, evolve

NOISE_FLOOR = 1e-9
AMBIGUOUS_FACTOR = 10.0


class SubspaceTag(enum.Enum):
    IN = "In"
    RESONANCE = "Resonance"
    OUT = "Out"


class AmbiguousRegion(ValueError):
    """<R> is too close to zero to call; the packet is in transit."""


# ---------------------------------------------------------------------------
# R observable


def _spectral_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """d/dx on a zero-padded periodic extension (padding doubles the box)."""
    n = values.size
    pad = n // 2
    ext = np.concatenate((np.zeros(pad, complex), values, np.zeros(pad, complex)))
    k = 2.0 * math.pi * np.fft.fftfreq(ext.size, dx)
    if ext.size % 2 == 0:
        k[ext.size // 2] = 0.0
    d = np.fft.ifft(1j * k * np.fft.fft(ext))
    return d[pad : pad + n]


def momentum_apply(psi: GridWavefunction) -> np.ndarray:
    return -1j * psi.hbar * _spectral_derivative(psi.values, psi.dx)


def r_expectation(psi: GridWavefunction) -> float:
    """<(pq + qp)/2> = Re <q psi | p psi>."""
    p_psi = momentum_apply(psi)
    q_psi = psi.x * psi.values
    return float(np.real(np.vdot(q_psi, p_psi)) * psi.dx)


def r_expectation_complex(psi: GridWavefunction) -> complex:
    """<p q> alone; its real part is <R> and its imaginary part is -hbar/2."""
    q_psi = psi.x * psi.values
    p_q_psi = -1j * psi.hbar * _spectral_derivative(q_psi, psi.dx)
    return complex(np.vdot(psi.values, p_q_psi) * psi.dx)


def p2_expectation(psi: GridWavefunction) -> float:
    p_psi = momentum_apply(psi)
    return float(np.real(np.vdot(p_psi, p_psi)) * psi.dx)


def mirror(psi: GridWavefunction) -> GridWavefunction:
    """psi(-x); requires a grid symmetric about the origin."""
    if not math.isclose(psi.x_min, -psi.x_max):
        raise ValueError("mirroring needs a grid symmetric about x = 0")
    return replace(psi, values=psi.values[::-1])


def time_reverse(psi: GridWavefunction) -> GridWavefunction:
    return replace(psi, values=np.conj(psi.values))


@dataclass(frozen=True, eq=False)
class RTrace:
    t: np.ndarray
    r: np.ndarray
    p2: np.ndarray
    mass: float

    def slope(self) -> np.ndarray:
        """Numerical d<R>/dt at interior samples (central differences)."""
        return (self.r[2:] - self.r[:-2]) / (self.t[2:] - self.t[:-2])

    def predicted_slope(self) -> np.ndarray:
        return self.p2[1:-1] / self.mass

    def strictly_increasing(self, tol: float = 1e-10) -> bool:
        return bool(np.all(np.diff(self.r) > -tol))


def monotonicity_trace(psi0: GridWavefunction, dt: float, steps: int, every: int = 1, order: int = 4) -> RTrace:
    """<R> and <p^2> along a free trajectory, sampled every ``every`` steps."""
    if steps % every:
        raise ValueError("steps must be a multiple of every")
    prop = CrankNicolson(psi0, PotentialSpec.free(), dt, order)
    vals = psi0.values.copy()
    ts, rs, p2s = [], [], []
    for k in range(steps // every + 1):
        if k:
            vals = prop.step(vals, every)
        snap = replace(psi0, values=vals, t=psi0.t + k * every * dt)
        ts.append(snap.t)
        rs.append(r_expectation(snap))
        p2s.append(p2_expectation(snap))
    return RTrace(np.array(ts), np.array(rs), np.array(p2s), psi0.mass)


def classify_in_out(psi: GridWavefunction, noise_floor: float = NOISE_FLOOR) -> SubspaceTag:
    r = r_expectation(psi)
    if abs(r) <= AMBIGUOUS_FACTOR * noise_floor:
        raise AmbiguousRegion(f"<R> = {r:.3e} is within the transit band")
    return SubspaceTag.IN if r < 0 else SubspaceTag.OUT


def _advance(psi: GridWavefunction, h: float, order: int) -> GridWavefunction:
    """Free evolution by ``h`` using the fewest equal steps the step limit allows."""
    if h == 0:
        return psi
    k = max(1, math.ceil(h / cfl_limit(psi)))
    return evolve(psi, PotentialSpec.free(), h / k, k, order)


@dataclass(frozen=True)
class TransitReport:
    times: tuple[float, ...]
    r_values: tuple[float, ...]
    labels: tuple[str, ...]

    def phases(self) -> list[str]:
        """Labels with consecutive repeats collapsed."""
        out: list[str] = []
        for lab in self.labels:
            if not out or out[-1] != lab:
                out.append(lab)
        return out

    def transitions(self) -> int:
        return len(self.phases()) - 1


def _label(psi):
    try:
        return classify_in_out(psi).value
    except AmbiguousRegion:
        return "ambiguous"


def transit(psi0: GridWavefunction, dt: float, steps: int, every: int = 1, order: int = 4, max_bisect: int = 200) -> TransitReport:
    """Classify samples of a free trajectory and resolve every sign change of <R>.

    Between two samples of opposite sign the crossing time is bisected,
    re-evolving from the earlier sample, until a state inside the ambiguous
    band is found; that state is inserted into the report.
    """
    prop = CrankNicolson(psi0, PotentialSpec.free(), dt, order)
    snaps = [psi0]
    vals = psi0.values.copy()
    for k in range(1, steps // every + 1):
        vals = prop.step(vals, every)
        snaps.append(replace(psi0, values=vals, t=psi0.t + k * every * dt))
    times, rs, labels = [], [], []
    for a, b in zip(snaps, snaps[1:] + [None]):
        ra = r_expectation(a)
        times.append(a.t)
        rs.append(ra)
        labels.append(_label(a))
        if b is None:
            continue
        rb = r_expectation(b)
        if labels[-1] != "ambiguous" and _label(b) != "ambiguous" and (ra < 0) != (rb < 0):
            lo, hi = 0.0, b.t - a.t
            for _ in range(max_bisect):
                mid = 0.5 * (lo + hi)
                m = _advance(a, mid, order)
                rm = r_expectation(m)
                if abs(rm) <= AMBIGUOUS_FACTOR * NOISE_FLOOR:
                    times.append(m.t)
                    rs.append(rm)
                    labels.append("ambiguous")
                    break
                if (rm < 0) == (ra < 0):
                    lo = mid
                else:
                    hi = mid
            else:
                raise RuntimeError("bisection did not reach the ambiguous band")
    return TransitReport(tuple(times), tuple(rs), tuple(labels))


# ---------------------------------------------------------------------------
# directional decay toy


class NonConservativeGenerator(ValueError):
    pass


class BackCoupling(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DecayModel:
    """Population generator on In (+) Resonance (+) Out; dP/dt = G P, columns sum to zero.

    Build with :meth:`build` from rates, or hand a generator to the
    constructor, which validates conservation and the one-way structure.
    """

    n_in: int
    n_res: int
    n_out: int
    gamma: float
    generator: np.ndarray

    def __post_init__(self):
        if min(self.n_in, self.n_res, self.n_out) < 1:
            raise ValueError("every block needs at least one state")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        g = np.array(self.generator, dtype=float)
        n = self.n_in + self.n_res + self.n_out
        if g.shape != (n, n):
            raise ValueError("generator shape does not match the block sizes")
        off = g - np.diag(np.diag(g))
        if np.any(off < 0):
            raise NonConservativeGenerator("off-diagonal rates must be non-negative")
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g.sum(axis=0))) > 1e-12 * scale:
            raise NonConservativeGenerator("generator columns must sum to zero")
        i, r, o = self.slices
        for to, frm, name in ((i, r, "Res->In"), (i, o, "Out->In"), (r, o, "Out->Res")):
            if np.any(g[to, frm] != 0):
                raise BackCoupling(f"{name} block must be exactly zero")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def slices(self):
        a, b = self.n_in, self.n_in + self.n_res
        return slice(0, a), slice(a, b), slice(b, b + self.n_out)

    @classmethod
    def build(cls, n_in=1, n_res=1, n_out=1, gamma=1.0, kappa=0.0, mixing=0.0) -> "DecayModel":
        """In -> Res at total rate ``kappa``, Res -> Out at ``gamma``, Res <-> Res at ``mixing``."""
        n = n_in + n_res + n_out
        g = np.zeros((n, n))
        i0, r0 = n_in, n_in + n_res
        g[i0:r0, :i0] += kappa / n_res
        g[r0:, i0:r0] += gamma / n_out
        if n_res > 1 and mixing > 0:
            g[i0:r0, i0:r0] += mixing / (n_res - 1)
            g[np.arange(i0, r0), np.arange(i0, r0)] = 0.0
        g[np.arange(n), np.arange(n)] = -g.sum(axis=0)
        return cls(n_in, n_res, n_out, gamma, g)

    def resonance_start(self) -> np.ndarray:
        p = np.zeros(self.generator.shape[0])
        p[self.slices[1]] = 1.0 / self.n_res
        return p


def uniformized_propagate(g: np.ndarray, p0: np.ndarray, t: float, tail: float = 1e-17) -> np.ndarray:
    """exp(G t) p0 by uniformization: a Poisson mixture of powers of I + G / L.

    Every term is a non-negative combination, so structurally unreachable
    states stay exactly zero.
    """
    lam = float(np.max(-np.diag(g)))
    if lam == 0.0 or t == 0.0:
        return p0.copy()
    m = np.eye(g.shape[0]) + g / lam
    mu = lam * t
    # log-space Poisson weights avoid underflow for large mu
    kmax = int(mu + 12.0 * math.sqrt(mu) + 40)
    out = np.zeros_like(p0)
    v = p0.copy()
    acc = 0.0
    for k in range(kmax + 1):
        w = math.exp(-mu + k * math.log(mu) - math.lgamma(k + 1))
        out += w * v
        acc += w
        if 1.0 - acc < tail and k > mu:
            break
        v = m @ v
    return out


@dataclass(frozen=True, eq=False)
class DecayTrace:
    t: np.ndarray
    p_in: np.ndarray
    p_res: np.ndarray
    p_out: np.ndarray

    def total(self) -> np.ndarray:
        return self.p_in + self.p_res + self.p_out


def resonance_decay(model: DecayModel, t_grid, p0: np.ndarray | None = None) -> DecayTrace:
    t = np.asarray(t_grid, dtype=float)
    if p0 is None:
        p0 = model.resonance_start()
    i, r, o = model.slices
    rows = []
    for tk in t:
        p = uniformized_propagate(model.generator, p0, tk)
        if abs(p.sum() - 1.0) > 1e-9:
            raise NonConservativeGenerator("probability drifted during propagation")
        rows.append((p[i].sum(), p[r].sum(), p[o].sum()))
    a = np.array(rows)
    return DecayTrace(t, a[:, 0], a[:, 1], a[:, 2])


def fit_exponential(t, y) -> tuple[float, float]:
    """Least-squares log-linear fit y ~ exp(-g t); returns (g, relative RMSE of the fit)."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    slope, icpt = np.polyfit(t, np.log(y), 1)
    model = np.exp(icpt + slope * t)
    return float(-slope), float(np.sqrt(np.mean(((y - model) / model) ** 2)))
