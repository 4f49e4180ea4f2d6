"""Bell operator B = a1 b1 + a1 b2 + a2 b1 - a2 b2 under three commutation regimes.

* ``NON_COMMUTING``: all four observables act on one space; products are
  plain matrix products and B is in general not Hermitian.
* ``CROSS_COMMUTING``: a's act on H_a, b's on H_b, products are a (x) b.
* ``ALL_COMMUTING``: all four observables are diagonal on one space.

Observables are Hermitian contractions (spectrum in [-1, 1]).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .hilbert import (
    as_state,
    check_hermitian,
    commutator,
    hermitian_eigensystem,
    operator_norm,
    tensor,
)
from .runtime import pmap, stream

SPECTRUM_TOL = 1e-10
COMMUTATOR_TOL = 1e-8


class Regime(enum.Enum):
    NON_COMMUTING = "NonCommuting"
    CROSS_COMMUTING = "CrossCommuting"
    ALL_COMMUTING = "AllCommuting"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        key = text.replace("-", "").replace("_", "").lower()
        for r in cls:
            if r.value.lower() == key:
                return r
        raise ValueError(f"unknown regime {text!r}")


# |<B>| ceilings and <BB^dagger> ceilings claimed per regime.
CEILING = {
    Regime.ALL_COMMUTING: 2.0,
    Regime.CROSS_COMMUTING: 2.0 * math.sqrt(2.0),
    Regime.NON_COMMUTING: 2.0 * math.sqrt(3.0),
}
BBDAG_CEILING = {
    Regime.ALL_COMMUTING: 4.0,
    Regime.CROSS_COMMUTING: 8.0,
    Regime.NON_COMMUTING: 12.0,
}
# The cruder estimate for non-commuting observables; used only as a sanity check.
ROUGH_BBDAG_CEILING = 16.0

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class RegimeViolation(ValueError):
    pass


class NotContraction(ValueError):
    pass


def check_contraction(op, tol: float = SPECTRUM_TOL, method: str = "jacobi") -> np.ndarray:
    m = check_hermitian(op)
    w, _ = hermitian_eigensystem(m, method=method)
    if w[0] < -1.0 - tol or w[-1] > 1.0 + tol:
        raise NotContraction(f"spectrum [{w[0]:.6g}, {w[-1]:.6g}] leaves [-1, 1]")
    return m


@dataclass(frozen=True)
class BellConfiguration:
    regime: Regime
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    state: np.ndarray

    def __post_init__(self):
        ops = [check_contraction(o) for o in (self.a1, self.a2, self.b1, self.b2)]
        for name, m in zip(("a1", "a2", "b1", "b2"), ops):
            object.__setattr__(self, name, m)
        object.__setattr__(self, "state", as_state(self.state))
        self._check_regime()

    @property
    def observables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.a1, self.a2, self.b1, self.b2

    def _check_regime(self):
        a1, a2, b1, b2 = self.observables
        if self.regime is Regime.CROSS_COMMUTING:
            da, db = a1.shape[0], b1.shape[0]
            if a2.shape[0] != da or b2.shape[0] != db:
                raise RegimeViolation("a's (and b's) must share one factor space")
            if self.state.size != da * db:
                raise RegimeViolation(f"state dim {self.state.size} != {da}*{db}")
            ia, ib = np.eye(da), np.eye(db)
            for a in (a1, a2):
                for b in (b1, b2):
                    c = commutator(tensor(a, ib), tensor(ia, b))
                    if np.linalg.norm(c) > COMMUTATOR_TOL:
                        raise RegimeViolation("[a_j, b_k] != 0 on the tensor space")
            return
        d = a1.shape[0]
        if any(o.shape[0] != d for o in self.observables) or self.state.size != d:
            raise RegimeViolation("all observables and the state must share one space")
        if self.regime is Regime.ALL_COMMUTING:
            for x, y in itertools.combinations(self.observables, 2):
                if np.linalg.norm(commutator(x, y)) > COMMUTATOR_TOL:
                    raise RegimeViolation("observables do not mutually commute")


def bell_operator(cfg: BellConfiguration) -> np.ndarray:
    a1, a2, b1, b2 = cfg.observables
    if cfg.regime is Regime.CROSS_COMMUTING:
        prod = tensor
    else:
        prod = np.matmul
    return prod(a1, b1) + prod(a1, b2) + prod(a2, b1) - prod(a2, b2)


def bell_expectation(cfg: BellConfiguration) -> complex:
    """<psi|B|psi>; complex in the NonCommuting regime."""
    psi = cfg.state
    return complex(np.vdot(psi, bell_operator(cfg) @ psi))


def bell_value(cfg: BellConfiguration) -> float:
    return abs(bell_expectation(cfg))


def bb_dagger_bound(cfg: BellConfiguration, method: str = "jacobi") -> float:
    """||B B^dagger||; |<B>| never exceeds its square root."""
    b = bell_operator(cfg)
    return operator_norm(b @ b.conj().T, method=method)


def bb_dagger_expectation(cfg: BellConfiguration) -> float:
    b = bell_operator(cfg)
    psi = cfg.state
    return float(np.vdot(psi, b @ (b.conj().T @ psi)).real)


def chsh_configuration() -> BellConfiguration:
    """Textbook CHSH setting on the singlet; |<B>| = 2 sqrt 2."""
    singlet = np.array([0, 1, -1, 0], dtype=np.complex128) / math.sqrt(2.0)
    r = 1.0 / math.sqrt(2.0)
    return BellConfiguration(
        Regime.CROSS_COMMUTING,
        PAULI_Z,
        PAULI_X,
        r * (PAULI_Z + PAULI_X),
        r * (PAULI_Z - PAULI_X),
        singlet,
    )


# ---------------------------------------------------------------------------
# classical bound


def lhv_strategies() -> list[tuple[tuple[int, int, int, int], int]]:
    """All 16 deterministic strategies (a1, a2, b1, b2) with their B value."""
    out = []
    for a1, a2, b1, b2 in itertools.product((-1, 1), repeat=4):
        out.append(((a1, a2, b1, b2), a1 * b1 + a2 * b1 + a1 * b2 - a2 * b2))
    return out


def lhv_bound() -> int:
    return max(v for _, v in lhv_strategies())


def lhv_mixture_max(n: int, seed: int) -> float:
    """Largest B over ``n`` random convex mixtures of the 16 strategies."""
    values = np.array([v for _, v in lhv_strategies()], dtype=float)
    rng = stream(seed, 0)
    weights = rng.dirichlet(np.full(16, 0.3), size=n)
    return float(np.max(weights @ values))


# ---------------------------------------------------------------------------
# random quadruples and the optimizer


def hermitian_from_params(p: np.ndarray, dim: int) -> np.ndarray:
    """Map ``dim**2`` reals to a Hermitian matrix (diag, then Re/Im of the upper triangle)."""
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = p[:dim]
    iu = np.triu_indices(dim, 1)
    k = len(iu[0])
    h[iu] = p[dim : dim + k] + 1j * p[dim + k : dim + 2 * k]
    h[(iu[1], iu[0])] = np.conj(h[iu])
    return h


def clamp_spectrum(h: np.ndarray) -> np.ndarray:
    """Clip the spectrum of a (stack of) Hermitian matrices into [-1, 1]."""
    w, v = np.linalg.eigh(h)
    w = np.clip(w, -1.0, 1.0)
    return (v * w[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def random_contraction(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return clamp_spectrum(0.5 * (x + x.conj().T))


def random_noncommuting_search(n: int, seed: int, dims=(2, 3, 4, 5, 6)) -> tuple[float, float]:
    """Max ||BB^dagger|| and max |<B>| over ``n`` random NonCommuting quadruples.

    Each sample draws four clamped random Hermitian contractions and a random
    state of a dimension cycled through ``dims``.
    """
    rng = stream(seed, 1)
    best_norm = 0.0
    best_val = 0.0
    for i in range(n):
        d = dims[i % len(dims)]
        a1, a2, b1, b2 = (random_contraction(rng, d) for _ in range(4))
        b = a1 @ b1 + a1 @ b2 + a2 @ b1 - a2 @ b2
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        best_norm = max(best_norm, operator_norm(b @ b.conj().T, method="lapack"))
        best_val = max(best_val, abs(np.vdot(psi, b @ psi)))
    return best_norm, best_val


class _Parametrization:
    """Real parameter vector <-> BellConfiguration for one regime.

    The state is reduced using the regime's symmetry: for one-space regimes a
    global unitary moves the state onto e0 (NonCommuting), or the state is a
    probability vector over the common eigenbasis (AllCommuting); for
    CrossCommuting local unitaries bring it to Schmidt form sum_i c_i |ii>.
    """

    def __init__(self, regime: Regime, dim: int):
        self.regime = regime
        self.dim = dim
        d = dim
        if regime is Regime.ALL_COMMUTING:
            self.size = 4 * d + d
        elif regime is Regime.CROSS_COMMUTING:
            self.size = 4 * d * d + d
        else:
            self.size = 4 * d * d
        # index maps reproducing hermitian_from_params in one gather
        re_idx = np.zeros((d, d), dtype=int)
        im_idx = np.zeros((d, d), dtype=int)
        im_sign = np.zeros((d, d))
        re_idx[np.diag_indices(d)] = np.arange(d)
        iu = np.triu_indices(d, 1)
        k = len(iu[0])
        re_idx[iu] = re_idx[(iu[1], iu[0])] = d + np.arange(k)
        im_idx[iu] = im_idx[(iu[1], iu[0])] = d + k + np.arange(k)
        im_sign[iu] = 1.0
        im_sign[(iu[1], iu[0])] = -1.0
        self._re_idx, self._im_idx, self._im_sign = re_idx, im_idx, im_sign

    def observables(self, p: np.ndarray) -> np.ndarray:
        d = self.dim
        if self.regime is Regime.ALL_COMMUTING:
            diag = np.clip(p[: 4 * d].reshape(4, d), -1.0, 1.0)
            out = np.zeros((4, d, d), dtype=np.complex128)
            idx = np.arange(d)
            out[:, idx, idx] = diag
            return out
        q = p[: 4 * d * d].reshape(4, d * d)
        h = q[:, self._re_idx] + 1j * (q[:, self._im_idx] * self._im_sign)
        return clamp_spectrum(h)

    def state(self, p: np.ndarray) -> np.ndarray:
        d = self.dim
        if self.regime is Regime.NON_COMMUTING:
            psi = np.zeros(d, dtype=np.complex128)
            psi[0] = 1.0
            return psi
        c = p[-d:]
        n = np.linalg.norm(c)
        c = np.full(d, 1.0 / math.sqrt(d)) if n == 0 else c / n
        if self.regime is Regime.ALL_COMMUTING:
            return c.astype(np.complex128)
        psi = np.zeros(d * d, dtype=np.complex128)
        psi[np.arange(d) * (d + 1)] = c
        return psi

    def objective(self, p: np.ndarray) -> float:
        a1, a2, b1, b2 = self.observables(p)
        d = self.dim
        if self.regime is Regime.ALL_COMMUTING:
            w = self.state(p).real ** 2
            x1, x2, y1, y2 = (np.diag(o).real for o in (a1, a2, b1, b2))
            return -abs(float(w @ (x1 * y1 + x1 * y2 + x2 * y1 - x2 * y2)))
        if self.regime is Regime.CROSS_COMMUTING:
            c = p[-d:]
            n2 = c @ c
            if n2 == 0:
                return 0.0
            m = a1 * (b1 + b2) + a2 * (b1 - b2)  # <ii|a(x)b|jj> = a_ij b_ij
            return -abs(c @ m @ c) / n2
        # <e0| a b |e0> = sum_k a[0,k] b[k,0]
        val = a1[0] @ (b1[:, 0] + b2[:, 0]) + a2[0] @ (b1[:, 0] - b2[:, 0])
        return -abs(val)

    def configuration(self, p: np.ndarray) -> BellConfiguration:
        a1, a2, b1, b2 = self.observables(p)
        return BellConfiguration(self.regime, a1, a2, b1, b2, self.state(p))


def _nelder_mead_restart(args) -> tuple[float, np.ndarray, int]:
    par, seed, max_evals = args
    rng = stream(seed, 2)
    x = rng.normal(scale=1.5, size=par.size)
    best_f, best_x, used = np.inf, x, 0
    # Re-launching from the previous optimum guards against simplex collapse.
    while used < max_evals:
        res = minimize(
            par.objective,
            best_x,
            method="Nelder-Mead",
            options={
                "maxfev": max_evals - used,
                "xatol": 1e-9,
                "fatol": 1e-14,
                "adaptive": par.size > 10,
            },
        )
        used += res.nfev
        if res.fun < best_f - 1e-13:
            best_f, best_x = float(res.fun), res.x
        else:
            break
    return -best_f, best_x, used


def maximize_violation(
    regime: Regime,
    dim: int,
    seed: int,
    restarts: int,
    max_evals: int = 100_000,
) -> tuple[float, BellConfiguration]:
    """Nelder-Mead with random restarts over observables and state.

    Restart ``i`` uses seed ``seed + i``. The reported value is recomputed
    from the reconstructed configuration, not taken from the optimizer.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    par = _Parametrization(regime, dim)
    runs = pmap(_nelder_mead_restart, [(par, seed + i, max_evals) for i in range(restarts)])
    best = max(runs, key=lambda r: r[0])
    cfg = par.configuration(best[1])
    return bell_value(cfg), cfg
