"""Truncated Fock space, the exponential phase operator and its doubled-space completion.

Levels are |0>..|N>. Truncation spoils the algebra only near |N>, so every
identity is checked on the interior block of levels 0..N-2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .hilbert import hermitian_function, operator_norm
from .bohm import hamiltonian_matrix

INTERIOR_MARGIN = 2


@dataclass(frozen=True)
class FockSpace:
    truncation: int = 32
    omega: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.truncation < 8:
            raise ValueError("truncation must be at least 8")
        if self.omega <= 0 or self.mass <= 0 or self.hbar <= 0:
            raise ValueError("omega, mass and hbar must be positive")

    @property
    def dim(self) -> int:
        return self.truncation + 1

    @property
    def interior(self) -> slice:
        return slice(0, self.dim - INTERIOR_MARGIN)

    @cached_property
    def a(self) -> np.ndarray:
        n = np.arange(1, self.dim)
        return np.diag(np.sqrt(n).astype(complex), 1)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @cached_property
    def number(self) -> np.ndarray:
        return self.adag @ self.a

    @cached_property
    def q(self) -> np.ndarray:
        return math.sqrt(self.hbar / (2 * self.mass * self.omega)) * (self.a + self.adag)

    @cached_property
    def p(self) -> np.ndarray:
        return 1j * math.sqrt(self.mass * self.omega * self.hbar / 2) * (self.adag - self.a)

    def hamiltonian(self, from_quadratures: bool = True) -> np.ndarray:
        """p^2/2m + m w^2 q^2/2 from truncated quadratures, or w(a'a + 1/2) directly.

        The quadrature form differs from the number form only in the top
        diagonal entry, where the truncated a a' lacks the N+1 term.
        """
        if from_quadratures:
            return self.p @ self.p / (2 * self.mass) + 0.5 * self.mass * self.omega**2 * self.q @ self.q
        return self.hbar * self.omega * (self.number + 0.5 * np.eye(self.dim))

    def basis(self, n: int) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        v[n] = 1.0
        return v


def _block(m: np.ndarray, s: slice) -> np.ndarray:
    return m[s, s]


def ladder_commutators(f: FockSpace, interior: bool = True, from_quadratures: bool = True) -> tuple[float, float]:
    """Operator norms of [H,a] + w a and [H,a'] - w a'."""
    h = f.hamiltonian(from_quadratures)
    w = f.hbar * f.omega
    ra = h @ f.a - f.a @ h + w * f.a
    rd = h @ f.adag - f.adag @ h - w * f.adag
    if interior:
        ra, rd = _block(ra, f.interior), _block(rd, f.interior)
    return operator_norm(ra), operator_norm(rd)


@dataclass(frozen=True)
class BoundaryArtifact:
    truncation: int
    norm_a: float
    norm_adag: float
    lowest_affected_level: int


def commutator_artifact(f: FockSpace, tol: float = 1e-12) -> BoundaryArtifact:
    """Full-matrix ladder residuals and the lowest level touched by them.

    With H built from quadratures every nonzero residual entry touches
    level N, and the norm is sqrt(N) (N + 1) w / 2: 34 at N = 16, 93.3 at N = 32.
    """
    h = f.hamiltonian(True)
    w = f.hbar * f.omega
    ra = h @ f.a - f.a @ h + w * f.a
    rd = h @ f.adag - f.adag @ h - w * f.adag
    hit = np.argwhere((np.abs(ra) > tol) | (np.abs(rd) > tol))
    lowest = int(hit.max(axis=1).min()) if hit.size else f.dim
    return BoundaryArtifact(f.truncation, operator_norm(ra), operator_norm(rd), lowest)


def sg_operator(f: FockSpace, method: str = "jacobi") -> np.ndarray:
    """Exponential phase operator E = (a'a + 1)^(-1/2) a, so E|n> = |n-1> and E|0> = 0.

    a'a + 1 equals a a' on the untruncated space and keeps the top level
    invertible here.
    """
    root = hermitian_function(f.number + np.eye(f.dim), lambda w: w**-0.5, method=method)
    return root @ f.a


def phase_operator_defects(f: FockSpace, method: str = "jacobi") -> tuple[float, float, float]:
    """Interior operator norms of E'E - (1 - |0><0|), E E' - 1 and [H,E] + w E."""
    e = sg_operator(f, method)
    s = f.interior
    vac = np.outer(f.basis(0), f.basis(0).conj())
    eye = np.eye(f.dim)
    h = f.hamiltonian(False)
    d1 = operator_norm(_block(e.conj().T @ e - (eye - vac), s))
    d2 = operator_norm(_block(e @ e.conj().T - eye, s))
    d3 = operator_norm(_block(h @ e - e @ h + f.hbar * f.omega * e, s))
    return d1, d2, d3


@dataclass(frozen=True, eq=False)
class DoubledSpace:
    """Two ladders |n,+>, |n,->; index n for copy + and dim + n for copy -.

    E~ is the bilateral shift on the line ... |1,->, |0,->, |0,+>, |1,+> ...
    moving one step toward copy -: |n,+> -> |n-1,+>, |0,+> -> |0,->,
    |n,-> -> |n+1,->. With ``cyclic`` the open end |N,-> is sent to |N,+>,
    closing the line into a ring and making E~ exactly unitary.
    """

    fock: FockSpace
    e_tilde: np.ndarray
    cyclic: bool

    @property
    def dim(self) -> int:
        return 2 * self.fock.dim

    def plus(self, n: int) -> int:
        return n

    def minus(self, n: int) -> int:
        return self.fock.dim + n

    def interior_indices(self) -> np.ndarray:
        keep = np.arange(self.fock.dim - INTERIOR_MARGIN)
        return np.concatenate((keep, self.fock.dim + keep))

    def unitarity_defects(self, interior: bool = True) -> tuple[float, float]:
        e = self.e_tilde
        eye = np.eye(self.dim)
        g1, g2 = e.conj().T @ e - eye, e @ e.conj().T - eye
        if interior:
            idx = self.interior_indices()
            g1, g2 = g1[np.ix_(idx, idx)], g2[np.ix_(idx, idx)]
        return operator_norm(g1), operator_norm(g2)

    def copy_plus_block(self) -> np.ndarray:
        d = self.fock.dim
        return self.e_tilde[:d, :d]


def extended_phase_space(f: FockSpace, cyclic: bool = False) -> DoubledSpace:
    d = f.dim
    e = np.zeros((2 * d, 2 * d), complex)
    e[:d, :d] = sg_operator(f)
    e[d, 0] = 1.0
    for n in range(d - 1):
        e[d + n + 1, d + n] = 1.0
    if cyclic:
        e[d - 1, 2 * d - 1] = 1.0
    return DoubledSpace(f, e, cyclic)


# ---------------------------------------------------------------------------
# time operator obstruction


@dataclass(frozen=True)
class PauliCheck:
    n: int
    min_eigenvalue: float
    residual: float
    floor: float


def pauli_check(n: int = 24, dx: float = 0.1, mass: float = 1.0, hbar: float = 1.0) -> PauliCheck:
    """Best Frobenius fit of [H,T] = i hbar 1 over all matrices T, free FD Hamiltonian.

    Any commutator is traceless, so the residual is at least
    |tr(i hbar 1)| / sqrt(n) = hbar sqrt(n). The fit itself is an unconstrained
    least-squares solve on the commutator superoperator.
    """
    h = hamiltonian_matrix(n, dx, np.zeros(n), mass, hbar).toarray()
    w = np.linalg.eigvalsh(h)
    eye = np.eye(n)
    # vec([H,T]) = (1 (x) H - H^T (x) 1) vec(T) in column-major order
    sup = np.kron(eye, h) - np.kron(h.T, eye)
    target = (1j * hbar * eye).reshape(-1, order="F")
    sol, *_ = np.linalg.lstsq(sup, target, rcond=None)
    resid = float(np.linalg.norm(sup @ sol - target))
    return PauliCheck(n, float(w.min()), resid, hbar * math.sqrt(n))
