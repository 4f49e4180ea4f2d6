"""Dense complex linear algebra for small quantum systems.

States are 1-D complex arrays, operators are square 2-D complex arrays.
Everything here is a pure function; inputs are never modified.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
IMAG_TOL = 1e-10


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NotNormalizedError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_state(psi, normalized: bool = True) -> np.ndarray:
    """Validate a state vector; with ``normalized`` the unit norm is enforced."""
    v = np.asarray(psi, dtype=np.complex128)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state has non-finite amplitudes")
    if normalized:
        norm2 = np.vdot(v, v).real
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"state norm^2 = {norm2!r}, expected 1")
    return v


def normalize(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(a)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(a)
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise NotHermitianError(f"operator deviates from its adjoint by {dev:.3e}")
    return m


def expectation(op, psi, *, normalize_state: bool = False):
    """<psi|op|psi>.

    Returns a float for Hermitian ``op`` (after checking the imaginary part
    is below ``IMAG_TOL``), otherwise the complex value.
    """
    m = as_matrix(op)
    v = normalize(psi) if normalize_state else as_state(psi)
    if v.size != m.shape[0]:
        raise DimensionError(f"operator dim {m.shape[0]} != state dim {v.size}")
    val = np.vdot(v, m @ v)
    if is_hermitian(m):
        if abs(val.imag) > IMAG_TOL:
            raise ArithmeticError(f"Hermitian expectation has imaginary part {val.imag:.3e}")
        return float(val.real)
    return complex(val)


def commutator(a, b) -> np.ndarray:
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"shape mismatch {ma.shape} vs {mb.shape}")
    return ma @ mb - mb @ ma


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more operators (or states)."""
    if not ops:
        raise ValueError("tensor() needs at least one factor")
    out = np.asarray(ops[0], dtype=np.complex128)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return out


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Each rotation first removes the phase of the pivot a[p, q], then applies
    the real symmetric Jacobi rotation with |theta| <= pi/4. Sweeps stop when
    the off-diagonal Frobenius norm drops below ``tol * max(1, ||A||_F)``.

    Returns ascending eigenvalues and the unitary whose columns are the
    eigenvectors. Ties keep the order in which they leave the final sweep.
    """
    A = check_hermitian(a).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(A)))
    threshold = tol * scale

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm():
        return float(np.linalg.norm(A[offdiag]))

    for _ in range(max_sweeps):
        if off_norm() < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                alpha, beta = A[p, p].real, A[q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, beta - alpha)
                if theta > np.pi / 4:
                    theta -= np.pi / 2
                elif theta < -np.pi / 4:
                    theta += np.pi / 2
                c, s = np.cos(theta), np.sin(theta)
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on (p, q)
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * np.conj(phase) * cq
                A[:, q] = s * cp + c * np.conj(phase) * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * phase * rq
                A[q, :] = s * rp + c * phase * rq
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * np.conj(phase) * vq
                V[:, q] = s * vp + c * np.conj(phase) * vq
    else:
        if off_norm() >= threshold:
            raise ArithmeticError("Jacobi iteration did not converge")

    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def hermitian_eigensystem(op, method: str = "jacobi"):
    """Eigenvalues (ascending) and orthonormal eigenvectors (as columns).

    ``method="jacobi"`` is the in-house solver; ``"lapack"`` defers to
    ``numpy.linalg.eigh`` for hot loops.
    """
    m = check_hermitian(op)
    if method == "jacobi":
        return jacobi_eigh(m)
    if method == "lapack":
        w, v = np.linalg.eigh(m)
        return w, v
    raise ValueError(f"unknown eigensolver {method!r}")


def hermitian_function(op, f: Callable[[np.ndarray], np.ndarray], method: str = "jacobi") -> np.ndarray:
    """f(op) through the spectral decomposition."""
    w, v = hermitian_eigensystem(op, method=method)
    return (v * f(w)) @ v.conj().T


def operator_norm(a, method: str = "jacobi") -> float:
    """Largest singular value, sqrt of the top eigenvalue of A^dagger A."""
    m = as_matrix(a)
    if method == "lapack":
        return float(np.linalg.norm(m, 2))
    gram = m.conj().T @ m
    gram = 0.5 * (gram + gram.conj().T)
    w, _ = hermitian_eigensystem(gram, method=method)
    return float(np.sqrt(max(w[-1], 0.0)))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (x + x.conj().T)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))
