"""One-dimensional Schrödinger dynamics and its Bohm decomposition.

A wavefunction lives on the uniform grid ``x_i = x_min + i dx`` with
Dirichlet walls just outside both ends. Writing ``psi = lam exp(i Phi / hbar)``
turns the Schrödinger equation into the pair

    Phi_t + Phi_x^2 / 2m + V + V_q = 0,        V_q = -(hbar^2 / 2m) lam_xx / lam
    Phi_xx + 2 Phi_x (ln lam)_x + 2m (ln lam)_t = 0

which this module evaluates with central differences on simulated or
analytic trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse import diags, identity
from scipy.sparse.linalg import splu

NORM_TOL = 1e-8
MIN_POINTS = 64
CFL_SLACK = 1e-9


class GridMismatch(ValueError):
    pass


class AllMasked(ValueError):
    pass


def trapezoid_norm(values: np.ndarray, dx: float) -> float:
    return float(np.trapezoid(np.abs(values) ** 2, dx=dx))


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    x_min: float
    x_max: float
    values: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.size < MIN_POINTS:
            raise ValueError(f"need a 1-D grid with at least {MIN_POINTS} points")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.mass <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        norm = trapezoid_norm(v, self.dx)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"wavefunction norm {norm!r} differs from 1")

    @classmethod
    def create(cls, x_min, x_max, values, mass=1.0, hbar=1.0, t=0.0) -> "GridWavefunction":
        """Build from unnormalized samples."""
        v = np.asarray(values, dtype=np.complex128)
        dx = (x_max - x_min) / (v.size - 1)
        return cls(x_min, x_max, v / math.sqrt(trapezoid_norm(v, dx)), mass, hbar, t)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.values.size - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.values.size)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return trapezoid_norm(self.values, self.dx)

    def mean_x(self) -> float:
        return float(np.trapezoid(self.x * self.density, dx=self.dx) / self.norm())

    def std_x(self) -> float:
        mu = self.mean_x()
        return math.sqrt(float(np.trapezoid((self.x - mu) ** 2 * self.density, dx=self.dx) / self.norm()))

    def overlap(self, other: "GridWavefunction") -> complex:
        same_grid(self, other)
        return complex(np.trapezoid(np.conj(self.values) * other.values, dx=self.dx))

    def same_grid_as(self, other: "GridWavefunction") -> bool:
        return (
            self.n == other.n
            and self.x_min == other.x_min
            and self.x_max == other.x_max
            and self.mass == other.mass
            and self.hbar == other.hbar
        )


def same_grid(a: GridWavefunction, b: GridWavefunction) -> None:
    if not a.same_grid_as(b):
        raise GridMismatch("wavefunctions live on different grids")


class PotentialKind(enum.Enum):
    FREE = "Free"
    HARMONIC = "Harmonic"
    TABULATED = "Tabulated"


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """V(x). Harmonic means V = k x^2 / 2, so omega = sqrt(k / m)."""

    kind: PotentialKind = PotentialKind.FREE
    k: float = 0.0
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind is PotentialKind.HARMONIC and not self.k > 0:
            raise ValueError("harmonic potential needs k > 0")
        if self.kind is PotentialKind.TABULATED:
            if self.table is None or not np.all(np.isfinite(self.table)):
                raise ValueError("tabulated potential needs finite values")

    @classmethod
    def free(cls) -> "PotentialSpec":
        return cls(PotentialKind.FREE)

    @classmethod
    def harmonic(cls, k: float) -> "PotentialSpec":
        return cls(PotentialKind.HARMONIC, k=float(k))

    @classmethod
    def tabulated(cls, values) -> "PotentialSpec":
        t = np.array(values, dtype=float)
        t.setflags(write=False)
        return cls(PotentialKind.TABULATED, table=t)

    def on(self, x: np.ndarray) -> np.ndarray:
        if self.kind is PotentialKind.FREE:
            return np.zeros_like(x)
        if self.kind is PotentialKind.HARMONIC:
            return 0.5 * self.k * x * x
        if self.table.shape != x.shape:
            raise GridMismatch("tabulated potential does not match the grid")
        return np.asarray(self.table, dtype=float)


# ---------------------------------------------------------------------------
# time stepping

_STENCILS = {
    2: (-2.0, (1.0,)),
    4: (-30.0 / 12.0, (16.0 / 12.0, -1.0 / 12.0)),
}


def hamiltonian_matrix(n: int, dx: float, potential: np.ndarray, mass: float, hbar: float, order: int = 2):
    """Sparse finite-difference Hamiltonian with Dirichlet walls."""
    if order not in _STENCILS:
        raise ValueError("order must be 2 or 4")
    center, offs = _STENCILS[order]
    c = -hbar**2 / (2.0 * mass * dx * dx)
    bands = [np.full(n, c * center) + potential]
    offsets = [0]
    for j, w in enumerate(offs, start=1):
        bands += [np.full(n - j, c * w)] * 2
        offsets += [j, -j]
    return diags(bands, offsets, format="csc", dtype=np.complex128)


def cfl_limit(psi: GridWavefunction) -> float:
    return psi.mass * psi.dx**2 / psi.hbar


def _check_step(psi: GridWavefunction, dt: float) -> None:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > cfl_limit(psi) * (1.0 + CFL_SLACK):
        raise ValueError(f"dt={dt!r} exceeds the sanity limit m dx^2 / hbar = {cfl_limit(psi)!r}")


class CrankNicolson:
    """Factored Crank-Nicolson propagator for a fixed grid, potential and step."""

    def __init__(self, template: GridWavefunction, v: PotentialSpec, dt: float, order: int = 2):
        _check_step(template, dt)
        self.dt = dt
        h = hamiltonian_matrix(template.n, template.dx, v.on(template.x), template.mass, template.hbar, order)
        a = 0.5j * dt / template.hbar * h
        eye = identity(template.n, format="csc", dtype=np.complex128)
        self._lu = splu((eye + a).tocsc())
        self._rhs = (eye - a).tocsr()

    def step(self, values: np.ndarray, steps: int = 1) -> np.ndarray:
        for _ in range(steps):
            values = self._lu.solve(self._rhs @ values)
        return values


def evolve(psi: GridWavefunction, v: PotentialSpec, dt: float, steps: int, order: int = 2) -> GridWavefunction:
    """Advance ``psi`` by ``steps`` Crank-Nicolson steps of length ``dt``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    prop = CrankNicolson(psi, v, dt, order)
    out = prop.step(psi.values.copy(), steps)
    return replace(psi, values=out, t=psi.t + steps * dt)


def evolve_trajectory(psi, v, dt, steps, every=1, order=2) -> list[GridWavefunction]:
    """Snapshots every ``every`` steps, starting with ``psi`` itself."""
    if every < 1 or steps % every:
        raise ValueError("steps must be a positive multiple of every")
    prop = CrankNicolson(psi, v, dt, order)
    out = [psi]
    vals = psi.values.copy()
    for k in range(1, steps // every + 1):
        vals = prop.step(vals, every)
        out.append(replace(psi, values=vals, t=psi.t + k * every * dt))
    return out


# ---------------------------------------------------------------------------
# analytic states


def grid_points(x_min: float, x_max: float, n: int) -> np.ndarray:
    return np.linspace(x_min, x_max, n)


def free_gaussian(x_min, x_max, n, sigma, x0=0.0, p0=0.0, t=0.0, mass=1.0, hbar=1.0) -> GridWavefunction:
    """Exact free Gaussian packet of initial position spread ``sigma`` at time ``t``."""
    x = grid_points(x_min, x_max, n)
    tau = 1.0 + 1j * hbar * t / (2.0 * mass * sigma**2)
    xc = x0 + p0 * t / mass
    vals = (
        (2.0 * math.pi * sigma**2) ** -0.25
        / np.sqrt(tau)
        * np.exp(-((x - xc) ** 2) / (4.0 * sigma**2 * tau) + 1j * (p0 * x - p0**2 * t / (2.0 * mass)) / hbar)
    )
    return GridWavefunction.create(x_min, x_max, vals, mass, hbar, t)


def plane_wave(x_min, x_max, n, p, t=0.0, mass=1.0, hbar=1.0) -> GridWavefunction:
    x = grid_points(x_min, x_max, n)
    vals = np.exp(1j * (p * x - p * p * t / (2.0 * mass)) / hbar)
    return GridWavefunction.create(x_min, x_max, vals, mass, hbar, t)


def harmonic_eigenstates(x_min, x_max, n, k=1.0, levels=3, mass=1.0, hbar=1.0):
    """Lowest eigenpairs of the second-order finite-difference harmonic Hamiltonian.

    Returns ``[(E_h, psi), ...]`` with each state real and positive at its
    rightmost lobe.
    """
    x = grid_points(x_min, x_max, n)
    dx = x[1] - x[0]
    c = hbar**2 / (2.0 * mass * dx * dx)
    d = 2.0 * c + 0.5 * k * x * x
    e = np.full(n - 1, -c)
    w, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, levels - 1))
    out = []
    for j in range(levels):
        v = vecs[:, j]
        big = np.flatnonzero(np.abs(v) > 1e-3 * np.abs(v).max())
        if v[big[-1]] < 0:
            v = -v
        out.append((float(w[j]), GridWavefunction.create(x_min, x_max, v.astype(np.complex128), mass, hbar)))
    return out


def coherent_state(x_min, x_max, n, shift, k=1.0, mass=1.0, hbar=1.0) -> GridWavefunction:
    """Harmonic ground state displaced by ``shift``."""
    x = grid_points(x_min, x_max, n)
    mw = math.sqrt(k * mass)
    return GridWavefunction.create(x_min, x_max, np.exp(-mw * (x - shift) ** 2 / (2.0 * hbar)), mass, hbar)


# ---------------------------------------------------------------------------
# Bohm fields


@dataclass(frozen=True, eq=False)
class BohmFields:
    x: np.ndarray
    lam: np.ndarray
    phi: np.ndarray
    node_mask: np.ndarray
    mass: float
    hbar: float
    t: float = 0.0
    v_q: np.ndarray | None = None
    s_ref: np.ndarray | None = None

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def runs(self) -> list[tuple[int, int]]:
        """Unmasked index runs as half-open ``(start, stop)`` pairs."""
        return _runs(~self.node_mask)

    def reconstruct(self) -> np.ndarray:
        return self.lam * np.exp(1j * self.phi / self.hbar)


def _runs(good: np.ndarray) -> list[tuple[int, int]]:
    edges = np.diff(np.concatenate(([0], good.astype(np.int8), [0])))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def _dilate(mask: np.ndarray, cells: int) -> np.ndarray:
    out = mask.copy()
    for s in range(1, cells + 1):
        out[s:] |= mask[:-s]
        out[:-s] |= mask[s:]
    return out


def node_mask(values: np.ndarray, threshold: float = 1e-6, buffer: int = 2) -> np.ndarray:
    """Points near a node of ``values``.

    A point is a node if its amplitude is below ``threshold * max``, or if the
    straight segment to a neighbour passes that close to zero (a node lying
    between grid points). The result is dilated by ``buffer`` cells.
    """
    lam = np.abs(values)
    floor = threshold * lam.max()
    mask = lam < floor
    a, b = values[:-1], values[1:]
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(np.where(dd > 0, -np.real(np.conj(a) * d) / dd, 0.0), 0.0, 1.0)
    seg_min = np.abs(a + s * d)
    crossing = seg_min < floor
    mask[:-1] |= crossing
    mask[1:] |= crossing
    return _dilate(mask, buffer)


def decompose(
    psi: GridWavefunction,
    node_threshold: float = 1e-6,
    phi_ref: np.ndarray | None = None,
    buffer: int = 2,
) -> BohmFields:
    """Split ``psi`` into amplitude and unwrapped phase (units of action).

    The phase is unwrapped separately on every unmasked run. Each run sits on
    the branch closest to ``phi_ref`` when given (the previous time slice),
    otherwise its leftmost point is taken in (-pi hbar, pi hbar]. Masked
    points carry NaN phase.
    """
    vals = psi.values
    mask = node_mask(vals, node_threshold, buffer)
    if mask.all():
        raise AllMasked("every grid point is masked")
    lam = np.abs(vals)
    phi = np.full(vals.size, np.nan)
    two_pi = 2.0 * math.pi
    for a, b in _runs(~mask):
        run = np.unwrap(np.angle(vals[a:b]))
        if phi_ref is not None:
            ref = phi_ref[a:b] / psi.hbar
            ok = np.isfinite(ref)
            if ok.any():
                run += two_pi * np.round(np.mean(ref[ok] - run[ok]) / two_pi)
        phi[a:b] = psi.hbar * run
    return BohmFields(psi.x, lam, phi, mask, psi.mass, psi.hbar, psi.t)


def _valid_interior(mask: np.ndarray, reach: int = 2) -> np.ndarray:
    """Unmasked points whose ``reach`` neighbours on each side are unmasked and on the grid."""
    bad = _dilate(mask, reach)
    bad[:reach] = True
    bad[-reach:] = True
    return ~bad


def quantum_potential(fields: BohmFields, mass: float | None = None) -> BohmFields:
    """V_q = -(hbar^2 / 2m) lam'' / lam by central second differences; NaN where undefined."""
    m = fields.mass if mass is None else mass
    lam, dx = fields.lam, fields.dx
    ok = _valid_interior(fields.node_mask)
    vq = np.full(lam.size, np.nan)
    i = np.flatnonzero(ok)
    vq[i] = -(fields.hbar**2) / (2.0 * m) * (lam[i + 1] - 2.0 * lam[i] + lam[i - 1]) / (dx * dx * lam[i])
    return replace(fields, v_q=vq, mass=m)


def bohm_fields(psi, node_threshold=1e-6, phi_ref=None) -> BohmFields:
    return quantum_potential(decompose(psi, node_threshold, phi_ref))


def decompose_trajectory(trajectory, node_threshold=1e-6) -> list[BohmFields]:
    """Decompose slices in order, keeping each phase run on the previous slice's branch."""
    out = []
    ref = None
    for psi in trajectory:
        f = bohm_fields(psi, node_threshold, ref)
        out.append(f)
        ref = f.phi
    return out


def _check_trajectory(trajectory) -> float:
    if len(trajectory) < 3:
        raise ValueError("need at least three time slices")
    first = trajectory[0]
    for s in trajectory[1:]:
        same_grid(first, s)
    ts = np.array([s.t for s in trajectory])
    dts = np.diff(ts)
    if not np.all(dts > 0) or np.ptp(dts) > 1e-9 * dts.mean():
        raise GridMismatch("time slices must be uniformly spaced and increasing")
    return float(dts.mean())


@dataclass(frozen=True)
class Residuals:
    r_hj: float
    r_cont: float
    r_hj_without_vq: float
    points: int


def bohm_residual_detail(trajectory, v: PotentialSpec, node_threshold=1e-6, bulk: float | None = None) -> Residuals:
    """Max-norm residuals of both real equations over interior slices.

    ``bulk`` restricts the norm to points where lam >= bulk * max(lam).
    """
    tau = _check_trajectory(trajectory)
    fields = decompose_trajectory(trajectory, node_threshold)
    first = trajectory[0]
    dx, m = first.dx, first.mass
    pot = v.on(first.x)
    r_hj = r_cont = r_bare = 0.0
    count = 0
    for k in range(1, len(fields) - 1):
        prev, cur, nxt = fields[k - 1], fields[k], fields[k + 1]
        ok = _valid_interior(cur.node_mask) & ~prev.node_mask & ~nxt.node_mask
        if bulk is not None:
            ok &= cur.lam >= bulk * cur.lam.max()
        i = np.flatnonzero(ok)
        if i.size == 0:
            continue
        phi, lam = cur.phi, cur.lam
        phi_x = (phi[i + 1] - phi[i - 1]) / (2.0 * dx)
        phi_xx = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dx * dx)
        phi_t = (nxt.phi[i] - prev.phi[i]) / (2.0 * tau)
        loglam_x = (np.log(lam[i + 1]) - np.log(lam[i - 1])) / (2.0 * dx)
        loglam_t = (np.log(nxt.lam[i]) - np.log(prev.lam[i])) / (2.0 * tau)
        bare = phi_t + phi_x**2 / (2.0 * m) + pot[i]
        hj = bare + cur.v_q[i]
        cont = phi_xx + 2.0 * phi_x * loglam_x + 2.0 * m * loglam_t
        r_hj = max(r_hj, float(np.max(np.abs(hj))))
        r_cont = max(r_cont, float(np.max(np.abs(cont))))
        r_bare = max(r_bare, float(np.max(np.abs(bare))))
        count += i.size
    return Residuals(r_hj, r_cont, r_bare, count)


def bohm_residuals(trajectory, v: PotentialSpec, node_threshold=1e-6, bulk: float | None = None) -> tuple[float, float]:
    r = bohm_residual_detail(trajectory, v, node_threshold, bulk)
    return r.r_hj, r.r_cont


def bulk_points(psi: GridWavefunction, sigmas: float = 4.0) -> np.ndarray:
    mu, sd = psi.mean_x(), psi.std_x()
    return np.abs(psi.x - mu) <= sigmas * sd


def eigenstate_identity_check(
    psi_e: GridWavefunction,
    v: PotentialSpec,
    energy: float,
    node_threshold: float = 1e-6,
    sigmas: float = 4.0,
) -> float:
    """max |V + V_q - E| over unmasked points within ``sigmas`` spreads of the mean."""
    f = bohm_fields(psi_e, node_threshold)
    ok = np.isfinite(f.v_q) & bulk_points(psi_e, sigmas)
    if not ok.any():
        raise AllMasked("no valid points for the identity check")
    dev = v.on(f.x)[ok] + f.v_q[ok] - energy
    return float(np.max(np.abs(dev)))


# ---------------------------------------------------------------------------
# Hamilton-Jacobi comparison


def local_mean_momentum(fields: BohmFields) -> float:
    """Density-weighted average of the local momentum Phi_x."""
    i = np.flatnonzero(_valid_interior(fields.node_mask, 1))
    phi_x = (fields.phi[i + 1] - fields.phi[i - 1]) / (2.0 * fields.dx)
    w = fields.lam[i] ** 2
    return float(np.sum(w * phi_x) / np.sum(w))


def free_principal_function(x, t, p0, mass) -> np.ndarray:
    """Hamilton principal function of a free particle with momentum p0."""
    return p0 * np.asarray(x) - p0 * p0 * t / (2.0 * mass)


@dataclass(frozen=True, eq=False)
class HJComparison:
    times: np.ndarray
    sup_norm: np.ndarray
    center_difference: np.ndarray
    integrated_vq: np.ndarray
    r_hj: float
    r_hj_without_vq: float
    p0: float


def hamilton_jacobi_compare(
    trajectory,
    p0: float | None = None,
    node_threshold: float = 1e-6,
    bulk: float | None = 1e-3,
) -> HJComparison:
    """Compare Phi with the free principal function S along a V = 0 trajectory.

    The gauge constant is fixed once, at the packet centre of the first
    slice. ``center_difference`` follows Phi - S along the classical path of
    the centre; for any packet it should equal minus the time integral of
    V_q there, which ``integrated_vq`` accumulates by the trapezoid rule from
    the amplitude alone.
    """
    fields = decompose_trajectory(trajectory, node_threshold)
    first = trajectory[0]
    m = first.mass
    if p0 is None:
        p0 = local_mean_momentum(fields[0])
    x = first.x
    x0 = first.mean_x()
    times = np.array([s.t for s in trajectory])

    def centre_value(arr, xc):
        return float(np.interp(xc, x, arr))

    s0 = free_principal_function(x, times[0], p0, m)
    gauge = centre_value(fields[0].phi - s0, x0)
    period = 2.0 * np.pi * first.hbar
    sup, centre, vq_c = [], [], []
    prev = 0.0
    for f, t in zip(fields, times):
        d = f.phi - free_principal_function(x, t, p0, m) - gauge
        xc = x0 + p0 * (t - times[0]) / m
        # Phi is defined modulo 2 pi hbar; keep the centre value continuous in time
        d -= period * np.round((centre_value(d, xc) - prev) / period)
        ok = ~f.node_mask
        if bulk is not None:
            ok &= f.lam >= bulk * f.lam.max()
        sup.append(float(np.max(np.abs(d[ok]))))
        prev = centre_value(d, xc)
        centre.append(prev)
        vq = f.v_q
        vq_c.append(centre_value(np.where(np.isfinite(vq), vq, 0.0), xc))
    integ = np.concatenate(([0.0], np.cumsum(0.5 * (np.array(vq_c[1:]) + np.array(vq_c[:-1])) * np.diff(times))))
    res = (
        bohm_residual_detail(trajectory, PotentialSpec.free(), node_threshold, bulk)
        if len(trajectory) >= 3
        else Residuals(float("nan"), float("nan"), float("nan"), 0)
    )
    return HJComparison(times, np.array(sup), np.array(centre), integ, res.r_hj, res.r_hj_without_vq, p0)


def snapshot_table(psi: GridWavefunction, fields: BohmFields | None = None) -> np.ndarray:
    """Columns x, Re psi, Im psi, lam, Phi, V_q."""
    if fields is None:
        fields = bohm_fields(psi)
    vq = fields.v_q if fields.v_q is not None else np.full(psi.n, np.nan)
    return np.column_stack([psi.x, psi.values.real, psi.values.imag, fields.lam, fields.phi, vq])
