"""Numerical x-evolution on equal-x slices and temporal-oscillator spectra.

The outside-the-square equation

    i hbar c dPhi/dx = [ sum_i E_i^2/(2 m c^2) + V_t(t) + drive(x, t) ] Phi,
    E_i = -i hbar d/dt_i,

is stepped with a Strang split: half potential phase, full kinetic phase in
frequency space, half potential phase.  All factors are unit-modulus, so the
norm is conserved exactly.  The inside-the-square form (minimal coupling
A_i = (x/c) dV_t/dt_i) is stepped by expanding the square; the Hermitian
cross term -(A E + E A)/(2 m c^2) uses an explicit midpoint substep.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_hermite, gammaln

from .core import (BoundaryLeak, Field, PhysParams, TemporalGrid,
                   check_boundary_decay)


class UnstableModel(Exception):
    """Indefinite temporal-oscillator quadratic form."""


@dataclass(frozen=True)
class CsProblem:
    """Slice-evolution problem: temporal potential plus optional x-dependent drive."""

    params: PhysParams
    grids: tuple[TemporalGrid, ...]
    v_t: Callable | None = None          # V_t(t1, ..., tn) -> real array
    drive: Callable | None = None        # drive(x, t1, ..., tn) -> real array
    edge_threshold: float = 1e-8

    def __post_init__(self):
        grids = (self.grids,) if isinstance(self.grids, TemporalGrid) \
            else tuple(self.grids)
        if not 1 <= len(grids) <= 3:
            raise ValueError("1 to 3 temporal coordinates supported")
        object.__setattr__(self, "grids", grids)

    def meshes(self):
        return np.meshgrid(*[g.points() for g in self.grids], indexing="ij")

    def kinetic_symbol(self) -> np.ndarray:
        """sum_i hbar^2 k_i^2 / (2 m c^2) on the FFT-ordered frequency mesh."""
        p = self.params
        ks = np.meshgrid(*[g.angular_frequencies() for g in self.grids],
                         indexing="ij")
        return sum(p.hbar ** 2 * k ** 2 for k in ks) / (2.0 * p.m * p.c ** 2)

    def potential_values(self, x: float) -> np.ndarray:
        mesh = self.meshes()
        v = np.zeros(tuple(g.n_points for g in self.grids))
        if self.v_t is not None:
            v = v + self.v_t(*mesh)
        if self.drive is not None:
            v = v + self.drive(x, *mesh)
        return v


def step(problem: CsProblem, fld: Field, x: float, dx: float) -> Field:
    """One Strang step from x to x + dx (potential evaluated at x + dx/2)."""
    p = problem.params
    v = problem.potential_values(x + 0.5 * dx)
    half = np.exp(-0.5j * dx * v / (p.hbar * p.c))
    kin = np.exp(-1j * dx * problem.kinetic_symbol() / (p.hbar * p.c))
    vals = half * fld.values
    vals = np.fft.ifftn(kin * np.fft.fftn(vals))
    vals = half * vals
    out = fld.with_values(vals)
    check_boundary_decay(out, problem.edge_threshold, raise_error=True)
    return out


def propagate(problem: CsProblem, field0: Field, x0: float, x1: float,
              dx: float, observer: Callable | None = None) -> Field:
    """Compose steps from x0 to x1; observer receives (x, Field) snapshots."""
    if dx == 0:
        raise ValueError("dx must be nonzero")
    n_steps = max(1, int(round((x1 - x0) / dx)))
    dx = (x1 - x0) / n_steps
    fld = field0
    x = x0
    if observer is not None:
        observer(x, fld)
    for _ in range(n_steps):
        fld = step(problem, fld, x, dx)
        x += dx
        if observer is not None:
            observer(x, fld)
    return fld


# -- temporal oscillators ------------------------------------------------------

def v_t_oscillator(params: PhysParams, n: int) -> Callable:
    """V_t = (m omega_t^2/2) sum t_i^2 + (k_t/2) sum_{i<j} (t_i - t_j)^2."""

    def v(*ts):
        total = 0.5 * params.m * params.omega_t ** 2 * sum(t ** 2 for t in ts)
        for i in range(n):
            for j in range(i + 1, n):
                total = total + 0.5 * params.k_t * (ts[i] - ts[j]) ** 2
        return total

    return v


@dataclass(frozen=True)
class OscillatorSpectrum:
    """Normal modes of the all-to-all temporal oscillator."""

    params: PhysParams
    frequencies: np.ndarray       # omega_alpha, ascending
    modes: np.ndarray             # orthonormal columns

    def wavenumber(self, occupations: Sequence[int]) -> float:
        """Propagation eigenvalue sum_alpha hbar (omega_alpha/c)(n_alpha + 1/2)."""
        p = self.params
        occ = np.asarray(occupations, dtype=float)
        return float(np.sum(p.hbar * (self.frequencies / p.c) * (occ + 0.5)))


def oscillator_spectrum(params: PhysParams, n: int) -> OscillatorSpectrum:
    """Diagonalize m omega_t^2 I + k_t (N I - J); frequencies sqrt(kappa/m)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mat = (params.m * params.omega_t ** 2 * np.eye(n)
           + params.k_t * (n * np.eye(n) - np.ones((n, n))))
    kappa, modes = np.linalg.eigh(mat)
    if kappa.min() < -1e-12:
        raise UnstableModel(f"indefinite quadratic form, min eigenvalue {kappa.min()}")
    freqs = np.sqrt(np.clip(kappa, 0.0, None) / params.m)
    order = np.argsort(freqs)
    return OscillatorSpectrum(params, freqs[order], modes[:, order])


def hermite_mode(n: int, xi: np.ndarray, length: float) -> np.ndarray:
    """Normalized oscillator eigenfunction H_n(xi/l) exp(-xi^2/2l^2)."""
    z = xi / length
    lognorm = -0.5 * (n * np.log(2.0) + gammaln(n + 1) + 0.5 * np.log(np.pi)
                      + np.log(length))
    return np.exp(lognorm - 0.5 * z ** 2) * eval_hermite(n, z)


def oscillator_eigenstate(spec: OscillatorSpectrum, occupations: Sequence[int],
                          grids: Sequence[TemporalGrid]) -> Field:
    """Product Hermite eigenstate in normal-mode coordinates tau = modes^T t."""
    p = spec.params
    grids = tuple(grids)
    mesh = np.meshgrid(*[g.points() for g in grids], indexing="ij")
    vals = np.ones(tuple(g.n_points for g in grids), dtype=complex)
    for alpha, n_alpha in enumerate(occupations):
        tau = sum(spec.modes[i, alpha] * mesh[i] for i in range(len(grids)))
        length = np.sqrt(p.hbar / (p.m * p.c * spec.frequencies[alpha]))
        vals = vals * hermite_mode(int(n_alpha), tau, float(length))
    return Field(grids, vals)


# -- inside-the-square propagation and the gauge equivalence check -------------

def _spectral_e(values: np.ndarray, grids, axis: int, hbar: float) -> np.ndarray:
    """Apply E_i = -i hbar d/dt_i along one axis."""
    k = grids[axis].angular_frequencies()
    shape = [1] * values.ndim
    shape[axis] = k.size
    return np.fft.ifft(hbar * k.reshape(shape)
                       * np.fft.fft(values, axis=axis), axis=axis)


def _inside_step(params: PhysParams, grids, a_funcs, vals: np.ndarray,
                 x: float, dx: float) -> np.ndarray:
    """Strang step of sum_i (E_i - A_i)^2/(2 m c^2) with A_i = a_funcs[i](x, t).

    Composition: half diagonal A^2 phase, half cross substep, full kinetic,
    half cross, half diagonal.  The cross term -(A E + E A)/(2 m c^2) is
    Hermitian and is integrated with an explicit midpoint (RK2) rule.
    """
    p = params
    mesh = np.meshgrid(*[g.points() for g in grids], indexing="ij")
    xmid = x + 0.5 * dx
    a_vals = [np.asarray(a(xmid, *mesh), dtype=float) for a in a_funcs]

    diag = sum(a * a for a in a_vals) / (2.0 * p.m * p.c ** 2)
    half_diag = np.exp(-0.5j * dx * diag / (p.hbar * p.c))

    ks = np.meshgrid(*[g.angular_frequencies() for g in grids], indexing="ij")
    kin_sym = sum(p.hbar ** 2 * k ** 2 for k in ks) / (2.0 * p.m * p.c ** 2)
    kin = np.exp(-1j * dx * kin_sym / (p.hbar * p.c))

    def cross_rhs(v):
        acc = np.zeros_like(v)
        for i, a in enumerate(a_vals):
            ev = _spectral_e(v, grids, i, p.hbar)
            eav = _spectral_e(a * v, grids, i, p.hbar)
            acc = acc + a * ev + eav
        return (1j / (p.hbar * p.c)) * acc / (2.0 * p.m * p.c ** 2)

    def half_cross(v):
        lam = 0.5 * dx
        k1 = cross_rhs(v)
        vmid = v + 0.5 * lam * k1
        return v + lam * cross_rhs(vmid)

    v = half_diag * vals
    v = half_cross(v)
    v = np.fft.ifftn(kin * np.fft.fftn(v))
    v = half_cross(v)
    v = half_diag * v
    return v


def gauge_equivalence_check(params: PhysParams, v_t: Callable, x_final: float,
                            grids: Sequence[TemporalGrid], field0: Field,
                            dx: float = 1e-3,
                            dv_t: Sequence[Callable] | None = None) -> float:
    """Max-norm discrepancy between the two gauge-related propagations.

    Arm (a): outside form with potential V_t.  Arm (b): inside form with
    A_i = (x/c) dV_t/dt_i.  The arms are related by Psi = exp(i S/hbar) Phi
    with S = (x/c) V_t.  dV_t/dt_i comes from dv_t when supplied, else from
    local 4th-order differences of the sampled V_t (an FFT derivative would
    ring globally for non-periodic potentials).
    """
    grids = tuple(grids)
    p = params
    mesh = np.meshgrid(*[g.points() for g in grids], indexing="ij")
    v_vals = np.asarray(v_t(*mesh), dtype=float)

    dv = []
    for i in range(len(grids)):
        if dv_t is not None:
            dv.append(np.asarray(dv_t[i](*mesh), dtype=float))
            continue
        h = grids[i].dt
        vm = np.moveaxis(v_vals, i, 0)
        out = np.gradient(vm, h, axis=0, edge_order=2)
        out[2:-2] = (-vm[4:] + 8 * vm[3:-1] - 8 * vm[1:-3] + vm[:-4]) / (12 * h)
        dv.append(np.moveaxis(out, 0, i))

    a_funcs = [
        (lambda xx, *ts, _d=d: (xx / p.c) * _d) for d in dv
    ]

    problem = CsProblem(p, grids, v_t=v_t, edge_threshold=np.inf)
    phi = propagate(problem, field0, 0.0, x_final, dx)

    n_steps = max(1, int(round(x_final / dx)))
    ddx = x_final / n_steps
    psi_vals = np.array(field0.values, dtype=complex)
    x = 0.0
    for _ in range(n_steps):
        psi_vals = _inside_step(p, grids, a_funcs, psi_vals, x, ddx)
        x += ddx

    gauge = np.exp(1j * (x_final / p.c) * v_vals / p.hbar)
    scale = float(np.max(np.abs(field0.values)))
    return float(np.max(np.abs(psi_vals - gauge * phi.values)) / scale)


# -- quartic relative-time eigenproblem ----------------------------------------

@dataclass(frozen=True)
class QuarticEigenproblem:
    """Relative-time bound states: -(hbar^2/m c^2) phi'' + W(tau) phi = E phi,
    W(tau) = (lambda - k_t tau^2/2)^2 / (4 m c^2), a quartic well for any
    real lambda."""

    params: PhysParams
    lam: float
    grid: TemporalGrid

    def effective_potential(self, tau):
        p = self.params
        return (self.lam - 0.5 * p.k_t * np.asarray(tau) ** 2) ** 2 \
            / (4.0 * p.m * p.c ** 2)

    @property
    def kinetic_coefficient(self) -> float:
        return self.params.hbar ** 2 / (self.params.m * self.params.c ** 2)


_FD8 = np.array([-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560])


def _dense_hamiltonian(qp: QuarticEigenproblem, discretization: str) -> np.ndarray:
    g = qp.grid
    n = g.n_points
    if n > 4096:
        raise ValueError("dense diagonalization capped at 4096 points")
    tau = g.points()
    if discretization == "fd8":
        d2 = np.zeros((n, n))
        for off, coef in zip(range(-4, 5), _FD8):
            idx = np.arange(max(0, -off), min(n, n - off))
            d2[idx, idx + off] = coef / g.dt ** 2
    elif discretization == "spectral":
        k = g.angular_frequencies()
        d2 = np.fft.ifft((-k ** 2)[:, None] * np.fft.fft(np.eye(n), axis=0),
                         axis=0).real
        d2 = 0.5 * (d2 + d2.T)
    else:
        raise ValueError(f"unknown discretization {discretization!r}")
    return -qp.kinetic_coefficient * d2 + np.diag(qp.effective_potential(tau))


def quartic_eigensolve(qp: QuarticEigenproblem, n_states: int,
                       discretization: str = "fd8"):
    """Lowest n_states eigenpairs by dense Hermitian diagonalization.

    Eigenvalues ascending; eigenfunctions L2-orthonormal; BoundaryLeak if a
    returned eigenfunction has not decayed at the grid edges.
    """
    h = _dense_hamiltonian(qp, discretization)
    evals, evecs = np.linalg.eigh(h)
    dt = qp.grid.dt
    states = evecs[:, :n_states] / np.sqrt(dt)
    edge = max(1, int(np.ceil(0.02 * qp.grid.n_points)))
    worst = np.max(np.abs(np.concatenate([states[:edge], states[-edge:]])))
    if worst > 1e-8:
        raise BoundaryLeak(
            f"eigenfunction edge amplitude {worst:.2e}; widen the grid")
    return evals[:n_states], [states[:, k] for k in range(n_states)]


def _numerov_endpoints(qp: QuarticEigenproblem, energies: np.ndarray,
                       parity: int, tau_max: float, n: int) -> np.ndarray:
    """phi(tau_max; E) for a vector of energies (parity start at tau = 0)."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    h = tau_max / n
    tau = np.linspace(0.0, tau_max, n + 1)
    w = qp.effective_potential(tau)
    kin = qp.kinetic_coefficient
    # f_i = 1 + h^2 g_i / 12 with g_i = (E - W_i)/kin, per energy
    h2_12 = h * h / 12.0
    if parity == 0:
        y0 = np.ones_like(energies)
        g0 = (energies - w[0]) / kin
        f1 = 1.0 + h2_12 * (energies - w[1]) / kin
        y1 = (1.0 - 5.0 * h * h * g0 / 12.0) * y0 / f1
    else:
        y0 = np.zeros_like(energies)
        y1 = np.full_like(energies, h)
    f_prev = 1.0 + h2_12 * (energies - w[0]) / kin
    f_cur = 1.0 + h2_12 * (energies - w[1]) / kin
    for i in range(1, n):
        f_next = 1.0 + h2_12 * (energies - w[i + 1]) / kin
        y2 = ((12.0 - 10.0 * f_cur) * y1 - f_prev * y0) / f_next
        y0, y1 = y1, y2
        f_prev, f_cur = f_cur, f_next
        big = np.abs(y1) > 1e200
        if np.any(big):
            y0 = np.where(big, y0 * 1e-200, y0)
            y1 = np.where(big, y1 * 1e-200, y1)
    return y1


def quartic_shooting(qp: QuarticEigenproblem, n_states: int,
                     e_max: float | None = None, n_scan: int = 600,
                     tau_max: float | None = None, n_grid: int = 8192):
    """Independent shooting cross-check: parity Numerov + bisection.

    Scans each parity sector for sign changes of phi(tau_max; E) and
    bisects each bracket.  Returns the lowest n_states eigenvalues,
    ascending.  Uses no information from the dense diagonalization.
    """
    if tau_max is None:
        tau_max = 0.5 * qp.grid.length
    if e_max is None:
        # generous ceiling from the potential at 70% of the box
        e_max = float(qp.effective_potential(0.7 * tau_max))
    found = []
    for parity in (0, 1):
        energies = np.linspace(1e-6, e_max, n_scan)
        vals = _numerov_endpoints(qp, energies, parity, tau_max, n_grid)
        sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
        if sign_change.size == 0:
            continue
        lo = energies[sign_change]
        hi = energies[sign_change + 1]
        flo = vals[sign_change]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fmid = _numerov_endpoints(qp, mid, parity, tau_max, n_grid)
            same = np.sign(fmid) == np.sign(flo)
            lo = np.where(same, mid, lo)
            flo = np.where(same, fmid, flo)
            hi = np.where(same, hi, mid)
            if np.max(hi - lo) < 1e-13 * max(1.0, float(np.max(hi))):
                break
        found.extend((0.5 * (lo + hi)).tolist())
    found.sort()
    if len(found) < n_states:
        raise RuntimeError(
            f"shooting found only {len(found)} states below E={e_max}")
    return np.array(found[:n_states])


def collective_factor(params: PhysParams, lam: float, T):
    """First-order collective eigenfunction exp[(i/hbar)(m omega_t^2 T^3/3 + lam T)]."""
    p = params
    T = np.asarray(T, dtype=float)
    return np.exp(1j * (p.m * p.omega_t ** 2 * T ** 3 / 3.0 + lam * T) / p.hbar)
