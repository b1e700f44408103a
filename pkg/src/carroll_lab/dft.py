"""Temporal Kohn-Sham layer: one-time orbitals reproducing (n, j_t).

The effective one-body problem on a periodic temporal grid is

    (1/2mc^2) (-i hbar d_t - U_s(t))^2 phi_k + Phi_s(t) phi_k = eps_k phi_k,

with density n(t) = sum_k f_k |phi_k|^2 and gauge-covariant current
j_t(t) = (1/mc^2) sum_k f_k Re[phi_k^* (-i hbar d_t - U_s) phi_k].  U_s is
defined only up to U_s -> U_s + d_t chi with phi -> exp(i chi/hbar) phi;
(n, j_t) are invariant.  The self-consistent loop takes a pluggable
functional (n, j_t) -> (Phi_s, U_s); only external/Hartree-style toys are
bundled (no exchange-correlation functional is shipped).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import PhysParams, TemporalGrid


class SpectrumError(Exception):
    """Effective operator not bounded below on the grid."""


class NotConverged(Exception):
    """SCF loop exceeded max_iter; .history holds the residuals."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


def _as_samples(f, grid: TemporalGrid) -> np.ndarray:
    if callable(f):
        return np.asarray(f(grid.points()), dtype=float)
    out = np.asarray(f, dtype=float)
    if out.shape != (grid.n_points,):
        raise ValueError("field samples do not match the grid")
    return out


@dataclass(frozen=True)
class KsSystem:
    """Effective fields and occupations for the one-time orbital problem."""

    params: PhysParams
    grid: TemporalGrid
    phi_s: Callable | np.ndarray
    u_s: Callable | np.ndarray
    occupations: tuple[float, ...]

    def phi_samples(self) -> np.ndarray:
        return _as_samples(self.phi_s, self.grid)

    def u_samples(self) -> np.ndarray:
        return _as_samples(self.u_s, self.grid)


@dataclass(frozen=True)
class DensityPair:
    """Temporal density and current on the grid."""

    n: np.ndarray
    j_t: np.ndarray


def _energy_operator(grid: TemporalGrid, hbar: float) -> np.ndarray:
    """Dense Hermitian matrix of E = -i hbar d_t via the unitary DFT."""
    n = grid.n_points
    f = np.fft.fft(np.eye(n), axis=0) / np.sqrt(n)
    k = grid.angular_frequencies()
    e = f.conj().T @ (hbar * k[:, None] * f)
    return 0.5 * (e + e.conj().T)


def ks_solve(sys: KsSystem, n_states: int):
    """Lowest eigenpairs of the effective operator by dense diagonalization.

    Orbitals are returned L2-orthonormal on the grid.  Grid capped at 4096
    points.
    """
    grid = sys.grid
    if grid.n_points > 4096:
        raise ValueError("dense diagonalization capped at 4096 points")
    p = sys.params
    e_op = _energy_operator(grid, p.hbar)
    shifted = e_op - np.diag(sys.u_samples())
    h = shifted @ shifted / (2.0 * p.m * p.c ** 2) + np.diag(sys.phi_samples())
    h = 0.5 * (h + h.conj().T)
    evals, evecs = np.linalg.eigh(h)
    if not np.all(np.isfinite(evals)):
        raise SpectrumError("effective operator produced non-finite spectrum")
    orbitals = [evecs[:, k] / np.sqrt(grid.dt) for k in range(n_states)]
    return evals[:n_states], orbitals


def densities_from_orbitals(sys: KsSystem, orbitals: Sequence[np.ndarray]) -> DensityPair:
    """n = sum f_k |phi_k|^2 and the gauge-covariant j_t."""
    p = sys.params
    grid = sys.grid
    k = grid.angular_frequencies()
    u = sys.u_samples()
    n = np.zeros(grid.n_points)
    j = np.zeros(grid.n_points)
    for f, phi in zip(sys.occupations, orbitals):
        if f == 0.0:
            continue
        dphi = np.fft.ifft(1j * k * np.fft.fft(phi))
        shifted = -1j * p.hbar * dphi - u * phi
        n += f * np.abs(phi) ** 2
        j += f * np.real(np.conj(phi) * shifted) / (p.m * p.c ** 2)
    return DensityPair(n, j)


@dataclass
class ScfResult:
    system: KsSystem
    densities: DensityPair
    eigenvalues: np.ndarray
    orbitals: list
    history: list
    iterations: int


def scf_loop(sys: KsSystem, functional: Callable, mix: float, tol: float,
             max_iter: int = 200) -> ScfResult:
    """Linear-mixing fixed point on (n, j_t).

    functional(n, j_t) -> (Phi_s, U_s) samples (or callables).  Each
    iteration solves the orbital problem with the current fields, mixes the
    densities with weight `mix`, and rebuilds the fields from the mixed
    densities.  Converged when the max-norm density change drops below tol.
    """
    if not 0.0 < mix <= 1.0:
        raise ValueError("mix must lie in (0, 1]")
    n_states = len(sys.occupations)
    current = sys
    dens = None
    history = []
    for it in range(1, max_iter + 1):
        evals, orbs = ks_solve(current, n_states)
        fresh = densities_from_orbitals(current, orbs)
        if dens is None:
            mixed = fresh
            change = np.inf
        else:
            change = max(float(np.max(np.abs(fresh.n - dens.n))),
                         float(np.max(np.abs(fresh.j_t - dens.j_t))))
            mixed = DensityPair((1.0 - mix) * dens.n + mix * fresh.n,
                                (1.0 - mix) * dens.j_t + mix * fresh.j_t)
        history.append(change)
        dens = mixed
        phi_s, u_s = functional(dens.n, dens.j_t)
        current = KsSystem(current.params, current.grid,
                           _as_samples(phi_s, current.grid),
                           _as_samples(u_s, current.grid),
                           current.occupations)
        if change < tol:
            return ScfResult(current, dens, evals, orbs, history, it)
    raise NotConverged(f"SCF did not converge in {max_iter} iterations", history)


def hartree_toy_functional(phi_ext: np.ndarray, g_h: float,
                           u_ext: np.ndarray | None = None) -> Callable:
    """Test fixture, not a physics claim: Phi_s = Phi_ext + g_H n, U_s = U_ext."""
    def functional(n, j_t):
        u = np.zeros_like(n) if u_ext is None else u_ext
        return phi_ext + g_h * n, u
    return functional
