"""Closed-form Gaussian solutions of the spatially driven equal-x equation.

An oscillator chain U_tot = (m omega^2/2) sum x_n^2 + (k_c/2) sum (x_{n+1}-x_n)^2
drives the gauge-transformed field only through the collective force
m omega^2 U, U = sum x_j.  With x := U/N the reduced one-dimensional equation

    i hbar c dPhi/dx = -(hbar^2 / 2 m c^2) d^2Phi/dt^2 + c (t - t0) k_N x Phi,
    k_N = N m omega^2,

propagates Gaussian boundary data Phi(U=0) = f(r) G(t) in closed form.  The
formulas below are the exact solution (Fourier transform + characteristics;
every coefficient is pinned by the PDE-residual and kernel-convolution tests):

    Sigma_N^2(U) = sigma^2 + hbar^2 U^2 / (4 sigma^2 m^2 c^6 N^2)
    t_c,N(U)     = -k_N U^3 / (6 m c^3 N^3)
    chi_N(U)     = hbar U / (8 sigma^2 m c^3 N Sigma_N^2)
    theta_N(U)   = -k_N U^2 / (2 hbar N^2)          (drive phase rate)
    phi_N(U)     = -arctan(hbar U / (2 N sigma^2 m c^3))/2
                   - k_N^2 U^5 / (40 m c^3 hbar N^5)

The relative profile f(r) and coupling function C(r) ride along the slice:
C(r) enters the physical field only through the gauge phase
Psi = exp(i (t-t0) U_tot / hbar) Phi and hence the temporal current.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .core import BoundaryLeak, PhysParams


class SingularKernel(Exception):
    """K_N is singular at U = 0; use gaussian_field there."""


@dataclass(frozen=True)
class CollectiveCoords:
    """Collective coordinate U = sum x_j and relative r_a = x_a - x_N."""

    N: int
    U: float
    r: tuple[float, ...]

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if len(self.r) != self.N - 1:
            raise ValueError(f"expected {self.N - 1} relative coordinates")
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))

    @classmethod
    def from_cartesian(cls, x: Sequence[float]) -> "CollectiveCoords":
        x = [float(v) for v in x]
        n = len(x)
        return cls(n, math.fsum(x), tuple(xa - x[-1] for xa in x[:-1]))

    def to_cartesian(self) -> tuple[float, ...]:
        x_last = (self.U - math.fsum(self.r)) / self.N
        return tuple(ra + x_last for ra in self.r) + (x_last,)


def u_rel(params: PhysParams, r: Sequence[float]) -> float:
    """Relative part of the chain potential, U_tot = m omega^2 U^2/(2N) + U_rel(r)."""
    r = np.asarray(r, dtype=float)
    n = r.size + 1
    osc = 0.5 * params.m * params.omega ** 2 * (np.sum(r ** 2) - np.sum(r) ** 2 / n)
    springs = float(np.sum(np.diff(r) ** 2)) + float(r[-1] ** 2) if r.size else 0.0
    return float(osc + 0.5 * params.k_c * springs)


def c_of_r(params: PhysParams, r: Sequence[float]) -> float:
    """Coupling function C(r) = U_rel(r)/hbar; for N=2, (m omega^2/4 + k_c/2)V^2/hbar."""
    return u_rel(params, r) / params.hbar


def default_relative_profile(params: PhysParams, n_particles: int) -> Callable:
    """Normalized product Gaussian of width s_rel: int |f|^2 d^{N-1}r = 1."""
    s = params.s_rel

    def f(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        norm = (np.pi * s ** 2) ** (-0.25 * r.size)
        return norm * np.exp(-np.sum(r ** 2) / (2.0 * s ** 2))

    return f


@dataclass(frozen=True)
class GaussianSolution:
    """Closed-form driven Gaussian for N oscillators, evaluated pointwise.

    f_rel defaults to the normalized Gaussian relative profile of width
    s_rel.  drop_global_phase=True zeroes the t-independent phase phi_N
    (densities and currents are insensitive to it)."""

    params: PhysParams
    N: int
    f_rel: Callable | None = None
    drop_global_phase: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.f_rel is None:
            object.__setattr__(
                self, "f_rel", default_relative_profile(self.params, self.N))

    @property
    def k_n(self) -> float:
        return self.N * self.params.m * self.params.omega ** 2

    def sigma_n(self, U):
        p = self.params
        return np.sqrt(p.sigma ** 2 + p.hbar ** 2 * np.asarray(U) ** 2
                       / (4.0 * p.sigma ** 2 * p.m ** 2 * p.c ** 6 * self.N ** 2))

    def t_c(self, U):
        p = self.params
        return -self.k_n * np.asarray(U) ** 3 / (6.0 * p.m * p.c ** 3 * self.N ** 3)

    def chi(self, U):
        p = self.params
        return (p.hbar * np.asarray(U)
                / (8.0 * p.sigma ** 2 * p.m * p.c ** 3 * self.N
                   * self.sigma_n(U) ** 2))

    def drive_phase_rate(self, U):
        """theta_N(U): the drive contributes exp(i theta_N (t - t0))."""
        return -self.k_n * np.asarray(U) ** 2 / (2.0 * self.params.hbar * self.N ** 2)

    def global_phase(self, U):
        """Exact t-independent phase phi_N(U) (r-independent)."""
        p = self.params
        U = np.asarray(U)
        return (-0.5 * np.arctan(p.hbar * U / (2.0 * self.N * p.sigma ** 2
                                               * p.m * p.c ** 3))
                - self.k_n ** 2 * U ** 5 / (40.0 * p.m * p.c ** 3 * p.hbar
                                            * self.N ** 5))

    def u_tot(self, U, r) -> float:
        p = self.params
        return (p.m * p.omega ** 2 * np.asarray(U) ** 2 / (2.0 * self.N)
                + u_rel(p, r))

    # -- field and observables ------------------------------------------------

    def field_collective(self, U, r, t):
        """Phi(U, r, t); broadcasts over U and t."""
        p = self.params
        U = np.asarray(U, dtype=float)
        t = np.asarray(t, dtype=float)
        sig2 = self.sigma_n(U) ** 2
        s = (t - p.t0) - self.t_c(U)
        amp = (2.0 * np.pi) ** (-0.25) / np.sqrt(np.sqrt(sig2))
        phase = self.chi(U) * s ** 2 + self.drive_phase_rate(U) * (t - p.t0)
        if not self.drop_global_phase:
            phase = phase + self.global_phase(U)
        return (self.f_rel(np.asarray(r, dtype=float)) * amp
                * np.exp(-s ** 2 / (4.0 * sig2)) * np.exp(1j * phase))

    def field(self, x: Sequence[float], t):
        cc = CollectiveCoords.from_cartesian(x)
        return self.field_collective(cc.U, cc.r, t)

    def original_field(self, x: Sequence[float], t):
        """Psi = exp(i (t - t0) U_tot / hbar) Phi (so |Psi|^2 = |Phi|^2)."""
        cc = CollectiveCoords.from_cartesian(x)
        p = self.params
        gauge = np.exp(1j * (np.asarray(t) - p.t0)
                       * self.u_tot(cc.U, cc.r) / p.hbar)
        return gauge * self.field_collective(cc.U, cc.r, t)

    def density(self, x: Sequence[float], t):
        return np.abs(self.field(x, t)) ** 2

    def current(self, x: Sequence[float], t, reduced: bool = False):
        """Temporal current J_t = (hbar / m c^3) Im[Psi* dPsi/dt].

        The drive phase cancels the collective part of the gauge phase, so

            J = rho [ hbar C(r)/(m c^3)
                      + hbar^2 U s / (4 sigma^2 m^2 c^6 N Sigma_N^2) ].

        reduced=True drops the gauge term and adds the drive rate instead:
        the current of the reduced field Phi, which satisfies the slice
        continuity equation d_x rho + d_t J = 0 exactly.
        """
        p = self.params
        cc = CollectiveCoords.from_cartesian(x)
        U = cc.U
        rho = np.abs(self.field_collective(U, cc.r, t)) ** 2
        s = (np.asarray(t) - p.t0) - self.t_c(U)
        drift = (p.hbar ** 2 * U * s
                 / (4.0 * p.sigma ** 2 * p.m ** 2 * p.c ** 6 * self.N
                    * self.sigma_n(U) ** 2))
        if reduced:
            base = p.hbar * self.drive_phase_rate(U) / (p.m * p.c ** 3)
        else:
            base = p.hbar * c_of_r(p, cc.r) / (p.m * p.c ** 3)
        return rho * (base + drift)

    def kernel(self, U, r, t, t_prime):
        """Exact propagation kernel K_N(U, r; t, t'), singular at U = 0.

        The coupling function does not enter the kernel (the reduced
        equation carries no C(r)); r is accepted for interface symmetry.
        """
        p = self.params
        U = np.asarray(U, dtype=float)
        if np.any(U == 0.0):
            raise SingularKernel("kernel is singular at U = 0")
        t = np.asarray(t, dtype=float)
        s_k = (t - np.asarray(t_prime, dtype=float)) - self.t_c(U)
        pref = np.sqrt(p.m * p.c ** 3 * self.N
                       / (2.0 * np.pi * 1j * p.hbar * U))
        phase = (p.m * p.c ** 3 * self.N * s_k ** 2 / (2.0 * p.hbar * U)
                 + self.drive_phase_rate(U) * (t - p.t0)
                 - self.k_n ** 2 * U ** 5
                 / (40.0 * p.m * p.c ** 3 * p.hbar * self.N ** 5))
        return pref * np.exp(1j * phase)


# -- two-body expressions written out with k_eff = 2 m omega^2 ----------------
# Independent code path; must agree with GaussianSolution at N = 2.

def two_body_solution(params: PhysParams, f_rel=None) -> "TwoBodySolution":
    return TwoBodySolution(params, f_rel)


@dataclass(frozen=True)
class TwoBodySolution:
    """N = 2 closed forms in (U = x1 + x2, V = x1 - x2) with k_eff = 2 m omega^2."""

    params: PhysParams
    f_rel: Callable | None = None

    def __post_init__(self):
        if self.f_rel is None:
            object.__setattr__(
                self, "f_rel", default_relative_profile(self.params, 2))

    @property
    def k_eff(self) -> float:
        return 2.0 * self.params.m * self.params.omega ** 2

    def c_of_v(self, V):
        p = self.params
        return (p.m * p.omega ** 2 / 4.0 + p.k_c / 2.0) * np.asarray(V) ** 2 / p.hbar

    def sigma(self, U):
        p = self.params
        return np.sqrt(p.sigma ** 2 + p.hbar ** 2 * np.asarray(U) ** 2
                       / (16.0 * p.sigma ** 2 * p.m ** 2 * p.c ** 6))

    def t_c(self, U):
        p = self.params
        return -self.k_eff * np.asarray(U) ** 3 / (48.0 * p.m * p.c ** 3)

    def chi(self, U):
        p = self.params
        return (p.hbar * np.asarray(U)
                / (16.0 * p.sigma ** 2 * p.m * p.c ** 3 * self.sigma(U) ** 2))

    def drive_phase_rate(self, U):
        return -self.k_eff * np.asarray(U) ** 2 / (8.0 * self.params.hbar)

    def global_phase(self, U):
        p = self.params
        U = np.asarray(U)
        return (-0.5 * np.arctan(p.hbar * U / (4.0 * p.sigma ** 2 * p.m * p.c ** 3))
                - self.k_eff ** 2 * U ** 5 / (1280.0 * p.hbar * p.m * p.c ** 3))

    def field(self, x1, x2, t):
        p = self.params
        U = np.asarray(x1) + np.asarray(x2)
        V = np.asarray(x1) - np.asarray(x2)
        sig2 = self.sigma(U) ** 2
        s = (np.asarray(t) - p.t0) - self.t_c(U)
        amp = (2.0 * np.pi) ** (-0.25) / np.sqrt(np.sqrt(sig2))
        phase = (self.chi(U) * s ** 2
                 + self.drive_phase_rate(U) * (np.asarray(t) - p.t0)
                 + self.global_phase(U))
        return self.f_rel(V) * amp * np.exp(-s ** 2 / (4.0 * sig2)) \
            * np.exp(1j * phase)

    def density(self, x1, x2, t):
        return np.abs(self.field(x1, x2, t)) ** 2

    def current(self, x1, x2, t):
        p = self.params
        U = np.asarray(x1) + np.asarray(x2)
        V = np.asarray(x1) - np.asarray(x2)
        rho = self.density(x1, x2, t)
        s = (np.asarray(t) - p.t0) - self.t_c(U)
        drift = (p.hbar ** 2 * U * s
                 / (8.0 * p.sigma ** 2 * p.m ** 2 * p.c ** 6 * self.sigma(U) ** 2))
        return rho * (p.hbar * self.c_of_v(V) / (p.m * p.c ** 3) + drift)

    def kernel(self, U, V, t, t_prime):
        p = self.params
        U = np.asarray(U, dtype=float)
        if np.any(U == 0.0):
            raise SingularKernel("kernel is singular at U = 0")
        s_k = (np.asarray(t) - np.asarray(t_prime)) - self.t_c(U)
        pref = np.sqrt(p.m * p.c ** 3 / (np.pi * 1j * p.hbar * U))
        phase = (p.m * p.c ** 3 * s_k ** 2 / (p.hbar * U)
                 + self.drive_phase_rate(U) * (np.asarray(t) - p.t0)
                 - self.k_eff ** 2 * U ** 5 / (1280.0 * p.hbar * p.m * p.c ** 3))
        return pref * np.exp(1j * phase)


# -- module-level convenience wrappers ----------------------------------------

def kernel_n(params: PhysParams, N: int, U, r, t, t_prime):
    return GaussianSolution(params, N).kernel(U, r, t, t_prime)


def gaussian_field(params: PhysParams, N: int, x, t, f_rel=None,
                   drop_global_phase: bool = False):
    return GaussianSolution(params, N, f_rel, drop_global_phase).field(x, t)


def density_n(params: PhysParams, N: int, x, t, f_rel=None):
    return GaussianSolution(params, N, f_rel).density(x, t)


def current_n(params: PhysParams, N: int, x, t, f_rel=None, reduced: bool = False):
    return GaussianSolution(params, N, f_rel).current(x, t, reduced=reduced)


def propagate_boundary_data(sol: GaussianSolution, U, r, t, boundary,
                            window: float = 40.0, tol: float = 1e-10):
    """Quadrature oracle: int K_N(U, r; t, t') boundary(t') dt'.

    Adaptive Gauss-Kronrod on real and imaginary parts, absolute tolerance
    tol, window [t0 - window, t0 + window].
    """
    t0 = sol.params.t0

    def integrand(tp):
        return sol.kernel(U, r, t, tp) * boundary(tp)

    lo, hi = t0 - window, t0 + window
    re = quad(lambda y: integrand(y).real, lo, hi, limit=800,
              epsabs=tol, epsrel=tol)[0]
    im = quad(lambda y: integrand(y).imag, lo, hi, limit=800,
              epsabs=tol, epsrel=tol)[0]
    return re + 1j * im


def one_body_marginals(params: PhysParams, x1_grid, t, N: int = 2, f_rel=None,
                       window: float | None = None, tol: float = 1e-10):
    """rho_1(x1, t) = int rho_t^(2) dx2 and J_1(x1, t) = int J_t^(2) dx2.

    Gauss-Kronrod over x2 on a window wide enough that the integrand decays
    below 1e-10 at the edges (BoundaryLeak otherwise).  N is fixed at 2.
    """
    if N != 2:
        raise ValueError("one-body marginals are implemented for N = 2")
    sol = GaussianSolution(params, 2, f_rel)
    x1_grid = np.atleast_1d(np.asarray(x1_grid, dtype=float))
    if window is None:
        window = 12.0 * params.s_rel + 4.0 * max(abs(x1_grid.min()),
                                                 abs(x1_grid.max())) + 10.0

    rho1 = np.empty_like(x1_grid)
    j1 = np.empty_like(x1_grid)
    for i, x1 in enumerate(x1_grid):
        lo, hi = x1 - window, x1 + window

        def rho_ig(x2, x1=x1):
            return sol.density((x1, x2), t)

        def j_ig(x2, x1=x1):
            return sol.current((x1, x2), t)

        peak = max(rho_ig(x1), 1e-300)
        if max(rho_ig(lo), rho_ig(hi)) > 1e-10 * peak + 1e-30:
            raise BoundaryLeak(
                f"marginal integrand not decayed at window edges for x1={x1}")
        rho1[i] = quad(rho_ig, lo, hi, limit=400, epsabs=tol)[0]
        j1[i] = quad(j_ig, lo, hi, limit=400, epsabs=tol)[0]
    return rho1, j1
