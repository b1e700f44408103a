"""Mean-field temporal gas: contact-limit evolution and the dimensionless DNLS.

The full mean-field equation (external U(x,t) plus contact strength g(x)) is

    i hbar c d_x phi = -(hbar^2/2mc^2) d_t^2 phi
                       + (i hbar/2mc^2)(d_t U) phi + (i hbar/mc^2) U d_t phi
                       + (2 i hbar g/mc) |phi|^2 d_t phi
                       + [U^2 + 4 c g U |phi|^2 + 3 c^2 g^2 |phi|^4] phi/(2mc^2).

With U = 0 and constant g0, rescaling x = L X, t = tau T, phi = A psi with
L = 2 m c^3 tau^2/hbar and A = sqrt(hbar/(4 g0 c tau)) yields

    i d_X psi + d_T^2 psi - i |psi|^2 d_T psi - (3/16) |psi|^4 psi = 0,

whose quintic coefficient BETA = -3/16 is fixed by the minimal-coupling
structure and is not configurable anywhere in this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Final

import numpy as np

from .core import Field, PhysParams, TemporalGrid

BETA: Final[float] = -3.0 / 16.0


class StepTooLarge(Exception):
    """dX exceeds the stability budget dT^2/4."""


@dataclass(frozen=True)
class MeanFieldProblem:
    """Contact-limit mean-field problem on one temporal grid."""

    params: PhysParams
    grid: TemporalGrid
    u_ext: Callable | None = None        # U(x, t) -> real
    g: Callable | float | None = None    # g(x) -> real; default constant g0

    def g_of(self, x: float) -> float:
        if self.g is None:
            return self.params.g0
        if callable(self.g):
            return float(self.g(x))
        return float(self.g)


def mean_field_rhs(p: MeanFieldProblem, x: float, phi: Field) -> Field:
    """Right-hand side of i hbar c d_x phi = ... evaluated spectrally."""
    pr = p.params
    t = p.grid.points()
    k = p.grid.angular_frequencies()
    vals = phi.values
    dphi = np.fft.ifft(1j * k * np.fft.fft(vals))
    d2phi = np.fft.ifft(-(k ** 2) * np.fft.fft(vals))
    dens = np.abs(vals) ** 2
    g = p.g_of(x)

    rhs = -pr.hbar ** 2 / (2 * pr.m * pr.c ** 2) * d2phi
    rhs = rhs + 2j * pr.hbar * g / (pr.m * pr.c) * dens * dphi
    rhs = rhs + 3.0 * pr.c ** 2 * g ** 2 / (2 * pr.m * pr.c ** 2) * dens ** 2 * vals

    if p.u_ext is not None:
        u = np.asarray(p.u_ext(x, t), dtype=float)
        du = np.fft.ifft(1j * k * np.fft.fft(u + 0j)).real
        rhs = rhs + 1j * pr.hbar / (2 * pr.m * pr.c ** 2) * du * vals
        rhs = rhs + 1j * pr.hbar / (pr.m * pr.c ** 2) * u * dphi
        rhs = rhs + (u ** 2 + 4.0 * pr.c * g * u * dens) \
            / (2 * pr.m * pr.c ** 2) * vals
    return phi.with_values(rhs)


@dataclass(frozen=True)
class DnlsScales:
    """Physical <-> dimensionless rescaling; beta is the fixed constant."""

    params: PhysParams
    tau_pulse: float

    def __post_init__(self):
        if self.tau_pulse <= 0:
            raise ValueError("tau_pulse must be positive")
        if self.params.g0 <= 0:
            raise ValueError("g0 must be positive to define the amplitude scale")

    @property
    def length(self) -> float:
        p = self.params
        return 2.0 * p.m * p.c ** 3 * self.tau_pulse ** 2 / p.hbar

    @property
    def amplitude(self) -> float:
        p = self.params
        return np.sqrt(p.hbar / (4.0 * p.g0 * p.c * self.tau_pulse))

    @property
    def beta(self) -> float:
        return BETA


def to_dimensionless(scales: DnlsScales, phi: Field, x: float):
    """(phi(t), x) -> (psi(T), X): T = t/tau, X = x/L, psi = phi/A.  Exact."""
    g = phi.grid
    tgrid = TemporalGrid(g.t_min / scales.tau_pulse, g.t_max / scales.tau_pulse,
                         g.n_points)
    return Field((tgrid,), phi.values / scales.amplitude), x / scales.length


def from_dimensionless(scales: DnlsScales, psi: Field, x_dimless: float):
    """Exact inverse of to_dimensionless."""
    g = psi.grid
    tgrid = TemporalGrid(g.t_min * scales.tau_pulse, g.t_max * scales.tau_pulse,
                         g.n_points)
    return Field((tgrid,), psi.values * scales.amplitude), \
        x_dimless * scales.length


def solitary_wave(a0: float, v: float, x: float, t_grid: np.ndarray,
                  time_reflect: bool = False) -> np.ndarray:
    """Exact solitary wave of the dimensionless equation at position X = x.

    The traveling ansatz psi = A(xi) exp(i phi(xi) + i mu X), xi = T - v X,
    forces the chirp phi' = v/2 + A^2/4, whose induced quintic term cancels
    against BETA = -3/16 exactly, leaving the plain cubic ODE
    A'' + (v^2/4 - mu) A + (v/2) A^3 = 0 with the sech solution

        A = a0 sech(kappa xi),  kappa = a0 sqrt(v)/2,  mu = v^2/4 + kappa^2,
        phi = v xi/2 + (a0^2/(4 kappa)) tanh(kappa xi).

    Any other quintic coefficient destroys the cancellation, so this family
    doubles as a sensitive probe of the fixed -3/16.  Needs v > 0 (v < 0
    with time_reflect=True gives the mirrored branch).
    """
    if v <= 0:
        raise ValueError("solitary wave needs v > 0")
    t = np.asarray(t_grid, dtype=float)
    if time_reflect:
        t = -t
    kappa = 0.5 * a0 * np.sqrt(v)
    mu = 0.25 * v * v + kappa * kappa
    xi = t - v * x
    amp = a0 / np.cosh(kappa * xi)
    phase = 0.5 * v * xi + (a0 * a0 / (4.0 * kappa)) * np.tanh(kappa * xi) \
        + mu * x
    return amp * np.exp(1j * phase)


# -- dimensionless split-step solver --------------------------------------------

def _nonlinear_rate(vals: np.ndarray, k: np.ndarray,
                    time_reflect: bool) -> np.ndarray:
    """d_X psi from the nonlinear terms: |psi|^2 d_T psi - i (3/16)|psi|^4 psi
    (cubic sign flips to -|psi|^2 d_T psi under the T -> -T mapped form)."""
    dens = np.abs(vals) ** 2
    dpsi = np.fft.ifft(1j * k * np.fft.fft(vals))
    cubic_sign = -1.0 if time_reflect else 1.0
    return cubic_sign * dens * dpsi + 1j * BETA * dens ** 2 * vals


def dnls_step(psi: Field, dx: float, time_reflect: bool = False) -> Field:
    """One Strang step of i d_X psi + d_T^2 psi - i|psi|^2 d_T psi + BETA|psi|^4 psi = 0.

    Linear factor exp(-i k^2 dX) in frequency space (the free limit acts as
    exp(i d_T^2 dX)); the cubic-derivative and quintic terms advance with a
    two-stage midpoint rule, spectral derivative inside each stage.
    time_reflect=True evolves the T -> -T mapped equation (cubic +i form).
    """
    dt = psi.grid.dt
    if dx > dt * dt / 4.0:
        raise StepTooLarge(f"dX = {dx} exceeds stability budget dT^2/4 = {dt*dt/4}")
    k = psi.grid.angular_frequencies()
    lin = np.exp(-1j * k ** 2 * dx)

    def half_nonlinear(v):
        lam = 0.5 * dx
        k1 = _nonlinear_rate(v, k, time_reflect)
        vmid = v + 0.5 * lam * k1
        return v + lam * _nonlinear_rate(vmid, k, time_reflect)

    v = half_nonlinear(psi.values)
    v = np.fft.ifft(lin * np.fft.fft(v))
    v = half_nonlinear(v)
    return psi.with_values(v)


@dataclass(frozen=True)
class DnlsDiagnostics:
    """Per-snapshot conserved/shape diagnostics along the evolution."""

    x: np.ndarray
    norm: np.ndarray
    peak_amplitude: np.ndarray
    peak_position: np.ndarray
    rms_width: np.ndarray
    participation_ratio: np.ndarray


def _diagnose(psi: Field):
    t = psi.grid.points()
    dt = psi.grid.dt
    dens = np.abs(psi.values) ** 2
    w = dens.sum() * dt
    centroid = (t * dens).sum() * dt / w
    rms = np.sqrt(((t - centroid) ** 2 * dens).sum() * dt / w)
    pr = w ** 2 / ((dens ** 2).sum() * dt)
    return (w, float(np.sqrt(dens.max())), float(t[np.argmax(dens)]),
            float(rms), float(pr))


def evolve_dnls(psi0: Field, x_final: float, dx: float,
                time_reflect: bool = False, n_snapshots: int = 101,
                observer: Callable | None = None):
    """Evolve to X = x_final recording diagnostics (and optional snapshots)."""
    n_steps = max(1, int(np.ceil(x_final / dx - 1e-12)))
    dx = x_final / n_steps
    snap_every = max(1, n_steps // max(1, n_snapshots - 1))
    psi = psi0
    xs, rows = [0.0], [_diagnose(psi0)]
    if observer is not None:
        observer(0.0, psi0)
    x = 0.0
    for i in range(n_steps):
        psi = dnls_step(psi, dx, time_reflect)
        x += dx
        if (i + 1) % snap_every == 0 or i == n_steps - 1:
            xs.append(x)
            rows.append(_diagnose(psi))
            if observer is not None:
                observer(x, psi)
    cols = list(zip(*rows))
    diags = DnlsDiagnostics(np.array(xs), np.array(cols[0]), np.array(cols[1]),
                            np.array(cols[2]), np.array(cols[3]),
                            np.array(cols[4]))
    return psi, diags


# -- physical-equation split-step (for the dimensionless-reduction check) -------

def evolve_physical(p: MeanFieldProblem, phi0: Field, x_final: float, dx: float,
                    _quintic_scale: float = 1.0) -> Field:
    """Split-step the pure physical equation (U_ext must be None).

    _quintic_scale is a negative-control hook for the acceptance checker
    only: it scales the quintic term to demonstrate that the reduction check
    catches a perturbed coefficient.  The dimensionless solver has no such
    knob.
    """
    if p.u_ext is not None:
        raise ValueError("physical split-step handles the pure equation only")
    pr = p.params
    k = p.grid.angular_frequencies()
    n_steps = max(1, int(round(x_final / dx)))
    dx = x_final / n_steps
    lin = np.exp(-1j * pr.hbar * k ** 2 * dx / (2.0 * pr.m * pr.c ** 3))

    def rate(v, x):
        g = p.g_of(x)
        dens = np.abs(v) ** 2
        dv = np.fft.ifft(1j * k * np.fft.fft(v))
        # i hbar c d_x phi = 2 i hbar g/(m c)|phi|^2 d_t phi + 3 g^2/(2m)|phi|^4 phi
        return (2.0 * g / (pr.m * pr.c ** 2) * dens * dv
                - 1j * _quintic_scale * 3.0 * g ** 2
                / (2.0 * pr.m * pr.hbar * pr.c) * dens ** 2 * v)

    def half_nl(v, x):
        lam = 0.5 * dx
        k1 = rate(v, x)
        vmid = v + 0.5 * lam * k1
        return v + lam * rate(vmid, x)

    vals = phi0.values
    x = 0.0
    for _ in range(n_steps):
        vals = half_nl(vals, x + 0.25 * dx)
        vals = np.fft.ifft(lin * np.fft.fft(vals))
        vals = half_nl(vals, x + 0.75 * dx)
        x += dx
    return phi0.with_values(vals)
