"""Coordinate duality between static one-body potentials and temporal drives.

For a stationary problem with potential V_sch and energy E_sch, the ratio
sigma = y1/y2 of any fundamental system of

    y'' + q(x) y = 0,      q(x) = (2 m / hbar^2) (E_sch - V_sch(x)),

has Schwarzian {sigma, x} = 2 q.  Unwinding sigma = tan(E0 tau / hbar) gives
the monotone reparametrization tau(x) solving the inverse master equation

    {tau, x} + (2 E0^2 / hbar^2) tau'(x)^2 = -(4 m / hbar^2)(V_sch - E_sch),

and delta = tau^{-1} carries the time-side potential
V_car(t) = -(i hbar / 2) delta''/delta'.  tau is built by integrating
tau' = (hbar/E0) (-W) / (y1^2 + y2^2) (W = y1 y2' - y1' y2, constant), which
is branch-free through zeros of y2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator

from .core import PhysParams


class IntegrationError(Exception):
    """Fundamental-system blow-up beyond the overflow threshold."""


class NoValidWindow(Exception):
    """No zero-free window of y2 of the requested size around the anchor."""


class SingularMap(Exception):
    """tau' vanished within the requested samples (delta not differentiable)."""


@dataclass(frozen=True)
class DualityInput:
    """One channel of the duality: potential, energy, labels, window."""

    v_sch: Callable[[np.ndarray], np.ndarray]
    e_sch: float
    e0: float
    x_interval: tuple[float, float]
    anchor: float | None = None
    ode_ics: tuple = ((0.0, 1.0), (1.0, 0.0))   # (y(anchor), y'(anchor)) pairs
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.e0 <= 0:
            raise ValueError("e0 must be positive (the label is two-to-one in p0)")
        a, b = self.x_interval
        if b <= a:
            raise ValueError("empty x_interval")
        if self.anchor is None:
            object.__setattr__(self, "anchor", 0.5 * (a + b))

    def q(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * self.mass / self.hbar ** 2 * (self.e_sch - self.v_sch(x))


@dataclass(frozen=True)
class FundamentalSystem:
    """Sampled (y1, y2) with derivatives on a uniform grid; W constant."""

    inp: DualityInput
    x: np.ndarray
    y1: np.ndarray
    y1p: np.ndarray
    y2: np.ndarray
    y2p: np.ndarray
    tau_raw: np.ndarray = field(repr=False)   # integral of tau', zero at anchor

    @property
    def wronskian(self) -> float:
        (y1a, y1pa), (y2a, y2pa) = self.inp.ode_ics
        return y1a * y2pa - y1pa * y2a


_OVERFLOW = 1e120


def solve_fundamental(inp: DualityInput, n_samples: int = 4001) -> FundamentalSystem:
    """Integrate the fundamental system (plus tau') from the anchor outward."""
    a, b = inp.x_interval
    (y1a, y1pa), (y2a, y2pa) = inp.ode_ics
    w = y1a * y2pa - y1pa * y2a
    pref = inp.hbar / inp.e0 * (-w)

    def rhs(x, y):
        q = float(inp.q(x))
        y1, y1p, y2, y2p, _ = y
        return [y1p, -q * y1, y2p, -q * y2, pref / (y1 * y1 + y2 * y2)]

    def overflow(x, y):
        return max(abs(y[0]), abs(y[2])) - _OVERFLOW
    overflow.terminal = True

    y0 = [y1a, y1pa, y2a, y2pa, 0.0]
    x = np.linspace(a, b, n_samples)
    out = np.empty((5, n_samples))
    for sel, x_end in ((x >= inp.anchor, b), (x < inp.anchor, a)):
        if not np.any(sel):
            continue
        ts = np.unique(np.concatenate([[inp.anchor], x[sel]]))
        if x_end < inp.anchor:
            ts = ts[::-1]
        # tight tolerances: verify_* differentiates these samples three
        # times, so dense-output jitter is amplified by 1/h^3
        sol = solve_ivp(rhs, (inp.anchor, x_end), y0, t_eval=ts,
                        method="DOP853", rtol=1e-13, atol=1e-14,
                        events=overflow)
        if sol.status == 1:
            raise IntegrationError("fundamental system exceeded overflow threshold")
        if not sol.success:
            raise IntegrationError(sol.message)
        vals = {t: sol.y[:, i] for i, t in enumerate(sol.t)}
        for i in np.nonzero(sel)[0]:
            out[:, i] = vals[x[i]]
    return FundamentalSystem(inp, x, out[0], out[1], out[2], out[3], out[4])


@dataclass(frozen=True)
class SchwarzianMap:
    """Monotone reparametrization tau(x) with inverse delta(t)."""

    inp: DualityInput
    fs: FundamentalSystem
    x: np.ndarray
    tau: np.ndarray
    valid_interval: tuple[float, float]
    _delta: PchipInterpolator = field(repr=False)
    _splines: dict = field(repr=False)

    def sigma(self, x):
        y1 = self._splines["y1"](x)
        y2 = self._splines["y2"](x)
        return y1 / y2

    def tau_of(self, x):
        return self._splines["tau"](x)

    def tau_derivatives(self, x):
        """Analytic tau', tau'', tau''' from the fundamental system."""
        inp = self.inp
        y1 = self._splines["y1"](x)
        y1p = self._splines["y1p"](x)
        y2 = self._splines["y2"](x)
        y2p = self._splines["y2p"](x)
        q = inp.q(x)
        w = self.fs.wronskian
        pref = inp.hbar / inp.e0 * (-w)
        rho2 = y1 ** 2 + y2 ** 2
        drho2 = 2.0 * (y1 * y1p + y2 * y2p)
        ddrho2 = 2.0 * (y1p ** 2 + y2p ** 2 - q * rho2)
        tp = pref / rho2
        tpp = -pref * drho2 / rho2 ** 2
        tppp = pref * (2.0 * drho2 ** 2 / rho2 ** 3 - ddrho2 / rho2 ** 2)
        return tp, tpp, tppp

    def delta(self, t):
        return self._delta(t)

    def delta_derivatives(self, t):
        """delta' and delta'' via the inverse-function relations."""
        x = self.delta(t)
        tp, tpp, _ = self.tau_derivatives(x)
        if np.any(np.abs(tp) < 1e-14):
            raise SingularMap("tau' vanished; delta not differentiable here")
        return 1.0 / tp, -tpp / tp ** 3


def build_map(inp: DualityInput, n_samples: int = 4001,
              min_window: float = 0.0) -> SchwarzianMap:
    """Construct tau by integrating tau' (branch-free), delta by inversion.

    valid_interval is the maximal window around the anchor where
    |y2| > 1e-6 max|y2| (sigma well defined); NoValidWindow if narrower
    than min_window.
    """
    fs = solve_fundamental(inp, n_samples)
    # anchor offset aligns tau with (hbar/E0) arctan(sigma) at the anchor
    (y1a, _), (y2a, _) = inp.ode_ics
    off = (inp.hbar / inp.e0) * np.arctan(y1a / y2a) if y2a != 0.0 else 0.0
    tau = fs.tau_raw + off
    if not (np.all(np.diff(tau) > 0) or np.all(np.diff(tau) < 0)):
        raise SingularMap("tau is not strictly monotone on the interval")

    # zero-free: stop at y2 sign changes (true zeros) or sub-threshold samples
    thresh = 1e-6 * np.max(np.abs(fs.y2))
    i_anchor = int(np.argmin(np.abs(fs.x - inp.anchor)))
    if np.abs(fs.y2[i_anchor]) <= thresh:
        raise NoValidWindow("y2 vanishes at the anchor")

    def clear(i, j):
        return np.abs(fs.y2[j]) > thresh and fs.y2[i] * fs.y2[j] > 0

    lo = i_anchor
    while lo > 0 and clear(lo, lo - 1):
        lo -= 1
    hi = i_anchor
    while hi < fs.x.size - 1 and clear(hi, hi + 1):
        hi += 1
    window = (float(fs.x[lo]), float(fs.x[hi]))
    if window[1] - window[0] < min_window:
        raise NoValidWindow(
            f"zero-free window {window} narrower than {min_window}")

    order = np.argsort(tau)
    delta = PchipInterpolator(tau[order], fs.x[order])
    splines = {
        "y1": CubicSpline(fs.x, fs.y1),
        "y1p": CubicSpline(fs.x, fs.y1p),
        "y2": CubicSpline(fs.x, fs.y2),
        "y2p": CubicSpline(fs.x, fs.y2p),
        "tau": CubicSpline(fs.x, tau),
    }
    return SchwarzianMap(inp, fs, fs.x, tau, window, delta, splines)


# -- finite-difference Schwarzian (independent of the construction) ------------

_D1_6 = np.array([-1/60, 3/20, -3/4, 0.0, 3/4, -3/20, 1/60])
_D2_6 = np.array([1/90, -3/20, 3/2, -49/18, 3/2, -3/20, 1/90])
_D3_6 = np.array([-7/240, 3/10, -169/120, 61/30, 0.0,
                  -61/30, 169/120, -3/10, 7/240])


def _apply_stencil(f: np.ndarray, coef: np.ndarray, trim: int) -> np.ndarray:
    w = coef.size // 2
    out = np.zeros(f.size - 2 * trim)
    for off, c in zip(range(-w, w + 1), coef):
        if c:
            i0 = trim + off
            out += c * f[i0: f.size - 2 * trim + i0]
    return out


def fd_derivatives(values: np.ndarray, h: float, order: int = 4):
    """Centered f', f'', f''' on the interior.

    order=4 trims 3 points per side (the h^4 stencils); order=6 trims 4 and
    uses the h^6 stencils (needed when third-derivative accuracy limits a
    residual check).
    """
    f = values
    if order == 4:
        fp = (-f[5:-1] + 8 * f[4:-2] - 8 * f[2:-4] + f[1:-5]) / (12 * h)
        fpp = (-f[5:-1] + 16 * f[4:-2] - 30 * f[3:-3] + 16 * f[2:-4]
               - f[1:-5]) / (12 * h ** 2)
        fppp = (f[:-6] / 8 - f[1:-5] + 13 * f[2:-4] / 8
                - 13 * f[4:-2] / 8 + f[5:-1] - f[6:] / 8) / h ** 3
        return fp, fpp, fppp
    if order == 6:
        fp = _apply_stencil(f, _D1_6, 4)[:] / h
        fpp = _apply_stencil(f, _D2_6, 4) / h ** 2
        fppp = _apply_stencil(f, _D3_6, 4) / h ** 3
        return fp, fpp, fppp
    raise ValueError("order must be 4 or 6")


def schwarzian_fd(values: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    """{f, x} = f'''/f' - (3/2)(f''/f')^2 by centered finite differences."""
    fp, fpp, fppp = fd_derivatives(values, h, order)
    return fppp / fp - 1.5 * (fpp / fp) ** 2


def _knot_subsample(m: SchwarzianMap, window, h_target: float = 0.01):
    """Stride the stored knots (exact ODE samples, no spline jitter)."""
    lo, hi = window
    sel = np.nonzero((m.x >= lo) & (m.x <= hi))[0]
    h_knot = m.x[1] - m.x[0]
    stride = max(1, int(round(h_target / h_knot)))
    idx = sel[::stride]
    return idx, h_knot * stride


def verify_inverse_master(m: SchwarzianMap, inp: DualityInput,
                          h_target: float = 0.01) -> float:
    """Max residual of {tau,x} + 2 (E0/hbar)^2 tau'^2 - 2 q(x).

    tau is differentiated by 4th-order finite differences of the stored
    samples (independent of the analytic construction).
    """
    lo, hi = m.x[0], m.x[-1]
    pad = 0.02 * (hi - lo)
    idx, h = _knot_subsample(m, (lo + pad, hi - pad), h_target)
    tau = m.tau[idx]
    sch = schwarzian_fd(tau, h, order=6)
    tp = fd_derivatives(tau, h, order=6)[0]
    x_in = m.x[idx][4:-4]
    resid = sch + 2.0 * (inp.e0 / inp.hbar) ** 2 * tp ** 2 - 2.0 * inp.q(x_in)
    return float(np.max(np.abs(resid)))


def verify_pure_schwarzian(m: SchwarzianMap, inp: DualityInput,
                           h_target: float = 0.006) -> float:
    """Max residual of {sigma, x} - 2 q(x) on the central zero-free window."""
    lo, hi = m.valid_interval
    pad = 0.2 * (hi - lo)   # keep sigma moderate away from y2 zeros
    idx, h = _knot_subsample(m, (lo + pad, hi - pad), h_target)
    sig = m.fs.y1[idx] / m.fs.y2[idx]
    sch = schwarzian_fd(sig, h, order=6)
    return float(np.max(np.abs(sch - 2.0 * inp.q(m.x[idx][4:-4]))))


def carroll_potential(m: SchwarzianMap, t_samples: np.ndarray) -> np.ndarray:
    """V_car(t) = -(i hbar / 2) delta''/delta' (purely imaginary for real
    monotone delta; reported as-is, no hermiticity claimed)."""
    t_samples = np.asarray(t_samples, dtype=float)
    dd, ddd = m.delta_derivatives(t_samples)
    return -0.5j * m.inp.hbar * (ddd / dd)


def verify_forward_relation(m: SchwarzianMap, inp: DualityInput,
                            t_samples: np.ndarray) -> float:
    """Residual of V_sch(delta(t)) = E_sch + [i hbar V_car' + V_car^2 - E0^2]
    / (2 m delta'^2), with V_car' by finite differences."""
    t = np.asarray(t_samples, dtype=float)
    h = t[1] - t[0]
    vc = carroll_potential(m, t)
    vcp = (-vc[4:] + 8 * vc[3:-1] - 8 * vc[1:-3] + vc[:-4]) / (12 * h)
    t_in = t[2:-2]
    dd, _ = m.delta_derivatives(t_in)
    rhs = inp.e_sch + (1j * inp.hbar * vcp + vc[2:-2] ** 2 - inp.e0 ** 2) \
        / (2.0 * inp.mass * dd ** 2)
    lhs = inp.v_sch(m.delta(t_in))
    return float(np.max(np.abs(lhs - rhs)))


# -- coupled oscillators: two channels plus the mixed evaluator ----------------

def coupled_oscillator_map(params: PhysParams, e_x: float | None = None,
                           e_xi: float | None = None, e0: float = 1.0,
                           half_width: float | None = None):
    """Duality maps for the coupled two-oscillator normal channels.

    Center-of-mass channel: mass M = 2m, Omega_X = omega; relative channel:
    mass mu = m/2, Omega_xi = sqrt(omega^2 + 2 k_c / m).  Returns
    (map_X, map_xi, evaluator) with evaluator(t1, t2) -> (x1, x2):

        x1 = delta_X((t1+t2)/2) + delta_xi(t1-t2)/2,
        x2 = delta_X((t1+t2)/2) - delta_xi(t1-t2)/2,

    and the temporal potential V_car^X((t1+t2)/2) + V_car^xi(t1-t2).
    Anchor-centered initial conditions make delta_xi(0) = 0 exactly.
    """
    p = params
    omega_x = p.omega
    omega_xi = np.sqrt(p.omega ** 2 + 2.0 * p.k_c / p.m)
    mass_x = 2.0 * p.m
    mass_xi = 0.5 * p.m
    if e_x is None:
        e_x = 2.5 * p.hbar * omega_x
    if e_xi is None:
        e_xi = 2.5 * p.hbar * omega_xi

    def channel(mass, omega, e_sch):
        turn = np.sqrt(2.0 * e_sch / (mass * omega ** 2))
        hw = 0.75 * turn if half_width is None else half_width
        inp = DualityInput(
            v_sch=lambda x: 0.5 * mass * omega ** 2 * np.asarray(x) ** 2,
            e_sch=e_sch, e0=e0, x_interval=(-hw, hw), anchor=0.0,
            mass=mass, hbar=p.hbar)
        return inp, build_map(inp)

    inp_x, map_x = channel(mass_x, omega_x, e_x)
    inp_xi, map_xi = channel(mass_xi, omega_xi, e_xi)

    def evaluator(t1, t2):
        tc = 0.5 * (np.asarray(t1) + np.asarray(t2))
        tr = np.asarray(t1) - np.asarray(t2)
        dx = map_x.delta(tc)
        dxi = map_xi.delta(tr)
        return dx + 0.5 * dxi, dx - 0.5 * dxi

    return (inp_x, map_x), (inp_xi, map_xi), evaluator
