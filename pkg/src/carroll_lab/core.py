"""Parameter records, temporal grids, complex fields and spectral utilities.

Everything downstream works on equal-x slices: a slice is a complex-valued
sample array over one (or a tensor product of up to three) uniform time
grids.  Grids are periodic and power-of-two sized so that FFT-based
derivatives are exact for band-limited data.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np


class NumericError(Exception):
    """Non-finite samples or an otherwise poisoned numeric input."""


class UnsupportedOrder(Exception):
    """spectral_derivative only implements orders 1 and 2."""


class ShapeError(Exception):
    """Grid/array shape mismatch."""


class BoundaryLeak(UserWarning):
    """Field mass near a periodic grid edge exceeds the decay threshold.

    Used as a warning by routine validation and raised as an error where an
    operation's contract requires decayed edges (marginals, eigensolves,
    propagation steps).
    """


# |f| must fall below this within EDGE_FRACTION of each grid edge.
EDGE_THRESHOLD = 1e-10
EDGE_FRACTION = 0.05


@dataclass(frozen=True)
class PhysParams:
    """Physical constants and model couplings, in natural units.

    Defaults reproduce the figure parameters hbar = c = m = k_c = 1,
    omega = 0.7, sigma = 1, t0 = 0, s_rel = 1.  omega_t has units of
    acceleration (time is the configuration coordinate; x drives the
    oscillation), k_t couples pairs of time coordinates.
    """

    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    omega: float = 0.7
    k_c: float = 1.0
    omega_t: float = 0.7
    k_t: float = 1.0
    sigma: float = 1.0
    t0: float = 0.0
    s_rel: float = 1.0
    g0: float = 1.0
    lam: float = 0.0
    ke_q: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("m", "c", "hbar", "sigma", "s_rel"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        object.__setattr__(self, "ke_q", tuple(float(q) for q in self.ke_q))

    def replace(self, **kwargs) -> "PhysParams":
        return replace(self, **kwargs)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform periodic grid over one time coordinate.

    Samples are t_min + i*dt for i = 0..n_points-1 (t_max excluded), so
    dt = (t_max - t_min)/n_points exactly and FFT conventions apply.
    """

    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        if self.t_max <= self.t_min:
            raise ValueError("t_max must exceed t_min")
        if self.n_points < 16 or not _is_power_of_two(self.n_points):
            raise ValueError("n_points must be a power of two >= 16")

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / self.n_points

    @property
    def length(self) -> float:
        return self.t_max - self.t_min

    def points(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.n_points)

    def angular_frequencies(self) -> np.ndarray:
        """FFT-ordered angular frequencies k such that d/dt e^{ikt} = ik e^{ikt}."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dt)


@dataclass(frozen=True)
class Field:
    """Complex samples over a tensor product of up to three temporal grids.

    Values are frozen after construction; use with_values to derive a new
    field.  Cell volume is the product of the grid spacings.
    """

    grids: tuple[TemporalGrid, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        grids = tuple(self.grids) if not isinstance(self.grids, TemporalGrid) \
            else (self.grids,)
        if not 1 <= len(grids) <= 3:
            raise ShapeError("Field supports 1 to 3 temporal grids")
        vals = np.array(self.values, dtype=complex, copy=True)
        if vals.shape != tuple(g.n_points for g in grids):
            raise ShapeError(
                f"values shape {vals.shape} does not match grid shape "
                f"{tuple(g.n_points for g in grids)}")
        vals.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> TemporalGrid:
        if len(self.grids) != 1:
            raise ShapeError("field has more than one grid; use .grids")
        return self.grids[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod([g.dt for g in self.grids]))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grids, values)

    def meshes(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*[g.points() for g in self.grids], indexing="ij")


def field_from_function(grids, fn) -> Field:
    """Sample fn(t1, ..., tn) over the tensor grid."""
    if isinstance(grids, TemporalGrid):
        grids = (grids,)
    mesh = np.meshgrid(*[g.points() for g in grids], indexing="ij")
    return Field(tuple(grids), np.asarray(fn(*mesh), dtype=complex))


def l2_norm(f: Field) -> float:
    """sqrt(sum |f|^2 dV); raises NumericError on non-finite samples."""
    if not np.all(np.isfinite(f.values.view(float))):
        raise NumericError("field contains non-finite samples")
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.cell_volume))


def spectral_derivative(f: Field, order: int, axis: int = 0) -> Field:
    """FFT derivative along one grid axis: multiply by (i k)^order."""
    if order not in (1, 2):
        raise UnsupportedOrder(f"order must be 1 or 2, got {order}")
    k = f.grids[axis].angular_frequencies()
    shape = [1] * len(f.grids)
    shape[axis] = k.size
    symbol = (1j * k.reshape(shape)) ** order
    out = np.fft.ifft(symbol * np.fft.fft(f.values, axis=axis), axis=axis)
    return f.with_values(out)


def finite_diff_check(f: Field, df: Field, tol: float, axis: int = 0) -> bool:
    """True iff centered differences of f match df to tol (max norm, interior)."""
    if f.grids != df.grids:
        raise ShapeError("finite_diff_check requires matching grids")
    dt = f.grids[axis].dt
    fv = np.moveaxis(f.values, axis, 0)
    dv = np.moveaxis(df.values, axis, 0)
    approx = (fv[2:] - fv[:-2]) / (2.0 * dt)
    return bool(np.max(np.abs(approx - dv[1:-1])) < tol)


def edge_mass(f: Field) -> float:
    """Largest |f| within EDGE_FRACTION of any grid edge."""
    worst = 0.0
    a = np.abs(f.values)
    for axis, g in enumerate(f.grids):
        w = max(1, int(np.ceil(EDGE_FRACTION * g.n_points)))
        sl_lo = [slice(None)] * len(f.grids)
        sl_hi = [slice(None)] * len(f.grids)
        sl_lo[axis] = slice(0, w)
        sl_hi[axis] = slice(g.n_points - w, g.n_points)
        worst = max(worst, float(a[tuple(sl_lo)].max()), float(a[tuple(sl_hi)].max()))
    return worst


def check_boundary_decay(f: Field, threshold: float = EDGE_THRESHOLD,
                         raise_error: bool = False) -> float:
    """Validate |f| < threshold near every grid edge.

    Warns (or raises, per raise_error) with BoundaryLeak otherwise; returns
    the measured edge mass.
    """
    mass = edge_mass(f)
    if mass >= threshold:
        leak = BoundaryLeak(
            f"edge mass {mass:.3e} exceeds decay threshold {threshold:.1e}")
        if raise_error:
            raise leak
        warnings.warn(leak, stacklevel=2)
    return mass
