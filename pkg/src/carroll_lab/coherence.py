"""Exchange statistics in the time domain: 1RDM, pair densities, g1/g2, HBT.

On an equal-x slice the N-body state lives in L^2 over the time labels and
exchange acts on those labels.  For reference states built from orthonormal
time-orbitals:

    gamma(t,t') = sum_k f_k phi_k(t) phi_k*(t'),       n(t) = gamma(t,t),
    n2_F = n n' - |gamma|^2           (exact for Slater determinants),
    n2_B = n n' + |gamma|^2           (Wick form; thermal-state exact),

with g2 = n2/(n n'), so g2_F(t,t) = 0 and g2_B(t,t) = 2.  The brute-force
oracle builds the N-body permanent/determinant on the tensor grid (N <= 3).
For a finite-N permanent the exact pair density carries a diagonal-orbital
correction: n2 = n n' + |gamma|^2 - 2 sum_k f_k |phi_k(t)|^2 |phi_k(t')|^2
(pair_density_bose_exact); the plain Wick form is recovered when distinct
orbitals do not overlap pointwise.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import numpy.ma as ma

from .core import Field, ShapeError, TemporalGrid

DENSITY_FLOOR = 1e-14


class OrthonormalityError(Exception):
    """Orbitals not orthonormal on the grid to 1e-10."""


class TooLarge(Exception):
    """Brute-force oracle only runs for N <= 3."""


class ZeroSector(Exception):
    """Exchange projection annihilated the field."""


class InsufficientStatistics(UserWarning):
    """Fewer than 10^3 sampler runs requested."""


@dataclass(frozen=True)
class OrbitalSet:
    """Orthonormal one-time orbitals with occupations and a statistics label."""

    grid: TemporalGrid
    orbitals: tuple[np.ndarray, ...]
    occupations: tuple[float, ...]
    statistics: str  # "bose" | "fermi"

    def __post_init__(self):
        orbs = tuple(np.asarray(o, dtype=complex) for o in self.orbitals)
        occ = tuple(float(f) for f in self.occupations)
        if len(orbs) != len(occ):
            raise ShapeError("one occupation per orbital required")
        if self.statistics not in ("bose", "fermi"):
            raise ValueError("statistics must be 'bose' or 'fermi'")
        dt = self.grid.dt
        for i, oi in enumerate(orbs):
            if oi.shape != (self.grid.n_points,):
                raise ShapeError("orbital shape does not match the grid")
            for j, oj in enumerate(orbs):
                ov = np.vdot(oi, oj) * dt
                if abs(ov - (1.0 if i == j else 0.0)) > 1e-10:
                    raise OrthonormalityError(
                        f"<{i}|{j}> = {ov:.3e} violates orthonormality")
        if self.statistics == "fermi":
            if any(f not in (0.0, 1.0) for f in occ):
                raise ValueError("fermi occupations must be 0 or 1")
        if any(f < 0 for f in occ):
            raise ValueError("occupations must be nonnegative")
        object.__setattr__(self, "orbitals", orbs)
        object.__setattr__(self, "occupations", occ)

    @property
    def n_particles(self) -> float:
        return sum(self.occupations)


@dataclass(frozen=True)
class CoherenceData:
    """1RDM kernel with derived densities and coherence matrices."""

    grid: TemporalGrid
    gamma: np.ndarray
    n: np.ndarray
    n2: np.ndarray
    g1: ma.MaskedArray = field(repr=False)
    g2: ma.MaskedArray = field(repr=False)


def rdm_from_orbitals(orbs: OrbitalSet) -> np.ndarray:
    """gamma(t,t') = sum_k f_k phi_k(t) phi_k*(t'); trace dt = sum_k f_k."""
    n = orbs.grid.n_points
    gamma = np.zeros((n, n), dtype=complex)
    for f, phi in zip(orbs.occupations, orbs.orbitals):
        gamma += f * np.outer(phi, phi.conj())
    return gamma


def wick_pair_density(gamma: np.ndarray, statistics: str) -> np.ndarray:
    """n2(t,t') = n(t) n(t') -/+ |gamma(t,t')|^2 (- fermi, + bose)."""
    if not np.allclose(gamma, gamma.conj().T, atol=1e-12):
        raise ShapeError("gamma must be Hermitian")
    n = np.real(np.diag(gamma))
    sign = -1.0 if statistics == "fermi" else 1.0
    return np.outer(n, n) + sign * np.abs(gamma) ** 2


def pair_density_bose_exact(orbs: OrbitalSet) -> np.ndarray:
    """Exact permanent pair density for singly occupied Bose orbitals:
    Wick form minus the diagonal-orbital term 2 sum_k f_k |phi_k phi_k'|^2."""
    gamma = rdm_from_orbitals(orbs)
    n2 = wick_pair_density(gamma, "bose")
    for f, phi in zip(orbs.occupations, orbs.orbitals):
        a2 = np.abs(phi) ** 2
        n2 -= 2.0 * f * np.outer(a2, a2)
    return n2


def g2_matrix(n2: np.ndarray, n: np.ndarray) -> ma.MaskedArray:
    """g2 = n2/(n n'), masked (not NaN) where a density is below the floor."""
    denom = np.outer(n, n)
    mask = (n[:, None] < DENSITY_FLOOR) | (n[None, :] < DENSITY_FLOOR)
    safe = np.where(mask, 1.0, denom)
    return ma.MaskedArray(n2 / safe, mask=mask)


def g1_matrix(gamma: np.ndarray, n: np.ndarray) -> ma.MaskedArray:
    denom = np.sqrt(np.outer(n, n))
    mask = (n[:, None] < DENSITY_FLOOR) | (n[None, :] < DENSITY_FLOOR)
    safe = np.where(mask, 1.0, denom)
    return ma.MaskedArray(gamma / safe, mask=mask)


def coherence_from_orbitals(orbs: OrbitalSet) -> CoherenceData:
    gamma = rdm_from_orbitals(orbs)
    n = np.real(np.diag(gamma))
    n2 = wick_pair_density(gamma, orbs.statistics)
    return CoherenceData(orbs.grid, gamma, n, n2,
                         g1_matrix(gamma, n), g2_matrix(n2, n))


# -- brute-force small-N oracle -------------------------------------------------

def _occupied(orbs: OrbitalSet):
    occ = []
    for f, phi in zip(orbs.occupations, orbs.orbitals):
        if abs(f) < 1e-15:
            continue
        k = int(round(f))
        if abs(f - k) > 1e-12:
            raise ValueError("brute force needs integer occupations")
        occ.extend([phi] * k)
    return occ


def many_body_wavefunction(orbs: OrbitalSet) -> np.ndarray:
    """Normalized determinant (fermi) or permanent (bose) on the tensor grid."""
    occ = _occupied(orbs)
    n = len(occ)
    if n > 3:
        raise TooLarge("brute-force oracle restricted to N <= 3")
    shape = (orbs.grid.n_points,) * n
    psi = np.zeros(shape, dtype=complex)
    for perm in itertools.permutations(range(n)):
        sign = 1.0
        if orbs.statistics == "fermi":
            # parity by counting inversions
            inv = sum(1 for i in range(n) for j in range(i + 1, n)
                      if perm[i] > perm[j])
            sign = -1.0 if inv % 2 else 1.0
        term = np.ones(shape, dtype=complex)
        for axis, k in enumerate(perm):
            sl = [None] * n
            sl[axis] = slice(None)
            term = term * occ[k][tuple(sl)]
        psi += sign * term
    norm_sq = np.sum(np.abs(psi) ** 2) * orbs.grid.dt ** n
    return psi / np.sqrt(norm_sq)


def brute_force_pair_density(orbs: OrbitalSet) -> np.ndarray:
    """n2(t,t') = N(N-1) int |Psi(t,t',t3..)|^2 dt3.. from the full wavefunction."""
    psi = many_body_wavefunction(orbs)
    n = psi.ndim
    prob = np.abs(psi) ** 2
    if n == 2:
        reduced = prob
    else:
        reduced = np.sum(prob, axis=tuple(range(2, n))) * orbs.grid.dt ** (n - 2)
    return n * (n - 1) * reduced


# -- exchange projection ---------------------------------------------------------

def exchange_project(fld: Field, sector: str) -> Field:
    """Project a two-time field onto the symmetric/antisymmetric sector.

    True projector (Psi(t1,t2) +/- Psi(t2,t1))/2, so the Bose and Fermi
    components are orthogonal and their squared norms sum to the input's.
    """
    if len(fld.grids) != 2 or fld.grids[0] != fld.grids[1]:
        raise ShapeError("exchange_project needs a square two-time grid")
    if sector not in ("bose", "fermi"):
        raise ValueError("sector must be 'bose' or 'fermi'")
    sign = 1.0 if sector == "bose" else -1.0
    vals = 0.5 * (fld.values + sign * fld.values.T)
    out_norm = np.sqrt(np.sum(np.abs(vals) ** 2))
    in_norm = np.sqrt(np.sum(np.abs(fld.values) ** 2))
    if out_norm < 1e-12 * max(in_norm, 1e-300):
        raise ZeroSector(f"input has no {sector} component")
    return fld.with_values(vals)


# -- synthetic arrival-time sampling ---------------------------------------------

@dataclass(frozen=True)
class ArrivalSample:
    """Binned empirical g2 with Poisson error bars."""

    bin_centers: np.ndarray
    g2: ma.MaskedArray
    sigma: ma.MaskedArray
    singles: np.ndarray
    pairs: np.ndarray
    runs: int
    seed: int


def sample_arrivals(data: CoherenceData, runs: int, seed: int,
                    rebin: int = 8) -> ArrivalSample:
    """Draw arrival-time pairs from n2/(N(N-1)) and bin an empirical g2.

    Inverse-transform sampling on the flattened gridded CDF with a Philox
    (counter-based) generator; fixed seed gives bit-identical histograms.
    Bins are the grid cells coarsened by `rebin`.
    """
    if runs < 1000:
        warnings.warn(InsufficientStatistics(
            f"{runs} runs is below the 10^3 floor"), stacklevel=2)
    n_pts = data.grid.n_points
    if n_pts % rebin:
        raise ValueError("rebin must divide the grid size")
    weights = np.clip(data.n2, 0.0, None).ravel()
    total = weights.sum()
    if total <= 0:
        raise ValueError("pair density has no weight to sample")
    cdf = np.cumsum(weights) / total

    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random(runs)
    flat = np.searchsorted(cdf, u, side="right")
    i, j = np.unravel_index(flat, (n_pts, n_pts))

    nb = n_pts // rebin
    ib, jb = i // rebin, j // rebin
    pairs = np.zeros((nb, nb))
    np.add.at(pairs, (ib, jb), 1.0)
    # symmetrize: each run contributes the unordered pair
    pairs = 0.5 * (pairs + pairs.T)
    singles = np.zeros(nb)
    np.add.at(singles, ib, 1.0)
    np.add.at(singles, jb, 1.0)

    # empirical g2: (pair rate)/(product of single rates), normalized so the
    # exact distribution reproduces g2 = n2/(n n') on the coarse bins
    p_pair = pairs / runs
    p_single = singles / (2.0 * runs)
    mask = (p_single[:, None] < 1.0 / runs) | (p_single[None, :] < 1.0 / runs)
    denom = np.where(mask, 1.0, np.outer(p_single, p_single))
    norm = data.n.sum() ** 2 / np.clip(data.n2.sum(), 1e-300, None)
    g2_emp = ma.MaskedArray(p_pair / denom / norm, mask=mask)
    sigma = ma.MaskedArray(
        np.sqrt(np.clip(pairs, 1.0, None)) / runs / denom / norm, mask=mask)

    centers = data.grid.points().reshape(nb, rebin).mean(axis=1)
    return ArrivalSample(centers, g2_emp, sigma, singles, pairs, runs, seed)


def sampler_limit_g2(data: CoherenceData, rebin: int) -> ma.MaskedArray:
    """Infinite-run limit of the sample_arrivals estimator on the coarse bins.

    For Fermi reference states (where the n2 marginal is (N-1) n exactly)
    this equals the bin-averaged exact g2.
    """
    n_pts = data.grid.n_points
    nb = n_pts // rebin
    weights = np.clip(data.n2, 0.0, None)
    p_pair = weights.reshape(nb, rebin, nb, rebin).sum(axis=(1, 3))
    p_pair = p_pair / p_pair.sum()
    p_single = p_pair.sum(axis=1)
    norm = data.n.sum() ** 2 / data.n2.sum()
    mask = (p_single[:, None] < DENSITY_FLOOR) | (p_single[None, :] < DENSITY_FLOOR)
    denom = np.where(mask, 1.0, np.outer(p_single, p_single))
    return ma.MaskedArray(p_pair / denom / norm, mask=mask)
