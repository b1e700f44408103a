"""Collective-force reduction of static spatial potentials.

A static U_tot(x) drives the gauge-transformed equal-x evolution only
through the collective force sum_j dU_tot/dx_j.  Translation-invariant
interactions (Coulomb, pure spring chains) cancel pairwise in that sum:
the collective dynamics is free and the potential survives only in the
gauge phase (t - t0) U_tot / hbar and the boundary data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import NumericError, PhysParams


@dataclass(frozen=True)
class SpatialPotential:
    """Static N-particle potential with optional analytic gradient.

    grad_terms, when provided, returns the flat list of raw per-pair/per-site
    gradient contributions (before any accumulation), so their exact sum is
    the collective force; pairwise-cancelling interactions then sum to an
    exact floating-point zero under math.fsum.
    """

    n_particles: int
    evaluate: Callable[[np.ndarray], float]
    analytic_grad: Callable[[np.ndarray], np.ndarray] | None = None
    grad_terms: Callable[[np.ndarray], list] | None = None


def numeric_gradient(p: SpatialPotential, x: Sequence[float]) -> np.ndarray:
    """4th-order central differences, step 1e-5 (1 + |x_j|) per coordinate."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.size):
        h = 1e-5 * (1.0 + abs(x[j]))
        e = np.zeros_like(x)
        e[j] = 1.0
        grad[j] = (-p.evaluate(x + 2 * h * e) + 8 * p.evaluate(x + h * e)
                   - 8 * p.evaluate(x - h * e) + p.evaluate(x - 2 * h * e)) / (12 * h)
    return grad


def collective_force(p: SpatialPotential, x: Sequence[float]) -> float:
    """sum_j dU_tot/dx_j at x, the only channel driving the evolution."""
    x = np.asarray(x, dtype=float)
    if p.grad_terms is not None:
        terms = [float(v) for v in p.grad_terms(x)]
        if not all(math.isfinite(v) for v in terms):
            raise NumericError("potential gradient is non-finite")
        return math.fsum(terms)
    grad = p.analytic_grad(x) if p.analytic_grad is not None \
        else numeric_gradient(p, x)
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise NumericError("potential gradient is non-finite")
    return math.fsum(grad.tolist())


def coulomb_potential(charges: Sequence[float], softening: float,
                      ke: float = 1.0) -> SpatialPotential:
    """Soft-core regularized Coulomb: U_C = -sum_{j<k} ke q_j q_k / sqrt(d^2 + eps^2).

    The soft core keeps all derivatives bounded at coincidence.
    """
    if softening <= 0:
        raise ValueError("softening must be positive")
    q = np.asarray(charges, dtype=float)
    n = q.size
    eps2 = float(softening) ** 2

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for j in range(n):
            for k in range(j + 1, n):
                total -= ke * q[j] * q[k] / math.sqrt((x[j] - x[k]) ** 2 + eps2)
        return total

    def pair_terms(x):
        x = np.asarray(x, dtype=float)
        terms = []
        for j in range(n):
            for k in range(j + 1, n):
                d = x[j] - x[k]
                t = ke * q[j] * q[k] * d / (d * d + eps2) ** 1.5
                terms.append((j, k, t))
        return terms

    def grad(x):
        g = np.zeros(n)
        for j, k, t in pair_terms(x):
            g[j] += t
            g[k] -= t
        return g

    def grad_terms(x):
        out = []
        for _, _, t in pair_terms(x):
            out.extend((t, -t))
        return out

    return SpatialPotential(n, evaluate, grad, grad_terms)


def oscillator_chain_potential(params: PhysParams, n: int) -> SpatialPotential:
    """U_tot = (m omega^2/2) sum x_j^2 + (k_c/2) sum (x_{j+1} - x_j)^2."""

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * params.m * params.omega ** 2 * np.sum(x ** 2)
                     + 0.5 * params.k_c * np.sum(np.diff(x) ** 2))

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = params.m * params.omega ** 2 * x.copy()
        for j in range(x.size - 1):
            d = x[j + 1] - x[j]
            g[j + 1] += params.k_c * d
            g[j] -= params.k_c * d
        return g

    def grad_terms(x):
        x = np.asarray(x, dtype=float)
        out = [params.m * params.omega ** 2 * v for v in x]
        for j in range(x.size - 1):
            d = params.k_c * (x[j + 1] - x[j])
            out.extend((d, -d))
        return out

    return SpatialPotential(n, evaluate, grad, grad_terms)


def spring_chain_potential(k_c: float, n: int) -> SpatialPotential:
    """Pure nearest-neighbour springs (no on-site term): translation invariant."""

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * k_c * np.sum(np.diff(x) ** 2))

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        for j in range(x.size - 1):
            d = x[j + 1] - x[j]
            g[j + 1] += k_c * d
            g[j] -= k_c * d
        return g

    def grad_terms(x):
        x = np.asarray(x, dtype=float)
        out = []
        for j in range(x.size - 1):
            d = k_c * (x[j + 1] - x[j])
            out.extend((d, -d))
        return out

    return SpatialPotential(n, evaluate, grad, grad_terms)


def is_translation_invariant(p: SpatialPotential, samples: int = 32,
                             seed: int = 0, tol: float = 1e-9) -> bool:
    """True iff U(x + s 1) = U(x) for random configurations and shifts."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = rng.uniform(-3.0, 3.0, p.n_particles)
        s = rng.uniform(-2.0, 2.0)
        if abs(p.evaluate(x + s) - p.evaluate(x)) >= tol:
            return False
    return True
