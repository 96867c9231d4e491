"""Expected improvement and augmented Tchebycheff scalarization (minimization)."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

RHO = 0.05
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def expected_improvement(mean, variance, best):
    """Closed-form EI below ``best``; exact ``max(best - mean, 0)`` where the variance is zero.

    Works elementwise on arrays and returns a float for scalar input.
    """
    mean = np.asarray(mean, dtype=float)
    var = np.maximum(np.asarray(variance, dtype=float), 0.0)
    imp = best - mean
    sigma = np.sqrt(var)
    safe = np.where(sigma > 0.0, sigma, 1.0)
    with np.errstate(over="ignore"):  # exp(-z^2/2) underflows to 0 for tiny sigma
        z = imp / safe
        ei = imp * ndtr(z) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    out = np.where(sigma > 0.0, np.maximum(ei, 0.0), np.maximum(imp, 0.0))
    return float(out) if out.ndim == 0 else out


def scalarize(y, weights, rho: float = RHO):
    """Augmented Tchebycheff value max_i(w_i y_i) + rho * sum_i(w_i y_i).

    ``y`` may be a single vector or a stack of row vectors.
    """
    y = np.asarray(y, dtype=float)
    wy = y * np.asarray(weights, dtype=float)
    out = wy.max(axis=-1) + rho * wy.sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def normalize_objectives(Y) -> np.ndarray:
    """Scale each column to [0, 1] by its observed min/max; a zero span maps to 0.5."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    lo = Y.min(axis=0)
    span = Y.max(axis=0) - lo
    out = np.full_like(Y, 0.5)
    ok = span > 0.0
    out[:, ok] = (Y[:, ok] - lo[ok]) / span[ok]
    return out


def simplex_weights(p: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the probability simplex in p dimensions."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return rng.dirichlet(np.ones(p))
