"""Gaussian-process regression with an ARD Matern-5/2 kernel.

Targets are standardized internally. Hyperparameters (per-dimension
lengthscales, signal variance, noise variance) are fitted by maximizing the
log marginal likelihood with L-BFGS-B over log-parameters from several
deterministic restarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.linalg.lapack import dpotrf, dpotri, dpotrs
from scipy.optimize import minimize

SQRT5 = math.sqrt(5.0)
MIN_NOISE = 1e-6
MAX_JITTER = 1e-4
LOG_2PI = math.log(2.0 * math.pi)

LENGTHSCALE_BOUNDS = (1e-2, 2e1)
SIGNAL_BOUNDS = (5e-2, 2e1)
NOISE_BOUNDS = (MIN_NOISE, 1.0)


class GpFitError(RuntimeError):
    pass


def _sq_diffs(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    """Per-dimension squared differences, shape (d, n1, n2)."""
    return (X1.T[:, :, None] - X2.T[:, None, :]) ** 2


def matern52(X1, X2, lengthscales, signal_var) -> np.ndarray:
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    ls = np.asarray(lengthscales, dtype=float)
    r2 = np.einsum("kij,k->ij", _sq_diffs(X1, X2), 1.0 / ls**2)
    r = np.sqrt(np.maximum(r2, 0.0))
    return signal_var * (1.0 + SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-SQRT5 * r)


def _chol_with_jitter(K: np.ndarray) -> tuple[np.ndarray, float]:
    jitter = 0.0
    n = len(K)
    while True:
        try:
            return cholesky(K + jitter * np.eye(n), lower=True, check_finite=False), jitter
        except LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
            if jitter > MAX_JITTER:
                raise GpFitError("kernel matrix is singular even with maximal jitter") from None


@dataclass
class GpModel:
    X: np.ndarray
    y: np.ndarray
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    y_mean: float
    y_std: float
    L: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0
    log_likelihood: float = float("nan")

    @classmethod
    def from_hyperparameters(cls, X, y, lengthscales, signal_var: float, noise_var: float) -> GpModel:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if len(X) != len(y):
            raise ValueError("inputs and targets differ in length")
        if noise_var < MIN_NOISE:
            raise ValueError(f"noise variance must be >= {MIN_NOISE}")
        ls = np.broadcast_to(np.asarray(lengthscales, dtype=float), (X.shape[1],)).copy()
        if np.any(ls <= 0):
            raise ValueError("lengthscales must be positive")
        y_mean, y_std = _standardizer(y)
        z = (y - y_mean) / y_std
        K = matern52(X, X, ls, signal_var) + noise_var * np.eye(len(X))
        L, jitter = _chol_with_jitter(K)
        alpha = cho_solve((L, True), z, check_finite=False)
        ll = -0.5 * z @ alpha - np.log(np.diag(L)).sum() - 0.5 * len(z) * math.log(2 * math.pi)
        return cls(X, y, ls, float(signal_var), float(noise_var), y_mean, y_std, L, alpha, jitter, float(ll))

    def predict(self, Xs) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and latent variance at the rows of ``Xs``."""
        Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
        Ks = matern52(Xs, self.X, self.lengthscales, self.signal_var)
        mean = Ks @ self.alpha
        v = solve_triangular(self.L, Ks.T, lower=True, check_finite=False)
        var = self.signal_var - np.einsum("ij,ij->j", v, v)
        var = np.where(var < 0.0, 0.0, var)
        return self.y_mean + self.y_std * mean, var * self.y_std**2


def _standardizer(y: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(y))
    std = float(np.std(y))
    return mean, (std if std > 1e-12 else 1.0)


def posterior(model: GpModel, x) -> tuple[float, float]:
    mean, var = model.predict(np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(var[0])


def _neg_log_likelihood(theta, sqf, z):
    """Negative log marginal likelihood and its gradient w.r.t. log-hyperparameters.

    ``sqf`` holds the per-dimension squared differences flattened to (d, n*n).
    """
    d = sqf.shape[0]
    n = len(z)
    inv_ls2 = np.exp(-2.0 * theta[:d])
    sf2 = math.exp(theta[d])
    sn2 = math.exp(theta[d + 1])
    r2 = inv_ls2 @ sqf
    sr = np.sqrt(r2)
    sr *= SQRT5
    e = np.exp(-sr)
    e *= sf2
    # g = sf2 (1 + sqrt5 r) e^(-sqrt5 r); K = g + (5/3) r2 sf2 e^(-sqrt5 r)
    g = sr
    g += 1.0
    g *= e
    Kf = r2 * e
    Kf *= 5.0 / 3.0
    Kf += g
    K = Kf.reshape(n, n).copy()
    K.flat[:: n + 1] += sn2
    L, info = dpotrf(K, lower=1, clean=1, overwrite_a=1)
    if info != 0:
        return 1e25, np.zeros_like(theta)
    alpha, _ = dpotrs(L, z, lower=1)
    nll = 0.5 * (z @ alpha) + np.log(L.flat[:: n + 1]).sum() + 0.5 * n * LOG_2PI
    W, _ = dpotri(L, lower=1, overwrite_c=1)  # lower triangle only; upper is zero
    W += W.T
    W.flat[:: n + 1] *= 0.5
    W -= np.outer(alpha, alpha)
    Wf = W.ravel()
    grad = np.empty_like(theta)
    # dK/dlog(l_i) = (5/3) sf2 (1 + sqrt5 r) e^(-sqrt5 r) sq_i / l_i^2
    g *= Wf
    grad[:d] = (5.0 / 6.0) * (sqf @ g) * inv_ls2
    grad[d] = 0.5 * (Wf @ Kf)
    grad[d + 1] = 0.5 * sn2 * W.trace()
    return nll, grad


def fit_gp(X, y, n_restarts: int = 10, seed: int = 0, maxiter: int = 200,
           ftol: float = 1e-5, gtol: float = 1e-2) -> GpModel:
    """Fit hyperparameters by maximum marginal likelihood and condition on the data."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 2:
        raise GpFitError("need at least two points to fit a GP")
    y_mean, y_std = _standardizer(y)
    z = (y - y_mean) / y_std
    sq = _sq_diffs(X, X).reshape(d, -1)
    bounds = [tuple(np.log(LENGTHSCALE_BOUNDS))] * d + [tuple(np.log(SIGNAL_BOUNDS)), tuple(np.log(NOISE_BOUNDS))]
    rng = np.random.default_rng(seed)
    starts = [np.concatenate([np.full(d, math.log(0.3)), [0.0, math.log(1e-3)]])]
    # later restarts are drawn from a plausible sub-box of the (standardized) bounds
    s_lo = np.concatenate([np.full(d, math.log(0.05)), [math.log(0.3), math.log(1e-5)]])
    s_hi = np.concatenate([np.full(d, math.log(3.0)), [math.log(3.0), math.log(0.3)]])
    starts += [rng.uniform(s_lo, s_hi) for _ in range(max(n_restarts, 1) - 1)]

    best_theta, best_val = None, math.inf
    for theta0 in starts:
        res = minimize(_neg_log_likelihood, theta0, args=(sq, z), jac=True, method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": maxiter, "ftol": ftol, "gtol": gtol})
        if np.isfinite(res.fun) and res.fun < best_val:
            best_theta, best_val = res.x, float(res.fun)
    if best_theta is None or best_val >= 1e25:
        raise GpFitError("marginal likelihood optimization failed from every restart")
    ls = np.exp(best_theta[:d])
    return GpModel.from_hyperparameters(X, y, ls, math.exp(best_theta[d]), math.exp(best_theta[d + 1]))
