"""Regularised population and empirical solutions of the operator regression.

The population solution composes the cross-covariance with the filtered
inverse of the input covariance; the empirical solution does the same with
the plug-in covariances of an i.i.d. sample.  Errors are measured in
covariance-weighted Hilbert--Schmidt norms, with weight exponent ``s = 1/2``
giving the mean-square prediction error and ``s = 0`` the reconstruction
error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import apply_spectral_fn, as_operator, as_vector, empirical_cov
from .regularize import RegStrategy, regularized_inverse

__all__ = [
    "SampleSet",
    "FitResult",
    "population_reg_solution",
    "fit",
    "predict",
    "weighted_error",
    "excess_risk",
    "alpha_schedule",
]


@dataclass(frozen=True)
class SampleSet:
    """Paired coefficient samples, one row per draw."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 2 or ys.ndim != 2:
            raise ValueError("xs and ys must be 2-d sample-row arrays")
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys must have equally many rows")
        if xs.shape[0] < 1:
            raise ValueError("sample set must contain at least one pair")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("samples contain non-finite entries")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d_x(self) -> int:
        return self.xs.shape[1]

    @property
    def d_y(self) -> int:
        return self.ys.shape[1]


@dataclass(frozen=True)
class FitResult:
    """Fitted operator plus the diagnostics of the run."""

    theta_hat: np.ndarray
    alpha: float
    strategy: RegStrategy
    rank: int
    cov_spectrum: np.ndarray = field(repr=False)


def population_reg_solution(c_xx, c_yx, strategy: RegStrategy, alpha: float) -> np.ndarray:
    """Filtered population solution ``c_yx @ g_alpha(c_xx)``."""
    c_xx = as_operator(c_xx)
    c_yx = as_operator(c_yx)
    if c_yx.shape[1] != c_xx.shape[0]:
        raise ValueError(f"shape mismatch: c_yx {c_yx.shape} vs c_xx {c_xx.shape}")
    return c_yx @ regularized_inverse(strategy, alpha, c_xx)


def fit(data: SampleSet, strategy: RegStrategy, alpha: float) -> FitResult:
    """Regularised empirical solution from plug-in covariances.

    Deterministic given the sample: computes the empirical covariances,
    applies the filter to the input covariance and composes.
    """
    c_xx = empirical_cov(data.xs)
    c_yx = empirical_cov(data.xs, data.ys)
    theta = c_yx @ regularized_inverse(strategy, alpha, c_xx)
    eigs = np.sort(np.linalg.eigvalsh((c_xx + c_xx.T) / 2.0))[::-1]
    scale = eigs[0] if eigs.size and eigs[0] > 0 else 1.0
    rank = int(np.count_nonzero(eigs > 1e-12 * scale))
    return FitResult(theta_hat=theta, alpha=float(alpha), strategy=strategy, rank=rank, cov_spectrum=eigs)


def predict(theta, x) -> np.ndarray:
    """Apply a fitted operator to one input coefficient vector."""
    theta = as_operator(theta)
    x = as_vector(x)
    if theta.shape[1] != x.shape[0]:
        raise ValueError(f"shape mismatch: theta {theta.shape} vs x {x.shape}")
    return theta @ x


def weighted_error(theta_hat, theta_star, c_xx, s: float) -> float:
    """Covariance-weighted HS error ``|(theta_star - theta_hat) c_xx^s|_HS``.

    ``s`` must lie in [0, 1/2]: 0 gives the plain HS distance, 1/2 the
    root mean-square prediction error.
    """
    if not 0.0 <= s <= 0.5:
        raise ValueError("weight exponent s must lie in [0, 1/2]")
    delta = as_operator(theta_star) - as_operator(theta_hat)
    if s == 0.0:
        return float(np.linalg.norm(delta))
    w = apply_spectral_fn(c_xx, lambda lam: lam**s)
    return float(np.linalg.norm(delta @ w))


def excess_risk(theta, model) -> float:
    """Mean-square risk of ``theta`` above the best linear predictor.

    Evaluated in closed form from the model oracle's second moments:
    the prediction gap ``|(theta - theta_star) c^{1/2}|^2`` plus a cross
    term against the covariance residual of the oracle's optimum (zero
    whenever the oracle solves the covariance factorisation exactly).
    Requires the oracle to expose the conditional mean analytically.
    """
    theta = as_operator(theta)
    if getattr(model, "conditional_mean", None) is None or getattr(model, "theta_star", None) is None:
        raise ValueError("model oracle lacks a closed-form conditional expectation")
    delta = model.theta_star - theta
    gap = weighted_error(theta, model.theta_star, model.c_xx_true, 0.5) ** 2
    cross = 2.0 * float(np.sum(delta * model.cross_cov))
    value = gap + cross
    if value < -1e-10:
        raise AssertionError(f"excess risk evaluated to {value} < -1e-10")
    return max(value, 0.0)


def alpha_schedule(n: int, nu: float) -> float:
    """Rate-optimal schedule ``n ** (-1 / (2 (nu + 1)))``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if nu <= 0:
        raise ValueError("nu must be positive")
    return float(n) ** (-1.0 / (2.0 * (nu + 1.0)))
