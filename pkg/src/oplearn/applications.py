"""Feature-lifted regression and Hilbertian autoregression.

Both applications reduce to the core estimator: nonlinear inputs are lifted
through an explicit finite-dimensional feature map (the lifted problem's
covariances live on feature space), and an order-r autoregression is
rewritten as one regression from the stacked last r values to the next one,
with the stacked covariance assembled in block-Toeplitz form from lag
covariances of the trajectory.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .estimate import FitResult, SampleSet, fit, predict
from .hilbert import as_operator
from .regularize import RegStrategy, regularized_inverse

__all__ = [
    "FeatureLift",
    "identity_lift",
    "polynomial_lift",
    "random_fourier_lift",
    "cme_fit",
    "cme_predict",
    "ArhModel",
    "arh_lag_covs",
    "arh_fit",
    "arh_forecast",
    "simulate_arh",
    "arh_stationary_cov",
]


@dataclass(frozen=True)
class FeatureLift:
    """Explicit feature map from raw inputs to lifted coefficient vectors."""

    kind: str
    in_dim: int
    out_dim: int
    _map: Callable[[np.ndarray], np.ndarray]

    def apply(self, raw) -> np.ndarray:
        """Lift one raw input (1-d) or a batch of raw input rows (2-d)."""
        raw = np.asarray(raw, dtype=float)
        single = raw.ndim == 1
        rows = raw[None, :] if single else raw
        if rows.shape[1] != self.in_dim:
            raise ValueError(f"lift expects inputs of dimension {self.in_dim}, got {rows.shape[1]}")
        lifted = self._map(rows)
        if lifted.shape != (rows.shape[0], self.out_dim):
            raise AssertionError("feature map returned wrong shape")
        return lifted[0] if single else lifted


def identity_lift(dim: int) -> FeatureLift:
    """The trivial lift; reduces lifted regression to the plain estimator."""
    return FeatureLift("identity", dim, dim, lambda rows: rows)


def polynomial_lift(degree: int, in_dim: int) -> FeatureLift:
    """Bias plus coordinatewise monomials up to ``degree`` (no cross terms).

    Degree 1 gives affine features ``(1, x)``.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    out_dim = 1 + in_dim * degree

    def _map(rows: np.ndarray) -> np.ndarray:
        feats = [np.ones((rows.shape[0], 1))]
        feats.extend(rows**k for k in range(1, degree + 1))
        return np.hstack(feats)

    return FeatureLift("polynomial", in_dim, out_dim, _map)


def random_fourier_lift(bandwidth: float, out_dim: int, in_dim: int, seed: int) -> FeatureLift:
    """Random cosine features approximating a Gaussian kernel of the given bandwidth."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    rng = np.random.default_rng(seed)
    freqs = rng.standard_normal((in_dim, out_dim)) / bandwidth
    phases = rng.uniform(0.0, 2.0 * np.pi, size=out_dim)
    amp = np.sqrt(2.0 / out_dim)

    def _map(rows: np.ndarray, _w=freqs, _b=phases, _a=amp) -> np.ndarray:
        return _a * np.cos(rows @ _w + _b)

    return FeatureLift("random-fourier", in_dim, out_dim, _map)


def cme_fit(raw_xs, ys, lift: FeatureLift, strategy: RegStrategy, alpha: float) -> FitResult:
    """Fit the conditional-mean map on lifted inputs.

    Lifts the raw inputs through the feature map and delegates to the core
    estimator; composing the fitted operator with the lift estimates the
    conditional expectation of the response.
    """
    lifted = lift.apply(np.asarray(raw_xs, dtype=float))
    return fit(SampleSet(xs=lifted, ys=np.asarray(ys, dtype=float)), strategy, alpha)


def cme_predict(fitted: FitResult, lift: FeatureLift, raw_x) -> np.ndarray:
    """Evaluate the fitted conditional-mean map at one raw input."""
    return predict(fitted.theta_hat, lift.apply(raw_x))


def _window_cov(traj: np.ndarray, later_start: int, earlier_start: int, count: int) -> np.ndarray:
    # mean of outer products over a common window, via one BLAS product
    later = traj[later_start : later_start + count]
    earlier = traj[earlier_start : earlier_start + count]
    return (later.T @ earlier) / count


def arh_lag_covs(trajectory, r: int) -> list[np.ndarray]:
    """Lag-k covariances of a trajectory over the common window, k = 0..r.

    Entry k averages the outer products of each value with its k-steps-back
    partner over the window of times with r observed predecessors.
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 2:
        raise ValueError("trajectory must be a (T, d) array of rows")
    t_len = traj.shape[0]
    if r < 0 or t_len <= r:
        raise ValueError(f"need a trajectory longer than r={r}, got T={t_len}")
    count = t_len - r
    return [_window_cov(traj, r, r - k, count) for k in range(r + 1)]


@dataclass(frozen=True)
class ArhModel:
    """Fitted order-r autoregression: one operator block per lag."""

    order: int
    blocks: list[np.ndarray]
    strategy: RegStrategy
    alpha: float

    @property
    def d_y(self) -> int:
        return self.blocks[0].shape[0]


def arh_fit(trajectory, r: int, strategy: RegStrategy, alpha: float) -> ArhModel:
    """Fit an order-r autoregression by block covariance assembly.

    The stacked regressor covariance is assembled block-Toeplitz from lag
    covariances anchored at the first lag position (so r=1 reduces exactly
    to the plain fit on lagged pairs); the cross row uses the lag
    covariances of :func:`arh_lag_covs`.  A block matrix that fails to be
    PSD beyond round-off is reported and projected by eigenvalue clipping.
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 2:
        raise ValueError("trajectory must be a (T, d) array of rows")
    t_len, d_y = traj.shape
    if r < 1:
        raise ValueError("order r must be at least 1")
    if t_len <= 10 * r:
        raise ValueError(f"trajectory too short for order {r}: need T > {10 * r}, got {t_len}")
    count = t_len - r

    # regressor-anchored lag blocks: window Y_{t-1}, partners Y_{t-1-k}
    d_lags = [_window_cov(traj, r - 1, r - 1 - k, count) for k in range(r)]
    gram = np.block(
        [[d_lags[j - i] if j >= i else d_lags[i - j].T for j in range(r)] for i in range(r)]
    )
    cross = np.hstack(arh_lag_covs(traj, r)[1:])

    scale = np.abs(gram).max() + 1.0
    eigs = np.linalg.eigvalsh((gram + gram.T) / 2.0)
    if eigs.min() < -1e-10 * scale:
        warnings.warn(
            f"block covariance not PSD (min eigenvalue {eigs.min():.3e}); clipping at zero",
            stacklevel=2,
        )
        w, v = np.linalg.eigh((gram + gram.T) / 2.0)
        gram = (v * np.maximum(w, 0.0)) @ v.T

    theta = cross @ regularized_inverse(strategy, alpha, gram)
    blocks = [theta[:, i * d_y : (i + 1) * d_y] for i in range(r)]
    return ArhModel(order=r, blocks=blocks, strategy=strategy, alpha=float(alpha))


def arh_forecast(model: ArhModel, history) -> np.ndarray:
    """One-step forecast from the last ``r`` values (oldest first)."""
    hist = np.asarray(history, dtype=float)
    if hist.ndim != 2 or hist.shape[0] != model.order:
        raise ValueError(f"history must hold exactly the last {model.order} values as rows")
    out = np.zeros(model.d_y)
    for i, block in enumerate(model.blocks, start=1):
        out += block @ hist[-i]
    return out


def arh_stationary_cov(blocks: list[np.ndarray], noise_cov) -> np.ndarray:
    """Stationary covariance of an order-1 autoregression (Lyapunov solve)."""
    if len(blocks) != 1:
        raise ValueError("closed-form stationary covariance implemented for order 1 only")
    a = as_operator(blocks[0])
    q = as_operator(noise_cov)
    return scipy.linalg.solve_discrete_lyapunov(a, q)


def simulate_arh(blocks: list[np.ndarray], t_len: int, noise_cov, seed: int, burn_in: int = 500) -> np.ndarray:
    """Simulate an order-r autoregression with Gaussian innovations.

    Starts from zeros, discards ``burn_in`` steps and returns ``t_len`` rows.
    """
    blocks = [as_operator(b) for b in blocks]
    r = len(blocks)
    d_y = blocks[0].shape[0]
    noise_cov = as_operator(noise_cov)
    rng = np.random.default_rng(seed)
    w, v = np.linalg.eigh((noise_cov + noise_cov.T) / 2.0)
    factor = v * np.sqrt(np.maximum(w, 0.0))
    total = t_len + burn_in
    eps = rng.standard_normal((total, d_y)) @ factor.T
    traj = np.zeros((total + r, d_y))
    for t in range(r, total + r):
        step = eps[t - r]
        for i, block in enumerate(blocks, start=1):
            step = step + block @ traj[t - i]
        traj[t] = step
    return traj[r + burn_in :]
