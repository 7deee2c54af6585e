"""Synthetic problem generation with analytically known optima.

All synthetic laws are Gaussian coordinatewise in the eigenbasis of the
input covariance, so that second moments, best linear predictors,
misspecification errors and tail norms have closed forms usable as test
oracles.  Sampling is deterministic per (seed, n).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .estimate import SampleSet
from .hilbert import as_operator, eig_sym

__all__ = [
    "ModelOracle",
    "SourceSpec",
    "TailNormEstimate",
    "make_covariance",
    "make_source_target",
    "make_linear_model",
    "sample_linear_model",
    "sample_misspecified",
    "psi2_estimate",
    "psi1_estimate",
    "estimate_tail_norms",
]


@dataclass(frozen=True)
class ModelOracle:
    """A joint law with closed-form conditional expectation and optima.

    ``theta_star`` is the best linear predictor, ``m_star`` the L2 distance
    between the true conditional mean and ``theta_star x`` (zero iff the
    model is linear), and ``cross_cov`` the covariance residual
    ``C_YX - theta_star C_XX`` (zero for the built-in constructions).
    """

    kind: str
    c_xx_true: np.ndarray
    theta_star: Optional[np.ndarray]
    conditional_mean: Optional[Callable[[np.ndarray], np.ndarray]]
    noise_cov: np.ndarray
    m_star: float = 0.0
    cross_cov: np.ndarray = None  # set in __post_init__ when omitted
    # sampling internals: eigenbasis of c_xx_true and the quadratic term
    basis: np.ndarray = field(default=None, repr=False)
    spectrum: np.ndarray = field(default=None, repr=False)
    quad_gain: float = 0.0
    quad_mix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        c = as_operator(self.c_xx_true)
        dec = eig_sym(c)
        noise = as_operator(self.noise_cov)
        object.__setattr__(self, "c_xx_true", c)
        object.__setattr__(self, "noise_cov", noise)
        if self.basis is None:
            object.__setattr__(self, "basis", dec.eigenvectors)
            object.__setattr__(self, "spectrum", np.maximum(dec.eigenvalues, 0.0))
        if self.cross_cov is None:
            d_y = noise.shape[0]
            object.__setattr__(self, "cross_cov", np.zeros((d_y, c.shape[0])))

    @property
    def d_x(self) -> int:
        return self.c_xx_true.shape[0]

    @property
    def d_y(self) -> int:
        return self.noise_cov.shape[0]


@dataclass(frozen=True)
class SourceSpec:
    """Smoothness order, radius and seed for a synthetic target."""

    nu: float
    R: float
    seed: int

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.R <= 0:
            raise ValueError("R must be positive")


def make_covariance(d: int, decay: str = "polynomial", rate: float = 2.0, scale: float = 1.0) -> np.ndarray:
    """Diagonal covariance with polynomially or exponentially decaying spectrum.

    ``polynomial`` gives eigenvalues ``scale * j**-rate`` (trace-class in the
    untruncated limit only for rate > 1, warned otherwise), ``exponential``
    gives ``scale * exp(-rate * j)``; both are injective for scale > 0.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    j = np.arange(1, d + 1, dtype=float)
    if decay == "polynomial":
        if rate <= 1.0:
            warnings.warn(
                f"polynomial decay rate {rate} <= 1 is not trace-class in the untruncated limit",
                stacklevel=2,
            )
        lam = scale * j**-rate
    elif decay == "exponential":
        lam = scale * np.exp(-rate * j)
    else:
        raise ValueError(f"unknown decay kind {decay!r}")
    return np.diag(lam)


def _matrix_power_sym(c: np.ndarray, power: float) -> np.ndarray:
    dec = eig_sym(c)
    lam = np.maximum(dec.eigenvalues, 0.0)
    v = dec.eigenvectors
    return (v * lam**power) @ v.T


def make_source_target(c_xx, spec: SourceSpec, d_y: int) -> np.ndarray:
    """Draw a target of exact smoothness radius ``R`` at order ``nu``.

    A Gaussian matrix is rescaled to HS norm ``R`` and composed with
    ``c_xx**nu``; round-tripping through :func:`source_condition_value`
    recovers ``R**2`` whenever ``c_xx`` is injective.
    """
    c_xx = as_operator(c_xx)
    rng = np.random.default_rng(spec.seed)
    tilde = rng.standard_normal((d_y, c_xx.shape[0]))
    tilde *= spec.R / np.linalg.norm(tilde)
    if spec.nu == 0:
        return tilde
    return tilde @ _matrix_power_sym(c_xx, spec.nu)


def _noise_factor(noise_cov: np.ndarray) -> np.ndarray:
    dec = eig_sym(noise_cov)
    lam = dec.eigenvalues
    if lam.size and lam.min() < -1e-10 * (1.0 + abs(lam).max()):
        raise ValueError("noise covariance must be PSD")
    return dec.eigenvectors * np.sqrt(np.maximum(lam, 0.0))


def make_linear_model(c_xx, theta_star, noise_cov) -> ModelOracle:
    """Linear model oracle: exogenous Gaussian noise around ``theta_star x``."""
    theta_star = as_operator(theta_star)
    noise_cov = as_operator(noise_cov)
    if noise_cov.shape != (theta_star.shape[0], theta_star.shape[0]):
        raise ValueError("noise covariance must be d_y x d_y")
    return ModelOracle(
        kind="linear",
        c_xx_true=c_xx,
        theta_star=theta_star,
        conditional_mean=lambda x: theta_star @ x,
        noise_cov=noise_cov,
        m_star=0.0,
    )


def _draw_inputs(model: ModelOracle, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, model.d_x)) * np.sqrt(model.spectrum)
    return z @ model.basis.T


def _draw_noise(model: ModelOracle, n: int, rng: np.random.Generator) -> np.ndarray:
    factor = _noise_factor(model.noise_cov)
    return rng.standard_normal((n, model.d_y)) @ factor.T


def sample_linear_model(model: ModelOracle, n: int, seed: int) -> SampleSet:
    """Draw ``n`` i.i.d. pairs from a linear model oracle."""
    if model.kind != "linear":
        raise ValueError(f"expected a linear model oracle, got kind {model.kind!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    xs = _draw_inputs(model, n, rng)
    ys = xs @ model.theta_star.T + _draw_noise(model, n, rng)
    return SampleSet(xs=xs, ys=ys)


def sample_misspecified(
    c_xx,
    n: int,
    seed: int,
    *,
    d_y: int = 3,
    gamma: float = 0.5,
    noise_scale: float = 0.3,
    theta_scale: float = 1.0,
) -> tuple[SampleSet, ModelOracle]:
    """Draw from a quadratically misspecified model with analytic optimum.

    The response is ``theta0 x + gamma * B (z*z - lam) + eps`` where ``z``
    are the coordinates of ``x`` in the eigenbasis of ``c_xx`` and ``lam``
    its eigenvalues.  The centred quadratic has zero covariance with ``x``
    (odd Gaussian moments vanish), so the best linear predictor equals
    ``theta0`` and the misspecification error has the closed form
    ``gamma * sqrt(sum_k 2 lam_k^2 |B[:, k]|^2)``.
    """
    c_xx = as_operator(c_xx)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    d_x = c_xx.shape[0]
    theta0 = rng.standard_normal((d_y, d_x))
    theta0 *= theta_scale / np.linalg.norm(theta0)
    quad_mix = rng.standard_normal((d_y, d_x))
    quad_mix /= np.linalg.norm(quad_mix)
    noise_cov = (noise_scale**2) * np.eye(d_y)

    dec = eig_sym(c_xx)
    basis = dec.eigenvectors
    lam = np.maximum(dec.eigenvalues, 0.0)

    def conditional_mean(x, _t=theta0, _b=quad_mix, _v=basis, _l=lam, _g=gamma):
        z = _v.T @ x
        return _t @ x + _g * (_b @ (z * z - _l))

    m_star = float(gamma * np.sqrt(np.sum(2.0 * lam**2 * np.sum(quad_mix**2, axis=0))))
    kind = "linear" if gamma == 0.0 else "quadratic-misspecified"
    oracle = ModelOracle(
        kind=kind,
        c_xx_true=c_xx,
        theta_star=theta0,
        conditional_mean=conditional_mean,
        noise_cov=noise_cov,
        m_star=m_star,
        basis=basis,
        spectrum=lam,
        quad_gain=gamma,
        quad_mix=quad_mix,
    )

    z = rng.standard_normal((n, d_x)) * np.sqrt(lam)
    xs = z @ basis.T
    quad = (z * z - lam) @ quad_mix.T
    ys = xs @ theta0.T + gamma * quad + _draw_noise(oracle, n, rng)
    return SampleSet(xs=xs, ys=ys), oracle


def _moment_sup(norms: np.ndarray, p_max: int, scaling: Callable[[float], float]) -> float:
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    peak = float(norms.max()) if norms.size else 0.0
    if peak == 0.0:
        return 0.0
    scaled = norms / peak
    best = 0.0
    for p in range(1, p_max + 1):
        moment = peak * float(np.mean(scaled**p)) ** (1.0 / p)
        best = max(best, moment / scaling(p))
    return best


def psi2_estimate(side, p_max: int = 32) -> float:
    """Empirical sub-Gaussian norm: ``max_p |norms|_p / sqrt(p)`` up to p_max.

    The truncation to finite ``p_max`` makes this a one-sided underestimate
    of the analytic supremum.
    """
    side = np.asarray(side, dtype=float)
    norms = np.linalg.norm(side, axis=1) if side.ndim == 2 else np.abs(side)
    return _moment_sup(norms, p_max, np.sqrt)


def psi1_estimate(side, p_max: int = 32) -> float:
    """Empirical sub-exponential norm: ``max_p |norms|_p / p`` up to p_max."""
    side = np.asarray(side, dtype=float)
    norms = np.linalg.norm(side, axis=1) if side.ndim == 2 else np.abs(side)
    return _moment_sup(norms, p_max, float)


@dataclass(frozen=True)
class TailNormEstimate:
    """Plug-in tail norms of a calibration sample.

    ``b_psi2`` combines them as ``|theta_star|_op psi2_x^2 + psi2_x psi2_y``;
    estimates are nondecreasing in ``p_max`` and carry the sample size used.
    """

    psi2_x: float
    psi2_y: float
    b_psi2: float
    p_max: int
    mc_samples: int


def estimate_tail_norms(data: SampleSet, theta_star=None, p_max: int = 32) -> TailNormEstimate:
    """Estimate the tail norms of a sample, optionally with the optimum's norm."""
    psi2_x = psi2_estimate(data.xs, p_max)
    psi2_y = psi2_estimate(data.ys, p_max)
    opnorm = 0.0
    if theta_star is not None:
        opnorm = float(np.linalg.svd(as_operator(theta_star), compute_uv=False)[0])
    return TailNormEstimate(
        psi2_x=psi2_x,
        psi2_y=psi2_y,
        b_psi2=opnorm * psi2_x**2 + psi2_x * psi2_y,
        p_max=p_max,
        mc_samples=data.n,
    )
