"""Spectral regularisation strategies as first-class values.

A strategy is a family of scalar filter functions ``g_alpha`` approximating
``1/lambda``, together with declared constants: ``D`` bounding
``|lambda g_alpha|``, ``gamma0`` bounding the residual
``|1 - lambda g_alpha|``, ``B`` such that ``|g_alpha| < B / alpha``, and a
qualification order controlling how fast ``lambda^q |r_alpha|`` decays with
``alpha``.  The constants are declared, not derived; :func:`verify_strategy`
and :func:`qualification_check` are the grid-based enforcement mechanism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .hilbert import apply_spectral_fn, as_operator

__all__ = [
    "RegStrategy",
    "tikhonov",
    "truncation",
    "landweber",
    "g_eval",
    "residual_eval",
    "StrategyReport",
    "verify_strategy",
    "qualification_check",
    "has_qualification",
    "regularized_inverse",
    "default_lambda_grid",
    "default_alpha_grid",
]

#: slack added to declared constants in grid checks
CHECK_SLACK = 1e-12


@dataclass(frozen=True)
class RegStrategy:
    """A named filter family with its declared constants.

    ``qualification`` is either a finite order or the string ``"arbitrary"``;
    ``gamma_q`` is the constant at the declared order (for strategies with
    arbitrary qualification, :meth:`gamma_at` gives the order-dependent
    constant).  ``tau`` is the step size of the iterative strategy and is
    ``None`` until resolved against an operator norm.
    """

    kind: str
    D: float
    gamma0: float
    B: Optional[float]
    qualification: Union[float, str]
    gamma_q: float
    tau: Optional[float] = None

    def gamma_at(self, q: float) -> float:
        """Declared qualification constant at order ``q``."""
        if q <= 0:
            raise ValueError("qualification order must be positive")
        if self.kind == "landweber":
            self._require_tau()
            return (q / self.tau) ** q
        return self.gamma_q

    def covers_order(self, q: float) -> bool:
        """Whether the declared qualification reaches order ``q``."""
        if self.qualification == "arbitrary":
            return True
        return q <= float(self.qualification)

    def _require_tau(self) -> None:
        if self.tau is None:
            raise ValueError(
                "landweber needs an explicit step size tau here; "
                "it is only auto-resolved when applied to an operator"
            )


def tikhonov() -> RegStrategy:
    """Shifted-inverse filter ``1 / (alpha + lambda)`` (ridge regression)."""
    return RegStrategy("tikhonov", D=1.0, gamma0=1.0, B=1.0, qualification=1.0, gamma_q=1.0)


def truncation() -> RegStrategy:
    """Spectral cut-off ``1/lambda`` above ``alpha`` (principal components)."""
    return RegStrategy(
        "truncation", D=1.0, gamma0=1.0, B=1.0, qualification="arbitrary", gamma_q=1.0
    )


def landweber(tau: Optional[float] = None) -> RegStrategy:
    """Iterated gradient filter with ``ceil(1/alpha)`` steps of size ``tau``.

    ``tau=None`` defers the step size until application to an operator,
    where it defaults to ``0.9 / |C|_op``.  Declared constants hold on the
    stable interval ``lambda <= 1/tau``; B is kept >= 1 so that the
    weighted filter bound with constant (D+1)B remains valid.
    """
    if tau is not None and tau <= 0:
        raise ValueError("tau must be positive")
    return RegStrategy(
        "landweber",
        D=1.0,
        gamma0=1.0,
        B=None if tau is None else max(1.0, 2.0 * tau),
        qualification="arbitrary",
        gamma_q=1.0,
        tau=tau,
    )


def _landweber_steps(alpha: float) -> int:
    return max(1, math.ceil(1.0 / alpha))


def _check_alpha(alpha: float) -> None:
    if alpha <= 0:
        raise ValueError("alpha must be positive")


def g_eval(strategy: RegStrategy, alpha: float, lam):
    """Evaluate the filter ``g_alpha`` at one or many spectral points."""
    _check_alpha(alpha)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    if strategy.kind == "tikhonov":
        out = 1.0 / (alpha + lam)
    elif strategy.kind == "truncation":
        with np.errstate(divide="ignore"):
            out = np.where(lam > alpha, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
    elif strategy.kind == "landweber":
        strategy._require_tau()
        out = _landweber_g(strategy.tau, alpha, np.atleast_1d(lam)).reshape(lam.shape)
    else:
        raise ValueError(f"unknown strategy kind {strategy.kind!r}")
    return float(out) if out.ndim == 0 else out


def _landweber_g(tau: float, alpha: float, lam: np.ndarray) -> np.ndarray:
    # geometric sum tau * sum_{j<m} (1 - tau lam)^j = (1 - (1 - tau lam)^m) / lam
    m = _landweber_steps(alpha)
    out = np.empty_like(lam)
    z = tau * lam
    small = z < 1.0
    if np.any(small):
        ls = lam[small]
        # 1 - (1 - tau lam)^m via expm1/log1p, exact tau*m limit at lam = 0
        num = -np.expm1(m * np.log1p(-z[small]))
        out[small] = np.where(ls > 0, num / np.where(ls > 0, ls, 1.0), tau * m)
    if np.any(~small):
        r = 1.0 - z[~small]
        out[~small] = (1.0 - np.power(r, m)) / lam[~small]
    return out


def residual_eval(strategy: RegStrategy, alpha: float, lam):
    """Residual ``1 - lambda * g_alpha(lambda)`` of the filter.

    Evaluated through the per-strategy closed forms (``alpha/(alpha+lambda)``,
    the indicator of ``lambda <= alpha``, ``(1 - tau lambda)^m``) rather than
    literally as ``1 - lambda g``, which loses all precision once the true
    residual underflows.
    """
    _check_alpha(alpha)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be nonnegative")
    if strategy.kind == "tikhonov":
        out = alpha / (alpha + lam_arr)
    elif strategy.kind == "truncation":
        out = np.where(lam_arr > alpha, 0.0, 1.0)
    elif strategy.kind == "landweber":
        strategy._require_tau()
        out = _landweber_residual(strategy.tau, alpha, np.atleast_1d(lam_arr)).reshape(lam_arr.shape)
    else:
        raise ValueError(f"unknown strategy kind {strategy.kind!r}")
    return float(out) if out.ndim == 0 else out


def _landweber_residual(tau: float, alpha: float, lam: np.ndarray) -> np.ndarray:
    m = _landweber_steps(alpha)
    z = tau * lam
    out = np.empty_like(lam)
    small = z < 1.0
    if np.any(small):
        out[small] = np.exp(m * np.log1p(-z[small]))
    if np.any(~small):
        out[~small] = np.power(1.0 - z[~small], m)
    return out


def default_lambda_grid(n: int = 400) -> np.ndarray:
    return np.logspace(-8, 1, n)


def default_alpha_grid(n: int = 400) -> np.ndarray:
    return np.logspace(-6, 0, n)


@dataclass(frozen=True)
class StrategyReport:
    """Empirical grid maxima against the declared constants."""

    max_lambda_g: float
    max_residual: float
    max_g_alpha: float
    passed: bool


def verify_strategy(strategy: RegStrategy, alphas=None, lambdas=None) -> StrategyReport:
    """Check the three defining filter bounds on a grid.

    Returns the empirical maxima of ``|lambda g|``, ``|1 - lambda g|`` and
    ``alpha |g|``; the report passes iff they stay within the declared
    ``D``, ``gamma0`` and ``B`` (with a 1e-12 slack).
    """
    alphas = default_alpha_grid() if alphas is None else np.asarray(alphas, dtype=float)
    lambdas = default_lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    if np.any(alphas <= 0) or np.any(lambdas < 0):
        raise ValueError("grids must be positive (alphas) and nonnegative (lambdas)")
    max_lg = 0.0
    max_r = 0.0
    max_ga = 0.0
    for alpha in alphas:
        g = np.asarray(g_eval(strategy, float(alpha), lambdas))
        r = np.abs(np.asarray(residual_eval(strategy, float(alpha), lambdas)))
        max_lg = max(max_lg, float(np.abs(lambdas * g).max()))
        max_r = max(max_r, float(r.max()))
        max_ga = max(max_ga, float((np.abs(g) * alpha).max()))
    b = strategy.B
    if b is None:
        raise ValueError("strategy has no declared B; resolve tau first")
    passed = (
        max_lg <= strategy.D + CHECK_SLACK
        and max_r <= strategy.gamma0 + CHECK_SLACK
        and max_ga <= b + CHECK_SLACK
    )
    return StrategyReport(max_lambda_g=max_lg, max_residual=max_r, max_g_alpha=max_ga, passed=passed)


def qualification_check(strategy: RegStrategy, q: float, alphas=None, lambdas=None) -> float:
    """Empirical sup of ``lambda^q |r_alpha| / alpha^q`` over the grid.

    The strategy covers order ``q`` iff the returned sup stays within
    ``strategy.gamma_at(q)`` (plus 1e-12); see :func:`has_qualification`.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    alphas = default_alpha_grid() if alphas is None else np.asarray(alphas, dtype=float)
    lambdas = default_lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    sup = 0.0
    for alpha in alphas:
        r = np.abs(np.asarray(residual_eval(strategy, float(alpha), lambdas)))
        sup = max(sup, float((lambdas**q * r).max() / alpha**q))
    return sup


def has_qualification(strategy: RegStrategy, q: float, alphas=None, lambdas=None) -> bool:
    """Grid-verified qualification at order ``q`` against the declared gamma."""
    sup = qualification_check(strategy, q, alphas=alphas, lambdas=lambdas)
    return sup <= strategy.gamma_at(q) * (1.0 + 1e-9) + CHECK_SLACK


def resolve_tau(strategy: RegStrategy, c) -> RegStrategy:
    """Bind the iterative step size to ``0.9 / |c|_op`` when unset."""
    if strategy.kind != "landweber" or strategy.tau is not None:
        return strategy
    c = as_operator(c)
    opnorm = float(np.linalg.svd(c, compute_uv=False)[0]) if c.size else 0.0
    if opnorm <= 0:
        raise ValueError("cannot resolve tau against a zero operator")
    tau = 0.9 / opnorm
    return replace(strategy, tau=tau, B=max(1.0, 2.0 * tau))


def regularized_inverse(strategy: RegStrategy, alpha: float, c) -> np.ndarray:
    """Filtered inverse ``g_alpha(c)`` of a symmetric PSD matrix.

    For the shifted-inverse filter this equals ``(c + alpha I)^{-1}`` up to
    round-off.
    """
    _check_alpha(alpha)
    c = as_operator(c)
    strategy = resolve_tau(strategy, c)
    return apply_spectral_fn(c, lambda lam: float(g_eval(strategy, alpha, lam)))
