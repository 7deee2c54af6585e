"""Right-multiplication operators theta -> theta C and the factorisation problem.

For a covariance matrix ``C`` acting on the input space, the map
``theta -> theta C`` on operator space is the forward map of the least squares
regression problem.  This module provides the map itself, its brute-force
Kronecker representation on column-stacked matrices (for spectral tests), the
pseudoinverse solution of ``theta C_XX = C_YX`` and range-inclusion
diagnostics that decide whether a bounded/Hilbert--Schmidt solution exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hilbert import as_operator, eig_sym, pseudoinverse

__all__ = [
    "ORACLE_CAP",
    "PrecomposeRep",
    "ExistenceReport",
    "precompose_apply",
    "precompose_oracle",
    "vec",
    "unvec",
    "precompose_adjoint_check",
    "solve_pseudo",
    "douglas_check",
    "source_condition_value",
]

#: refuse to materialise oracles with side length d_x * d_y above this
ORACLE_CAP = 4096


def precompose_apply(c, theta) -> np.ndarray:
    """Apply the precomposition map: returns ``theta @ c``."""
    c = as_operator(c)
    theta = as_operator(theta)
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"c must be square, got {c.shape}")
    if theta.shape[1] != c.shape[0]:
        raise ValueError(f"shape mismatch: theta {theta.shape} vs c {c.shape}")
    return theta @ c


def vec(theta) -> np.ndarray:
    """Column-stacking vectorisation of a matrix (Fortran order)."""
    return np.asarray(theta, dtype=float).flatten(order="F")


def unvec(v, d_out: int, d_in: int) -> np.ndarray:
    """Inverse of :func:`vec` for a ``d_out x d_in`` matrix."""
    return np.asarray(v, dtype=float).reshape((d_out, d_in), order="F")


@dataclass(frozen=True)
class PrecomposeRep:
    """Dense oracle for the precomposition map on column-stacked matrices.

    ``matrix`` satisfies ``matrix @ vec(theta) == vec(theta @ c)`` and equals
    ``kron(c.T, eye(d_y))``; its eigenvalues are those of ``c`` with
    multiplicity ``d_y`` each.
    """

    c: np.ndarray
    d_y: int
    matrix: np.ndarray

    def apply_vec(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)


def precompose_oracle(c, d_y: int, cap: int = ORACLE_CAP) -> PrecomposeRep:
    """Materialise the Kronecker oracle ``kron(c.T, eye(d_y))``.

    Refuses when ``c.shape[0] * d_y > cap`` since the oracle has the square
    of that many entries.  Intended for testing spectral identities, not for
    production-sized problems.
    """
    c = as_operator(c)
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"c must be square, got {c.shape}")
    if d_y < 1:
        raise ValueError("d_y must be a positive integer")
    side = c.shape[0] * d_y
    if side > cap:
        raise ValueError(
            f"oracle side {side} exceeds cap {cap}; refusing to materialise"
        )
    return PrecomposeRep(c=c.copy(), d_y=int(d_y), matrix=np.kron(c.T, np.eye(d_y)))


def precompose_adjoint_check(c, theta1, theta2) -> tuple[float, float]:
    """Both sides of the trace-duality identity for the precomposition map.

    Returns ``(<theta1 c, theta2>_HS, <theta1, theta2 c^T>_HS)``; the two
    values agree by cyclic invariance of the trace, and the caller asserts
    equality.
    """
    c = as_operator(c)
    t1 = as_operator(theta1)
    t2 = as_operator(theta2)
    if t1.shape != t2.shape or t1.shape[1] != c.shape[0] or c.shape[0] != c.shape[1]:
        raise ValueError("incompatible shapes for adjoint check")
    lhs = float(np.sum((t1 @ c) * t2))
    rhs = float(np.sum(t1 * (t2 @ c.T)))
    return lhs, rhs


def solve_pseudo(c_xx, c_yx, tol: float = 1e-10) -> np.ndarray:
    """Minimal-HS-norm solution candidate ``c_yx @ pinv(c_xx)``.

    For symmetric PSD ``c_xx`` this equals the transpose of
    ``pinv(c_xx) @ c_yx.T``; it vanishes on the null space of ``c_xx`` and,
    whenever ``theta c_xx = c_yx`` is solvable, it is the solution of
    minimal Hilbert--Schmidt norm.  When the factorisation is unsolvable
    the residual ``|theta c_xx - c_yx|`` stays bounded away from zero.
    """
    c_xx = as_operator(c_xx)
    c_yx = as_operator(c_yx)
    if c_xx.shape[0] != c_xx.shape[1] or c_yx.shape[1] != c_xx.shape[0]:
        raise ValueError("c_xx must be square and match c_yx's columns")
    return c_yx @ pseudoinverse(c_xx, tol)


@dataclass(frozen=True)
class ExistenceReport:
    """Diagnostics for solvability of ``theta c_xx = c_yx``.

    ``sup_ratio_opnorm`` and ``hs_norm_sq`` are the operator norm and squared
    HS norm of the minimal solution (``inf`` when the range inclusion fails);
    ``douglas_beta`` is the smallest ``beta`` making
    ``beta c_xx^2 - c_xy c_yx`` positive semi-definite, absent when no finite
    ``beta`` exists.
    """

    range_inclusion: bool
    sup_ratio_opnorm: float
    hs_norm_sq: float
    douglas_beta: Optional[float]
    theta_star: Optional[np.ndarray]


def _rank(sv: np.ndarray, cutoff: float) -> int:
    return int(np.count_nonzero(sv > cutoff))


def douglas_check(c_xx, c_yx, tol: float = 1e-10) -> ExistenceReport:
    """Decide range inclusion and compute the closed-form solution norms.

    Range inclusion of ``range(c_xy)`` in ``range(c_xx)`` is decided by
    comparing the numerical rank of ``[c_xx | c_xy]`` with that of ``c_xx``
    at a common relative cutoff ``tol``.
    """
    c_xx = as_operator(c_xx)
    c_yx = as_operator(c_yx)
    if c_xx.shape[0] != c_xx.shape[1] or c_yx.shape[1] != c_xx.shape[0]:
        raise ValueError("c_xx must be square and match c_yx's columns")

    c_xy = c_yx.T
    aug = np.hstack([c_xx, c_xy])
    sv_aug = np.linalg.svd(aug, compute_uv=False)
    sv_c = np.linalg.svd(c_xx, compute_uv=False)
    scale = sv_aug[0] if sv_aug.size and sv_aug[0] > 0 else 1.0
    cutoff = tol * scale
    included = _rank(sv_aug, cutoff) == _rank(sv_c, cutoff)

    if not included:
        return ExistenceReport(
            range_inclusion=False,
            sup_ratio_opnorm=math.inf,
            hs_norm_sq=math.inf,
            douglas_beta=None,
            theta_star=None,
        )

    theta = c_yx @ pseudoinverse(c_xx, tol)
    opnorm = float(np.linalg.svd(theta, compute_uv=False)[0]) if theta.size else 0.0
    hs_sq = float(np.sum(theta * theta))
    return ExistenceReport(
        range_inclusion=True,
        sup_ratio_opnorm=opnorm,
        hs_norm_sq=hs_sq,
        douglas_beta=opnorm**2,
        theta_star=theta,
    )


def source_condition_value(c_xx, c_yx, nu: float, tol: float = 1e-10) -> float:
    """Squared HS norm of the smoothness witness ``c_yx @ pinv(c_xx^(nu+1))``.

    Finiteness of the returned value is equivalent to the minimal solution
    lying in the smoothness class of order ``nu`` with radius
    ``sqrt(value)``; ``inf`` is returned when ``c_yx`` has mass on the
    numerical null space of ``c_xx``.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    c_xx = as_operator(c_xx)
    c_yx = as_operator(c_yx)
    dec = eig_sym(c_xx)
    lam = dec.eigenvalues
    lmax = lam.max() if lam.size else 0.0
    if lmax <= 0:
        # zero covariance: only c_yx = 0 is representable
        return 0.0 if not np.any(c_yx) else math.inf
    keep = lam > tol * lmax
    v = dec.eigenvectors
    # mass of c_yx on the numerical null space of c_xx means no finite witness
    null_mass = np.linalg.norm(c_yx @ v[:, ~keep]) if np.any(~keep) else 0.0
    if null_mass > tol * (1.0 + np.linalg.norm(c_yx)):
        return math.inf
    inv_pow = np.where(keep, np.where(keep, lam, 1.0) ** -(nu + 1.0), 0.0)
    witness = ((c_yx @ v) * inv_pow) @ v.T
    return float(np.sum(witness * witness))
