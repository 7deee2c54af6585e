"""Finite orthonormal-basis truncations of Hilbert-space elements and operators.

Elements of a (separable) Hilbert space are represented by their coefficient
vectors in a fixed orthonormal basis truncated to dimension ``d``; bounded
operators between two such spaces are dense ``d_out x d_in`` matrices.  All
functions here are pure and never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_vector",
    "as_operator",
    "outer",
    "hs_inner",
    "schatten_norm",
    "empirical_cov",
    "SpectralDecomp",
    "eig_sym",
    "apply_spectral_fn",
    "pseudoinverse",
]

#: relative asymmetry tolerated by :func:`eig_sym` before raising
SYMMETRY_TOL = 1e-8

#: eigenvalues above -PSD_TOL * scale are clipped to zero by apply_spectral_fn
PSD_TOL = 1e-10


def as_vector(x) -> np.ndarray:
    """Validate and return a coefficient vector as a 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-d coefficient vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("coefficient vector has non-finite entries")
    return v


def as_operator(a) -> np.ndarray:
    """Validate and return an operator as a 2-d float matrix."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.size < 1:
        raise ValueError(f"expected a 2-d operator matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator matrix has non-finite entries")
    return m


def outer(y, x) -> np.ndarray:
    """Rank-one operator ``y (x, .)``: applied to ``v`` it returns ``<x, v> y``.

    Its Schatten norm equals ``|x| |y|`` for every order p.
    """
    y = as_vector(y)
    x = as_vector(x)
    return np.outer(y, x)


def hs_inner(a, b) -> float:
    """Trace inner product ``trace(a^T b)`` of two equally shaped operators."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def schatten_norm(a, p) -> float:
    """l^p norm of the singular value sequence, p in {1, 2, inf}.

    p=2 is the Frobenius (Hilbert--Schmidt) norm, p=inf the operator norm.
    """
    a = as_operator(a)
    if p == 2:
        return float(np.linalg.norm(a))
    sv = np.linalg.svd(a, compute_uv=False)
    if p == 1:
        return float(np.sum(sv))
    if p == np.inf or p == "inf":
        return float(sv[0]) if sv.size else 0.0
    raise ValueError(f"unsupported Schatten order {p!r}; use 1, 2 or inf")


def empirical_cov(xs, ys=None) -> np.ndarray:
    """Uncentred empirical covariance ``(1/n) sum_i y_i (x_i, .)``.

    Parameters
    ----------
    xs : (n, d_x) array
        Sample coefficient rows of the input variable.
    ys : (n, d_y) array, optional
        Sample rows of the output variable; defaults to ``xs``, in which
        case the result is symmetric positive semi-definite of rank <= n.

    Returns
    -------
    (d_y, d_x) array
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2:
        raise ValueError("xs must be an (n, d) array of sample rows")
    ys = xs if ys is None else np.asarray(ys, dtype=float)
    if ys.ndim != 2 or ys.shape[0] != xs.shape[0]:
        raise ValueError("xs and ys must have the same number of rows")
    n = xs.shape[0]
    if n == 0:
        raise ValueError("empirical covariance of an empty sample")
    return (ys.T @ xs) / n


@dataclass(frozen=True)
class SpectralDecomp:
    """Symmetric eigendecomposition with eigenvalues sorted descending.

    ``eigenvectors`` holds orthonormal columns; ``source_dim`` is the side
    length of the decomposed matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def source_dim(self) -> int:
        return self.eigenvectors.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def eig_sym(c, sym_tol: float = SYMMETRY_TOL) -> SpectralDecomp:
    """Eigendecomposition of a (numerically) symmetric matrix.

    The input is symmetrised as ``(c + c^T)/2`` first; asymmetry beyond
    ``sym_tol`` relative to the entry scale is rejected.
    """
    c = as_operator(c)
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"eig_sym needs a square matrix, got {c.shape}")
    scale = 1.0 + np.abs(c).max()
    asym = np.abs(c - c.T).max()
    if asym > sym_tol * scale:
        raise ValueError(f"matrix is not symmetric: max asymmetry {asym:.3e}")
    sym = (c + c.T) / 2.0
    w, v = np.linalg.eigh(sym)
    order = np.argsort(w)[::-1]
    return SpectralDecomp(eigenvalues=w[order], eigenvectors=v[:, order])


def apply_spectral_fn(c, f, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Apply a scalar function to a symmetric PSD matrix via its spectrum.

    Returns ``V f(L) V^T`` for the eigendecomposition ``c = V L V^T``.
    Round-off eigenvalues in ``[-psd_tol * scale, 0)`` are clipped to zero
    before ``f`` is evaluated; more negative spectra are rejected.  ``f``
    must be finite on the (clipped) spectrum, e.g. ``lambda**-1`` at an
    exactly zero eigenvalue is rejected unless the caller builds the cutoff
    into ``f`` itself.
    """
    dec = eig_sym(c)
    lam = dec.eigenvalues
    scale = 1.0 + (np.abs(lam).max() if lam.size else 0.0)
    if lam.size and lam.min() < -psd_tol * scale:
        raise ValueError(f"matrix is not PSD: min eigenvalue {lam.min():.3e}")
    lam = np.where(lam < 0.0, 0.0, lam)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray([f(x) for x in lam], dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = lam[~np.isfinite(vals)]
        raise ValueError(
            f"spectral function is undefined on eigenvalue(s) {bad}; "
            "supply an explicit cutoff in f"
        )
    v = dec.eigenvectors
    return (v * vals) @ v.T


def pseudoinverse(a, tol: float = 1e-10) -> np.ndarray:
    """Moore--Penrose pseudoinverse with a relative singular-value cutoff.

    Singular values below ``tol * sigma_max`` are treated as exactly zero;
    the four Penrose identities hold up to round-off for the retained rank.
    """
    a = as_operator(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    u, sv, vt = np.linalg.svd(a, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]))
    keep = sv > tol * sv[0]
    inv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
    return (vt.T * inv) @ u.T
