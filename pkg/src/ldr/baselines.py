"""Closed-form eigenvector and SVD solutions used as comparison points.

The heuristics for LDA and MAF take the top generalized eigenvectors of a
trace-ratio problem and orthogonalize them; they solve the trace-of-quotient
problem exactly but not the quotient-of-traces objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._linalg import FLOOR_RATIO, floored_eigh, sym_inv_sqrt, sym_sqrt  # noqa: F401
from .data import as_data_matrix
from .errors import DegenerateSpectrumError, InvalidShapeError
from .geometry import fix_signs, orthogonalize
from .objectives import LaggedCovariances, NeighborhoodGraph, ScatterPair, lpp_matrices

__all__ = [
    "SpectralSolution",
    "sym_inv_sqrt",
    "sym_sqrt",
    "pca_svd",
    "lda_heuristic",
    "cca_traditional",
    "maf_heuristic",
    "lpp_generalized_eig",
    "ppca_closed_form",
]


@dataclass
class SpectralSolution:
    """Frame (or frame pair), linear map(s) and the selected spectrum.

    ``values`` is sorted nonincreasing.
    """

    frame: Any
    mapping: Any
    values: np.ndarray
    info: dict = field(default_factory=dict)


def _check_r(r, d):
    if not 1 <= r <= d:
        raise InvalidShapeError(f"need 1 <= r <= {d}, got r={r}")


def _sorted_eigh(A, descending=True):
    """Symmetric eigendecomposition with deterministic order and signs.

    Stable sort on the eigenvalues; ties are broken lexicographically on the
    sign-normalized eigenvectors.
    """
    w, Q = np.linalg.eigh(0.5 * (A + A.T))
    Q = fix_signs(Q)
    key = -w if descending else w
    # lexsort uses the last key as primary
    scale = max(float(np.max(np.abs(w), initial=0.0)), np.finfo(float).tiny)
    order = np.lexsort(tuple(-Q[::-1, :]) + (np.round(key / scale, 12),))
    return w[order], Q[:, order]


def pca_svd(X, r: int) -> SpectralSolution:
    """Top-r left singular vectors of X (principal axes of ``X X^T``)."""
    X = as_data_matrix(X)
    _check_r(r, X.shape[0])
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if U.shape[1] < r:
        # fewer samples than requested axes: complete the basis from X X^T
        lam, Q = _sorted_eigh(X @ X.T)
        M = Q[:, :r]
        return SpectralSolution(M, M.T, np.maximum(lam[:r], 0.0))
    M = fix_signs(U[:, :r])
    return SpectralSolution(M, M.T, s[:r] ** 2)


def _whitened_top(num, den, r, floor_ratio):
    """Top-r eigenvectors of ``den^{-1} num`` via the symmetric reduction."""
    d = num.shape[0]
    _check_r(r, d)
    w, Q = floored_eigh(den, floor_ratio)
    Wh = (Q / np.sqrt(w)) @ Q.T
    vals, U = _sorted_eigh(Wh @ num @ Wh)
    V = Wh @ U[:, :r]
    return vals[:r], V


def lda_heuristic(sp: ScatterPair, r: int, floor_ratio: float = FLOOR_RATIO) -> SpectralSolution:
    """Orthogonalized top-r eigenvectors of ``Sw^{-1} Sb``."""
    vals, V = _whitened_top(sp.between, sp.within, r, floor_ratio)
    M = orthogonalize(V)
    return SpectralSolution(M, M.T, vals, {"eigenvectors": V})


def maf_heuristic(lc: LaggedCovariances, r: int, floor_ratio: float = FLOOR_RATIO) -> SpectralSolution:
    """Orthogonalized top-r eigenvectors of ``S^{-1} S_delta``."""
    vals, V = _whitened_top(lc.sigma_delta, lc.sigma, r, floor_ratio)
    M = orthogonalize(V)
    return SpectralSolution(M, M.T, vals, {"eigenvectors": V})


def cca_traditional(Xa, Xb, r: int, floor_ratio: float = FLOOR_RATIO) -> SpectralSolution:
    """Hotelling's CCA via whitening and an SVD of the whitened cross-covariance.

    Returns frames ``(Ma, Mb)`` (top singular vector pairs), maps
    ``Pa = Ma^T ((1/n) Xa Xa^T)^{-1/2}`` and likewise ``Pb``, and the
    canonical correlations. ``info["orthogonalized"]`` holds the QR
    orthogonalization of ``(Pa^T, Pb^T)``, the usual heuristic when an
    orthogonal projection is wanted.
    """
    Xa, Xb = as_data_matrix(Xa), as_data_matrix(Xb)
    if Xa.shape[1] != Xb.shape[1]:
        raise InvalidShapeError("both views need the same number of samples")
    _check_r(r, min(Xa.shape[0], Xb.shape[0]))
    n = Xa.shape[1]
    Wa = sym_inv_sqrt(Xa @ Xa.T / n, floor_ratio)
    Wb = sym_inv_sqrt(Xb @ Xb.T / n, floor_ratio)
    T = Wa @ (Xa @ Xb.T / n) @ Wb
    U, s, Vt = np.linalg.svd(T)
    Ma, Mb = fix_signs(U[:, :r], Vt[:r].T)
    Pa, Pb = Ma.T @ Wa, Mb.T @ Wb
    info = {"orthogonalized": (orthogonalize(Pa.T), orthogonalize(Pb.T))}
    return SpectralSolution((Ma, Mb), (Pa, Pb), s[:r], info)


def lpp_generalized_eig(X, g: NeighborhoodGraph, r: int) -> SpectralSolution:
    """Bottom-r generalized eigenvectors of ``X L X^T v = lambda X D X^T v``.

    Computed in whitened coordinates, where the frame is the bottom-r
    eigenvectors of the whitened Laplacian form; the map is ``M^T S^{-1/2}``.
    Columns are returned in order of increasing eigenvalue, ``values`` sorted
    nonincreasing.
    """
    Wh, A = lpp_matrices(X, g)
    _check_r(r, A.shape[0])
    w, Q = _sorted_eigh(A, descending=False)
    M = Q[:, :r]
    V = Wh @ M
    return SpectralSolution(M, M.T @ Wh, w[:r][::-1].copy(), {"eigenvectors": V})


def ppca_closed_form(X, r: int):
    """Maximum-likelihood PPCA loading and noise variance.

    With ``(1/n) X X^T = U S U^T``: ``sigma2`` is the mean of the discarded
    eigenvalues and ``M = U_r (S_r - sigma2 I)^{1/2}``. Directions whose
    eigenvalue ties with ``sigma2`` get zero loading.

    Returns
    -------
    M : ndarray, shape (d, r)
    sigma2 : float
    """
    X = as_data_matrix(X)
    d, n = X.shape
    if not 1 <= r < d:
        raise InvalidShapeError(f"need 1 <= r < d, got r={r}, d={d}")
    lam, U = _sorted_eigh(X @ X.T / n)
    lam = np.maximum(lam, 0.0)
    sigma2 = float(lam[r:].mean())
    if not sigma2 > 0:
        raise DegenerateSpectrumError("discarded eigenvalues are all zero; noise variance is 0")
    excess = lam[:r] - sigma2
    tol = 1e-10 * max(lam[0], 1.0)
    if np.any(excess < -tol):
        raise DegenerateSpectrumError("retained eigenvalue below the noise variance")
    M = U[:, :r] * np.sqrt(np.maximum(excess, 0.0))
    return M, sigma2
