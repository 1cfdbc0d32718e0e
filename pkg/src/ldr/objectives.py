"""Orthogonally constrained dimensionality reduction objectives.

Each constructor precomputes the matrices it needs from the data and returns
an :class:`~ldr.solver.Objective` whose ``value`` is minimized over the
Stiefel manifold (maximization problems are negated). Gradients are Euclidean
gradients in the ambient space ``R^{d x r}``; values are defined off the
manifold too, so they can be checked by finite differences.

Normalization: PCA, SFA and MDS use plain sums over samples; the lagged
covariances used by MAF use ``1/n`` averages.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._linalg import laplacian, pairwise_sq_dists, sym_inv_sqrt
from .data import LabeledData, as_data_matrix
from .errors import (
    DegenerateDataError,
    IllPosedError,
    InvalidConfigError,
    InvalidInputError,
    InvalidShapeError,
    NumericalFailure,
)
from .solver import Objective


def _quadratic_objective(name, A, sign=1.0, mapping=None):
    """``sign * tr(M^T A M)`` for symmetric A."""
    A = 0.5 * (A + A.T)

    def value(M):
        return float(sign * np.sum(M * (A @ M)))

    def grad(M):
        return 2.0 * sign * (A @ M)

    return Objective(name, value, grad, rotation_invariant=True, mapping=mapping)


def _check_not_zero(C, what):
    if not np.max(np.abs(C), initial=0.0) > 0:
        raise IllPosedError(f"{what} is zero")


# ---------------------------------------------------------------------------
# PCA and MDS


def pca_objective(X) -> Objective:
    """Reconstruction error ``||X - M M^T X||_F^2`` (X assumed centered)."""
    X = as_data_matrix(X)
    C = X @ X.T
    total = float(np.trace(C))

    def value(M):
        CM = C @ M
        MtCM = M.T @ CM
        return float(total - 2 * np.trace(MtCM) + np.sum((M.T @ M) * MtCM))

    def grad(M):
        CM = C @ M
        # equals -2 (I - M M^T) C M on the manifold
        return -4 * CM + 2 * CM @ (M.T @ M) + 2 * M @ (M.T @ CM)

    return Objective("pca", value, grad, rotation_invariant=True)


def ordered_pca_objective(X, A) -> Objective:
    """``-tr(A M^T X X^T M)`` for a strictly decreasing positive diagonal A.

    Breaks the rotation invariance of PCA so the optimum has its columns on
    the ranked principal axes.
    """
    X = as_data_matrix(X)
    a = np.asarray(A, dtype=float)
    if a.ndim == 2:
        if np.any(a != np.diag(np.diag(a))):
            raise InvalidConfigError("A must be diagonal")
        a = np.diag(a)
    if np.any(a <= 0) or np.any(np.diff(a) >= 0):
        raise InvalidConfigError("A must have strictly decreasing positive entries")
    C = X @ X.T

    def value(M):
        return float(-np.sum((M * (C @ M)) * a))

    def grad(M):
        return -2 * (C @ M) * a

    return Objective("ordered_pca", value, grad, rotation_invariant=False)


def mds_scatter_objective(X) -> Objective:
    """Negated projected scatter ``sum_ij ||M^T x_i - M^T x_j||^2``.

    On centered data this is ``-2n tr(M^T X X^T M)``, the variance form of PCA.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    C = X @ X.T
    s = X.sum(axis=1)

    def value(M):
        Ms = M.T @ s
        return float(-(2 * n * np.sum(M * (C @ M)) - 2 * Ms @ Ms))

    def grad(M):
        return -(4 * n * (C @ M) - 4 * np.outer(s, s @ M))

    return Objective("mds_scatter", value, grad, rotation_invariant=True)


def mds_stress_objective(X, dissimilarities=None) -> Objective:
    """Kruskal-Shephard stress ``sum_ij (d_ij - ||M^T x_i - M^T x_j||)^2``.

    The sum runs over ordered pairs (each unordered pair counted twice).
    Defaults to full-dimensional Euclidean dissimilarities. Pairs whose
    projected distance is exactly zero contribute zero gradient.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    if dissimilarities is None:
        Dx = np.sqrt(pairwise_sq_dists(X))
    else:
        Dx = np.asarray(dissimilarities, dtype=float)
        if Dx.shape != (n, n):
            raise InvalidShapeError("dissimilarities must be n x n")
        if np.max(np.abs(Dx - Dx.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(Dx))):
            raise InvalidInputError("dissimilarities must be symmetric")
        if np.any(Dx < 0) or np.any(np.diag(Dx) != 0):
            raise InvalidInputError("dissimilarities must be nonnegative with zero diagonal")

    def value(M):
        Dy = np.sqrt(pairwise_sq_dists(M.T @ X))
        return float(np.sum((Dx - Dy) ** 2))

    def grad(M):
        Dy = np.sqrt(pairwise_sq_dists(M.T @ X))
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(Dy > 0, -2 * (Dx - Dy) / Dy, 0.0)
        return 2 * X @ (laplacian(w) @ (X.T @ M))

    return Objective("mds_stress", value, grad, rotation_invariant=True)


# ---------------------------------------------------------------------------
# LDA


@dataclass(frozen=True)
class ScatterPair:
    within: np.ndarray
    between: np.ndarray


def scatter_matrices(data, labels=None, classes=None) -> ScatterPair:
    """Within- and between-class scatter, with the global mean taken as 0.

    ``data`` is a :class:`LabeledData` or a data matrix plus ``labels``.
    When ``classes`` is given, every listed class must own a sample.
    """
    if isinstance(data, LabeledData):
        X, labels = data.X, data.labels
    else:
        X = as_data_matrix(data)
        labels = np.asarray(labels)
    if labels.shape != (X.shape[1],):
        raise InvalidShapeError("need exactly one label per sample")
    if classes is not None:
        missing = set(classes) - set(np.unique(labels).tolist())
        if missing:
            raise InvalidInputError(f"empty class(es): {sorted(missing)}")
    d = X.shape[0]
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    for c in np.unique(labels):
        Xc = X[:, labels == c]
        mu = Xc.mean(axis=1)
        R = Xc - mu[:, None]
        Sw += R @ R.T
        Sb += Xc.shape[1] * np.outer(mu, mu)
    return ScatterPair(0.5 * (Sw + Sw.T), 0.5 * (Sb + Sb.T))


def _trace_ratio_objective(name, num, den):
    """``-tr(M^T num M) / tr(M^T den M)``."""

    def value(M):
        return float(-np.sum(M * (num @ M)) / np.sum(M * (den @ M)))

    def grad(M):
        NM, DM = num @ M, den @ M
        b, w = np.sum(M * NM), np.sum(M * DM)
        return -(2 * NM * w - 2 * DM * b) / w ** 2

    return Objective(name, value, grad, rotation_invariant=True)


def lda_objective(sp: ScatterPair) -> Objective:
    """Quotient of traces ``-tr(M^T Sb M) / tr(M^T Sw M)``."""
    _check_not_zero(sp.within, "within-class scatter")
    return _trace_ratio_objective("lda", sp.between, sp.within)


# ---------------------------------------------------------------------------
# CCA


def _cca_blocks(Xa, Xb):
    Xa, Xb = as_data_matrix(Xa), as_data_matrix(Xb)
    if Xa.shape[1] != Xb.shape[1]:
        raise InvalidShapeError("both views need the same number of samples")
    return Xa, Xb, Xa @ Xa.T, Xb @ Xb.T, Xa @ Xb.T


def cca_orthogonal_objective(Xa, Xb) -> Objective:
    """Negated correlation of orthogonal projections ``Ma^T Xa`` and ``Mb^T Xb``.

    The variable is a pair ``(Ma, Mb)``.
    """
    Xa, Xb, Caa, Cbb, Cab = _cca_blocks(Xa, Xb)
    if not (np.trace(Caa) > 0 and np.trace(Cbb) > 0):
        raise DegenerateDataError("a view has zero variance")

    def parts(M):
        Ma, Mb = M
        num = np.sum(Ma * (Cab @ Mb))
        A = np.sum(Ma * (Caa @ Ma))
        B = np.sum(Mb * (Cbb @ Mb))
        if not (A > 0 and B > 0):
            raise DegenerateDataError("zero projected variance")
        return Ma, Mb, num, A, B

    def value(M):
        _, _, num, A, B = parts(M)
        return float(-num / np.sqrt(A * B))

    def grad(M):
        Ma, Mb, num, A, B = parts(M)
        root = np.sqrt(A * B)
        ga = -(Cab @ Mb) / root + num * (Caa @ Ma) / (A * root)
        gb = -(Cab.T @ Ma) / root + num * (Cbb @ Mb) / (B * root)
        return ga, gb

    return Objective("cca_orth", value, grad, rotation_invariant=False)


def cca_whitening(Xa, Xb):
    """Inverse square roots of the two sample covariances ``(1/n) X X^T``."""
    Xa, Xb = as_data_matrix(Xa), as_data_matrix(Xb)
    n = Xa.shape[1]
    return sym_inv_sqrt(Xa @ Xa.T / n), sym_inv_sqrt(Xb @ Xb.T / n)


def cca_traditional_objective(Xa, Xb) -> Objective:
    """``-tr(Ma^T Wa Xa Xb^T Wb Mb)`` with whitening ``W = (X X^T)^{-1/2}``.

    Maximized by the top singular vector pairs of the whitened
    cross-covariance. ``mapping`` returns ``(Pa, Pb)`` with
    ``P = M^T ((1/n) X X^T)^{-1/2}``, which gives unit-variance canonical
    variables.
    """
    Xa, Xb, Caa, Cbb, Cab = _cca_blocks(Xa, Xb)
    T = sym_inv_sqrt(Caa) @ Cab @ sym_inv_sqrt(Cbb)
    Wa, Wb = cca_whitening(Xa, Xb)

    def value(M):
        Ma, Mb = M
        return float(-np.sum(Ma * (T @ Mb)))

    def grad(M):
        Ma, Mb = M
        return -(T @ Mb), -(T.T @ Ma)

    def mapping(M):
        Ma, Mb = M
        return Ma.T @ Wa, Mb.T @ Wb

    return Objective("cca_trad", value, grad, rotation_invariant=False, mapping=mapping)


# ---------------------------------------------------------------------------
# temporal objectives


@dataclass(frozen=True)
class LaggedCovariances:
    sigma: np.ndarray
    sigma_delta: np.ndarray
    lag: int


def lagged_covariances(X, delta: int = 1) -> LaggedCovariances:
    """Covariance ``(1/n) X X^T`` and symmetrized lag-``delta`` cross-covariance.

    Columns of X must be in time order. The cross-covariance averages over
    the ``n - delta`` available pairs.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    if not 1 <= delta < n:
        raise InvalidConfigError(f"need 1 <= delta < n, got delta={delta}, n={n}")
    sigma = X @ X.T / n
    A = X[:, delta:] @ X[:, :-delta].T / (n - delta)
    return LaggedCovariances(0.5 * (sigma + sigma.T), 0.5 * (A + A.T), delta)


def maf_objective(lc: LaggedCovariances) -> Objective:
    """Negated lag autocorrelation ``-tr(M^T S_d M) / tr(M^T S M)``."""
    _check_not_zero(lc.sigma, "covariance")
    return _trace_ratio_objective("maf", lc.sigma_delta, lc.sigma)


def maf_crosscov_objective(lc: LaggedCovariances) -> Objective:
    """Negated lag cross-covariance ``-tr(M^T S_d M)``."""
    return _quadratic_objective("maf_crosscov", lc.sigma_delta, -1.0)


def maf_sqdist_objective(lc: LaggedCovariances) -> Objective:
    """``tr(M^T (S - S_d) M)``: mean squared step between lagged projections (up to a factor 2)."""
    return _quadratic_objective("maf_sqdist", lc.sigma - lc.sigma_delta)


def time_derivative(X) -> np.ndarray:
    """Forward differences ``x_{t+1} - x_t`` (n - 1 columns)."""
    X = as_data_matrix(X)
    if X.shape[1] < 2:
        raise InvalidInputError("need at least 2 samples to difference")
    return np.diff(X, axis=1)


def sfa_objective(Xdot) -> Objective:
    """Slowness ``tr(M^T Xdot Xdot^T M)``, i.e. PCA of the derivative, minimized."""
    Xdot = as_data_matrix(Xdot)
    if Xdot.shape[1] < 1:
        raise InvalidInputError("derivative matrix has no samples")
    return _quadratic_objective("sfa", Xdot @ Xdot.T)


# ---------------------------------------------------------------------------
# sufficient dimensionality reduction


def _centering(n):
    return np.eye(n) - np.full((n, n), 1.0 / n)


def _median_distance(Y):
    D = np.sqrt(pairwise_sq_dists(Y))
    iu = np.triu_indices(D.shape[0], 1)
    med = float(np.median(D[iu])) if iu[0].size else 0.0
    return med if med > 0 else 1.0


def _se_kernel(Y, bandwidth):
    return np.exp(-pairwise_sq_dists(Y) / (2 * bandwidth ** 2))


@dataclass(frozen=True)
class KernelPair:
    kz_centered: np.ndarray
    kernel_bandwidth_x: float
    ridge: float
    responses: np.ndarray


def kernel_pair(X, Z, init_frame, ridge: float = 1e-3, bandwidth_z: float | None = None) -> KernelPair:
    """Centered response Gram matrix plus the fixed bandwidth for projections.

    Both kernels are squared exponential. The response bandwidth defaults to
    the median pairwise distance of Z; the projection bandwidth is the median
    pairwise distance of ``init_frame^T X`` and stays fixed afterwards.
    """
    X = as_data_matrix(X)
    Z = as_data_matrix(Z)
    if Z.shape[1] != X.shape[1]:
        raise InvalidShapeError("responses need one column per sample")
    if ridge <= 0:
        raise InvalidConfigError("ridge must be positive")
    n = X.shape[1]
    H = _centering(n)
    sz = bandwidth_z if bandwidth_z is not None else _median_distance(Z)
    Kz = H @ _se_kernel(Z, sz) @ H
    sx = _median_distance(np.asarray(init_frame).T @ X)
    return KernelPair(0.5 * (Kz + Kz.T), sx, float(ridge), Z)


def sdr_objective(X, kp: KernelPair) -> Objective:
    """Kernel conditional-dependence cost ``tr(Kz_c (Ky_c + n eps I)^{-1})``, Y = M^T X."""
    X = as_data_matrix(X)
    n = X.shape[1]
    H = _centering(n)
    s2 = kp.kernel_bandwidth_x ** 2
    Kz = kp.kz_centered
    reg = n * kp.ridge * np.eye(n)

    def factor(M):
        K = np.exp(-pairwise_sq_dists(M.T @ X) / (2 * s2))
        G = H @ K @ H + reg
        try:
            cho = scipy.linalg.cho_factor(0.5 * (G + G.T))
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("regularized Gram matrix is not positive definite") from exc
        return K, cho

    def value(M):
        _, cho = factor(M)
        return float(np.trace(scipy.linalg.cho_solve(cho, Kz)))

    def grad(M):
        K, cho = factor(M)
        GiKz = scipy.linalg.cho_solve(cho, Kz)
        Omega = H @ scipy.linalg.cho_solve(cho, GiKz.T) @ H
        C = 0.5 * (Omega + Omega.T) * K
        return (2.0 / s2) * X @ (laplacian(C) @ (X.T @ M))

    return Objective("sdr", value, grad, rotation_invariant=True)


# ---------------------------------------------------------------------------
# graph-based objectives


@dataclass(frozen=True)
class NeighborhoodGraph:
    weights: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    bandwidth: float


def neighborhood_graph(X, k: int = 7, tau: float | None = None) -> NeighborhoodGraph:
    """Symmetric kNN graph with squared-exponential weights ``exp(-||xi - xj||^2 / tau)``.

    An edge joins i and j when either is among the other's k nearest
    neighbours. ``tau`` defaults to the mean squared length of the edges.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    if k < 1 or k >= n:
        raise InvalidConfigError(f"need 1 <= k < n, got k={k}, n={n}")
    D2 = pairwise_sq_dists(X)
    order = np.argsort(D2 + np.diag(np.full(n, np.inf)), axis=1, kind="stable")[:, :k]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), order.ravel()] = True
    adj |= adj.T
    np.fill_diagonal(adj, False)
    if tau is None:
        tau = float(D2[np.triu(adj)].mean())
        if not tau > 0:
            tau = 1.0
    elif tau <= 0:
        raise InvalidConfigError("tau must be positive")
    W = np.where(adj, np.exp(-D2 / tau), 0.0)
    W = 0.5 * (W + W.T)
    deg = np.diag(W.sum(axis=1))
    return NeighborhoodGraph(W, deg, deg - W, float(tau))


def lpp_matrices(X, g: NeighborhoodGraph):
    """Whitening ``(X D X^T)^{-1/2}`` and the whitened Laplacian form."""
    X = as_data_matrix(X)
    Wh = sym_inv_sqrt(X @ g.degree @ X.T)
    return Wh, Wh @ X @ g.laplacian @ X.T @ Wh


def lpp_objective(X, g: NeighborhoodGraph) -> Objective:
    """Locality preserving projections as ``tr(M^T S^{-1/2} X L X^T S^{-1/2} M)``, S = X D X^T.

    The data map is ``Y = M^T S^{-1/2} X`` (not an orthogonal projection).
    """
    Wh, A = lpp_matrices(X, g)
    return _quadratic_objective("lpp", A, mapping=lambda M: M.T @ Wh)


def lpp_mapping(X, g: NeighborhoodGraph, M) -> np.ndarray:
    Wh, _ = lpp_matrices(X, g)
    return M.T @ Wh


def npe_objective(X, g: NeighborhoodGraph) -> Objective:
    """Neighborhood preserving embedding: LPP with ``X (I-W)^T (I-W) X^T`` and XX^T whitening."""
    X = as_data_matrix(X)
    Wh = sym_inv_sqrt(X @ X.T)
    R = np.eye(X.shape[1]) - g.weights
    A = Wh @ X @ R.T @ R @ X.T @ Wh
    return _quadratic_objective("npe", A, mapping=lambda M: M.T @ Wh)
