"""Methods optimized over unconstrained matrices ``M in R^{d x r}``.

Gaussian latent models (probabilistic PCA and factor analysis), linear
regression viewed as a rank-r projection, and large margin nearest neighbour
metric learning.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import laplacian, pairwise_sq_dists
from .baselines import ppca_closed_form
from .data import as_data_matrix
from .errors import IllPosedError, InvalidConfigError, InvalidInputError, InvalidShapeError, NumericalFailure
from .geometry import ManifoldKind, fix_signs
from .solver import Objective


def _gaussian_nll(C, S):
    """``log|S| + tr(S^{-1} C)`` and its Cholesky-based pieces."""
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("model covariance is not positive definite") from exc
    logdet = 2 * np.sum(np.log(np.diag(L)))
    Sinv = np.linalg.inv(S)
    return float(logdet + np.sum(Sinv * C)), Sinv


def latent_nll(X, M, noise) -> float:
    """Per-sample Gaussian negative log likelihood (up to constants).

    ``log|M M^T + N| + tr((M M^T + N)^{-1} X X^T / n)`` with ``N = noise * I``
    for scalar ``noise`` or ``diag(noise)`` for a vector.
    """
    X = as_data_matrix(X)
    C = X @ X.T / X.shape[1]
    noise = np.asarray(noise, dtype=float)
    N = noise * np.eye(X.shape[0]) if noise.ndim == 0 else np.diag(noise)
    return _gaussian_nll(C, M @ M.T + N)[0]


def _latent_objective(name, X, N, mapping_noise):
    X = as_data_matrix(X)
    C = X @ X.T / X.shape[1]

    def value(M):
        return _gaussian_nll(C, M @ M.T + N)[0]

    def grad(M):
        _, Sinv = _gaussian_nll(C, M @ M.T + N)
        SiM = Sinv @ M
        return 2 * SiM - 2 * Sinv @ (C @ SiM)

    def mapping(M):
        return np.linalg.solve(M @ M.T + mapping_noise, M).T

    return Objective(name, value, grad, rotation_invariant=True,
                     manifold=ManifoldKind.EUCLIDEAN, mapping=mapping)


def ppca_nll(X, sigma2: float) -> Objective:
    """PPCA negative log likelihood in the loading M for a fixed noise variance.

    The data map is the posterior mean ``Y = M^T (M M^T + sigma2 I)^{-1} X``.
    """
    if not sigma2 > 0:
        raise InvalidConfigError("sigma2 must be positive")
    d = as_data_matrix(X).shape[0]
    N = sigma2 * np.eye(d)
    return _latent_objective("ppca", X, N, N)


def fa_nll(X, noise) -> Objective:
    """Factor-analysis negative log likelihood in M for fixed diagonal noise."""
    noise = np.asarray(noise, dtype=float)
    if np.any(noise <= 0):
        raise InvalidConfigError("noise variances must be positive")
    N = np.diag(noise)
    return _latent_objective("fa", X, N, N)


@dataclass
class GaussianLatentModel:
    """Loading matrix plus isotropic (scalar) or diagonal (vector) noise."""

    loading: np.ndarray
    noise: np.ndarray | float
    nll_trace: list = field(default_factory=list)
    heywood: np.ndarray | None = None
    converged: bool = False

    @property
    def noise_cov(self) -> np.ndarray:
        noise = np.asarray(self.noise, dtype=float)
        d = self.loading.shape[0]
        return noise * np.eye(d) if noise.ndim == 0 else np.diag(noise)

    def mapping(self) -> np.ndarray:
        M = self.loading
        return np.linalg.solve(M @ M.T + self.noise_cov, M).T

    def transform(self, X) -> np.ndarray:
        return self.mapping() @ as_data_matrix(X)


def fa_fit(X, r: int, max_em_iters: int = 1000, tol: float = 1e-9) -> GaussianLatentModel:
    """Fit a factor analysis model by expectation maximization.

    Starts from the PPCA closed form. Each M-step is the closed-form update
    of the expected complete-data likelihood, so the NLL is nonincreasing.
    Noise variances are floored at ``1e-10`` times the mean data variance;
    floored coordinates are flagged in ``heywood``. Stops when the relative
    NLL change drops below ``tol`` (``tol=0`` runs all iterations).
    """
    X = as_data_matrix(X)
    d, n = X.shape
    if not 1 <= r < d:
        raise InvalidShapeError(f"need 1 <= r < d, got r={r}, d={d}")
    C = X @ X.T / n
    floor = 1e-10 * float(np.mean(np.diag(C)))
    M, sigma2 = ppca_closed_form(X, r)
    psi = np.maximum(np.diag(C - M @ M.T), floor)
    heywood = np.zeros(d, dtype=bool)
    trace = [latent_nll(X, M, psi)]
    converged = False
    I_r = np.eye(r)
    for _ in range(max_em_iters):
        # E-step: posterior y | x has mean B x and covariance I - B M
        B = np.linalg.solve(M @ M.T + np.diag(psi), M).T
        Eyy = I_r - B @ M + B @ C @ B.T
        # M-step
        M = np.linalg.solve(Eyy.T, (C @ B.T).T).T
        psi_raw = np.diag(C) - np.sum(M * (C @ B.T), axis=1)
        heywood = psi_raw < floor
        psi = np.maximum(psi_raw, floor)
        trace.append(latent_nll(X, M, psi))
        if abs(trace[-2] - trace[-1]) <= tol * (1 + abs(trace[-1])):
            converged = True
            break
    return GaussianLatentModel(M, psi, trace, heywood, converged)


# ---------------------------------------------------------------------------
# linear regression


@dataclass(frozen=True)
class RegressionSplit:
    inputs: np.ndarray
    outputs: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        Xin, Xout = as_data_matrix(self.inputs), as_data_matrix(self.outputs)
        if Xin.shape[1] != Xout.shape[1]:
            raise InvalidShapeError("inputs and outputs need the same number of samples")
        if self.ridge < 0:
            raise InvalidConfigError("ridge must be nonnegative")
        object.__setattr__(self, "inputs", Xin)
        object.__setattr__(self, "outputs", Xout)

    @classmethod
    def from_data(cls, X, r: int, ridge: float = 0.0) -> "RegressionSplit":
        """First r rows are inputs, the remaining d - r rows outputs."""
        X = as_data_matrix(X)
        if not 1 <= r < X.shape[0]:
            raise InvalidShapeError(f"need 1 <= r < d, got r={r}")
        return cls(X[:r], X[r:], ridge)


def linreg_objective(split: RegressionSplit) -> Objective:
    """``||X_out - M X_in||_F^2 + ridge ||M||_F^2`` over ``M in R^{(d-r) x r}``."""
    Xin, Xout, lam = split.inputs, split.outputs, split.ridge

    def value(M):
        R = Xout - M @ Xin
        return float(np.sum(R * R) + lam * np.sum(M * M))

    def grad(M):
        return -2 * (Xout - M @ Xin) @ Xin.T + 2 * lam * M

    return Objective("linreg", value, grad, rotation_invariant=False, manifold=ManifoldKind.EUCLIDEAN)


def linreg_fit(split: RegressionSplit) -> np.ndarray:
    """Least squares / ridge solution ``X_out X_in^T (X_in X_in^T + ridge I)^{-1}``."""
    Xin, Xout = split.inputs, split.outputs
    G = Xin @ Xin.T + split.ridge * np.eye(Xin.shape[0])
    w = np.linalg.eigvalsh(G)
    if not w[0] > 1e-12 * max(w[-1], np.finfo(float).tiny):
        raise IllPosedError("normal equations are singular; use a positive ridge")
    return np.linalg.solve(G, Xin @ Xout.T).T


def linreg_embedding(M) -> np.ndarray:
    """Rank-r map ``P = [S V^T, 0]`` from the compact SVD ``[I; M] = U S V^T``.

    ``P X = S V^T X_in`` and the regressed data are ``[I; M] X_in = U (P X)``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    q, r = M.shape
    U, s, Vt = np.linalg.svd(np.vstack([np.eye(r), M]), full_matrices=False)
    U, V = fix_signs(U, Vt.T)
    P = np.zeros((r, r + q))
    P[:, :r] = s[:, None] * V.T
    return P


def linreg_basis(M) -> np.ndarray:
    """Left singular vectors U of ``[I; M]``, matching :func:`linreg_embedding`."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    r = M.shape[1]
    U, _, Vt = np.linalg.svd(np.vstack([np.eye(r), M]), full_matrices=False)
    return fix_signs(U, Vt.T)[0]


# ---------------------------------------------------------------------------
# LMNN


@dataclass(frozen=True)
class NeighborSets:
    targets: list
    labels: np.ndarray
    weight: float = 1.0


def target_neighbors(X, labels, k: int = 3, weight: float = 1.0) -> NeighborSets:
    """For each sample, its ``min(k, class size - 1)`` nearest same-class samples."""
    X = as_data_matrix(X)
    labels = np.asarray(labels)
    if labels.shape != (X.shape[1],):
        raise InvalidShapeError("need exactly one label per sample")
    if k < 1:
        raise InvalidConfigError("k must be >= 1")
    D2 = pairwise_sq_dists(X)
    targets = []
    for i in range(X.shape[1]):
        same = np.flatnonzero((labels == labels[i]) & (np.arange(len(labels)) != i))
        order = np.argsort(D2[i, same], kind="stable")
        targets.append(same[order[:k]])
    return NeighborSets(targets, labels, float(weight))


def lmnn_objective(X, ns: NeighborSets) -> Objective:
    """Large margin nearest neighbour loss over ``M in R^{d x r}``.

    ``sum_i sum_{j in eta(i)} d_ij^2 + weight * sum_{l: z_l != z_i} [1 + d_ij^2 - d_il^2]_+``
    with ``d_ij = ||M^T (x_i - x_j)||``. The gradient is a subgradient that
    treats hinges exactly at zero as inactive. Data map ``Y = M^T X``.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    if len(ns.targets) != n:
        raise InvalidInputError("neighbor sets do not match the data")
    rows = np.concatenate([np.full(len(t), i) for i, t in enumerate(ns.targets)]).astype(int)
    cols = np.concatenate([np.asarray(t, dtype=int) for t in ns.targets]).astype(int)
    impostor = ns.labels[rows][:, None] != ns.labels[None, :]  # (pairs, n)
    lam = ns.weight

    def hinge(D2):
        return np.where(impostor, 1 + D2[rows, cols][:, None] - D2[rows], 0.0)

    def value(M):
        D2 = pairwise_sq_dists(M.T @ X)
        h = hinge(D2)
        return float(D2[rows, cols].sum() + lam * np.sum(np.maximum(h, 0.0)))

    def grad(M):
        D2 = pairwise_sq_dists(M.T @ X)
        active = (hinge(D2) > 0) & impostor
        coef = np.zeros((n, n))
        np.add.at(coef, (rows, cols), 1 + lam * active.sum(axis=1))
        pair_idx, ell = np.nonzero(active)
        np.add.at(coef, (rows[pair_idx], ell), -lam)
        S = coef + coef.T
        return 2 * X @ (laplacian(S) @ (X.T @ M))

    return Objective("lmnn", value, grad, rotation_invariant=True, manifold=ManifoldKind.EUCLIDEAN)


def lmnn_margins(X, ns: NeighborSets, M) -> np.ndarray:
    """Hinge arguments ``1 + d_ij^2 - d_il^2`` over all (target, impostor) triples."""
    X = as_data_matrix(X)
    D2 = pairwise_sq_dists(np.asarray(M).T @ X)
    out = []
    for i, targets in enumerate(ns.targets):
        imp = np.flatnonzero(ns.labels != ns.labels[i])
        for j in targets:
            out.append(1 + D2[i, j] - D2[i, imp])
    return np.concatenate(out) if out else np.zeros(0)
