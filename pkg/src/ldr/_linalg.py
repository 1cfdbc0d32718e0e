import numpy as np
from scipy.spatial.distance import cdist

from .errors import IllPosedError, InvalidInputError

FLOOR_RATIO = 1e-10


def _check_symmetric(C, tol=1e-8):
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {C.shape}")
    scale = max(1.0, float(np.max(np.abs(C)))) if C.size else 1.0
    if np.max(np.abs(C - C.T), initial=0.0) > tol * scale:
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (C + C.T)


def floored_eigh(C, floor_ratio=FLOOR_RATIO):
    """Eigendecomposition of a symmetric PSD matrix with small eigenvalues raised.

    Eigenvalues below ``floor_ratio * lambda_max`` are set to that floor.
    """
    C = _check_symmetric(C)
    w, Q = np.linalg.eigh(C)
    top = w[-1] if w.size else 0.0
    if not top > 0:
        raise IllPosedError("matrix has no positive eigenvalue")
    w = np.maximum(w, floor_ratio * top)
    return w, Q


def sym_inv_sqrt(C, floor_ratio=FLOOR_RATIO):
    w, Q = floored_eigh(C, floor_ratio)
    return (Q / np.sqrt(w)) @ Q.T


def sym_sqrt(C, floor_ratio=FLOOR_RATIO):
    w, Q = floored_eigh(C, floor_ratio)
    return (Q * np.sqrt(w)) @ Q.T


def laplacian(A):
    """``diag(A 1) - A`` for a symmetric weight matrix A."""
    return np.diag(A.sum(axis=1)) - A


def pairwise_sq_dists(Y):
    """Squared Euclidean distances between the columns of ``Y``."""
    # direct differences: the Gram-matrix shortcut loses accuracy for close points
    Y = np.atleast_2d(Y)
    return cdist(Y.T, Y.T, "sqeuclidean")
