"""Stiefel and Grassmann manifold primitives.

Points are ``d x r`` arrays with orthonormal columns. A product of Stiefel
manifolds (used by the two-view CCA objectives) is represented as a plain
tuple of such arrays; every operation here lifts elementwise over tuples.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import DegenerateStepError, InvalidShapeError

FEASIBILITY_TOL = 1e-10


class ManifoldKind(str, enum.Enum):
    STIEFEL = "stiefel"
    GRASSMANN = "grassmann"
    # unconstrained R^{d x r}; projection is the identity, retraction is addition
    EUCLIDEAN = "euclidean"


# ---------------------------------------------------------------------------
# tuple lifting helpers


def is_tuple(M) -> bool:
    return isinstance(M, (tuple, list))


def frame_map(fn, *frames):
    """Apply ``fn`` to matching elements of one or more frames/frame tuples."""
    if is_tuple(frames[0]):
        return tuple(fn(*parts) for parts in zip(*frames))
    return fn(*frames)


def frame_inner(A, B) -> float:
    """Standard (Frobenius) inner product, summed over tuple elements."""
    if is_tuple(A):
        return float(sum(np.vdot(a, b) for a, b in zip(A, B)))
    return float(np.vdot(A, B))


def frame_norm(A) -> float:
    return float(np.sqrt(frame_inner(A, A)))


def frame_axpy(alpha: float, X, Y):
    """``Y + alpha * X`` elementwise."""
    return frame_map(lambda x, y: y + alpha * x, X, Y)


def frame_shape(M):
    if is_tuple(M):
        return tuple(np.shape(m) for m in M)
    return np.shape(M)


# ---------------------------------------------------------------------------


def _check_frame_shape(M: np.ndarray) -> tuple[int, int]:
    M = np.asarray(M)
    if M.ndim != 2:
        raise InvalidShapeError(f"expected a 2-d array, got shape {M.shape}")
    d, r = M.shape
    if r < 1 or r > d:
        raise InvalidShapeError(f"need 1 <= r <= d, got d={d}, r={r}")
    return d, r


def skew(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W - W.T)


def sym(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W + W.T)


def feasibility_error(M) -> float:
    """Max-abs entry of ``M^T M - I`` (max over tuple elements)."""
    if is_tuple(M):
        return max(feasibility_error(m) for m in M)
    _, r = _check_frame_shape(M)
    return float(np.max(np.abs(M.T @ M - np.eye(r))))


def is_feasible(M, tol: float = FEASIBILITY_TOL) -> bool:
    """True iff ``M^T M = I`` to within ``tol`` in max-abs entry norm."""
    return feasibility_error(M) <= tol


def fix_signs(U: np.ndarray, V: np.ndarray | None = None):
    """Flip column signs so the largest-magnitude entry of each column of U is positive.

    The same flips are applied to the columns of ``V`` when given, so that
    ``U S V^T`` is unchanged.
    """
    U = np.array(U, dtype=float, copy=True)
    if U.size == 0:
        return U if V is None else (U, np.array(V, dtype=float, copy=True))
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U *= signs
    if V is None:
        return U
    V = np.array(V, dtype=float, copy=True)
    V *= signs
    return U, V


def orthogonalize(A: np.ndarray) -> np.ndarray:
    """Orthonormal basis for the columns of ``A`` via QR (column order kept).

    R is normalized to a positive diagonal, so column k of the result has a
    positive inner product with column k of ``A``. This keeps paired frames
    (as in CCA) consistently oriented.
    """
    _check_frame_shape(A)
    Q, R = np.linalg.qr(np.asarray(A, dtype=float))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def project_tangent(M, Z, kind: ManifoldKind | str = ManifoldKind.STIEFEL):
    """Orthogonal projection of an ambient direction onto the tangent space at M.

    Stiefel: ``M skew(M^T Z) + (I - M M^T) Z``. Grassmann (horizontal space):
    ``(I - M M^T) Z``. Euclidean: ``Z`` unchanged.
    """
    kind = ManifoldKind(kind)
    if is_tuple(M):
        return tuple(project_tangent(m, z, kind) for m, z in zip(M, Z))
    M = np.asarray(M, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if M.shape != Z.shape:
        raise InvalidShapeError(f"shape mismatch: M {M.shape} vs Z {Z.shape}")
    if kind is ManifoldKind.EUCLIDEAN:
        return Z.copy()
    _check_frame_shape(M)
    MtZ = M.T @ Z
    normal = Z - M @ MtZ
    if kind is ManifoldKind.GRASSMANN:
        return normal
    return M @ skew(MtZ) + normal


def retract(M, Z):
    """Closest point on the manifold to ``M + Z``: the polar factor ``U V^T``.

    Raises DegenerateStepError when ``M + Z`` is numerically rank deficient.
    """
    if is_tuple(M):
        return tuple(retract(m, z) for m, z in zip(M, Z))
    M = np.asarray(M, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if M.shape != Z.shape:
        raise InvalidShapeError(f"shape mismatch: M {M.shape} vs Z {Z.shape}")
    _check_frame_shape(M)
    U, s, Vt = np.linalg.svd(M + Z, full_matrices=False)
    if not np.all(np.isfinite(s)) or s[-1] < 1e-12 * s[0]:
        raise DegenerateStepError("M + Z is rank deficient; cannot retract")
    return U @ Vt


def retract_closed_form(M: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """``(M + Z)(I + Z^T Z)^{-1/2}``; agrees with :func:`retract` for tangent Z."""
    ZtZ = Z.T @ Z
    w, Q = np.linalg.eigh(np.eye(ZtZ.shape[0]) + ZtZ)
    return (M + Z) @ (Q / np.sqrt(w)) @ Q.T


def random_frame(d: int, r: int, seed=None) -> np.ndarray:
    """QR of a seeded ``d x r`` standard Gaussian matrix (Haar distributed).

    ``seed`` may be an int, None or a ``numpy.random.Generator``.
    """
    if r < 1 or r > d:
        raise InvalidShapeError(f"need 1 <= r <= d, got d={d}, r={r}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d, r))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def random_frame_like(M, seed=None):
    """Random frame (or tuple of frames) with the same shapes as ``M``."""
    rng = np.random.default_rng(seed)
    if is_tuple(M):
        return tuple(random_frame(*np.shape(m), seed=rng) for m in M)
    return random_frame(*np.shape(M), seed=rng)


def random_rotation(r: int, seed=None) -> np.ndarray:
    """Haar-random ``r x r`` orthogonal matrix (reflections included)."""
    return random_frame(r, r, seed)


def rotation_invariance_probe(f, M, trials: int = 10, seed=0) -> bool:
    """Check empirically whether ``f(M R) == f(M)`` for random orthogonal R.

    For a frame tuple every element gets its own independent rotation.
    ``f`` is an :class:`~ldr.solver.Objective` or any callable on frames.
    """
    value = getattr(f, "value", f)
    rng = np.random.default_rng(seed)
    f0 = value(M)
    for _ in range(trials):
        if is_tuple(M):
            MR = tuple(m @ random_rotation(m.shape[1], rng) for m in M)
        else:
            MR = M @ random_rotation(M.shape[1], rng)
        if abs(value(MR) - f0) > 1e-8 * (1 + abs(f0)):
            return False
    return True
