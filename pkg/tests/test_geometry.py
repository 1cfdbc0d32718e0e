import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldr.errors import DegenerateStepError, InvalidShapeError
from ldr.geometry import (
    ManifoldKind,
    fix_signs,
    is_feasible,
    orthogonalize,
    project_tangent,
    random_frame,
    random_rotation,
    retract,
    retract_closed_form,
    rotation_invariance_probe,
    skew,
)
from ldr.objectives import ordered_pca_objective, pca_objective

G, S = ManifoldKind.GRASSMANN, ManifoldKind.STIEFEL

dims = st.integers(1, 8).flatmap(lambda r: st.tuples(st.integers(r, 10), st.just(r)))
seeds = st.integers(0, 2**31 - 1)


def _mtm_err(M):
    return np.max(np.abs(M.T @ M - np.eye(M.shape[1])))


# --- feasibility -----------------------------------------------------------


def test_identity_columns_feasible():
    assert is_feasible(np.eye(3)[:, :2])


def test_scaled_identity_infeasible():
    assert not is_feasible(2 * np.eye(3)[:, :2])


def test_qr_of_gaussian_feasible(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    # oracle: explicit Gram matrix
    assert np.max(np.abs(Q.T @ Q - np.eye(3))) <= 1e-10
    assert is_feasible(Q)


def test_is_feasible_rejects_wide():
    with pytest.raises(InvalidShapeError):
        is_feasible(np.ones((2, 3)))


# --- tangent projection ----------------------------------------------------


def test_projection_scalar_skew_vanishes():
    M = np.array([[1.0], [0.0]])
    Z = np.array([[3.0], [-2.0]])
    np.testing.assert_allclose(project_tangent(M, Z), [[0.0], [-2.0]])


def test_projection_of_base_point_is_zero(rng):
    M = random_frame(6, 2, 1)
    assert np.max(np.abs(project_tangent(M, M))) < 1e-14


def test_projection_shape_mismatch():
    with pytest.raises(InvalidShapeError):
        project_tangent(np.eye(3)[:, :2], np.zeros((3, 1)))


@given(dims, seeds)
def test_projection_tangent_and_idempotent(dr, seed):
    d, r = dr
    rng = np.random.default_rng(seed)
    M = random_frame(d, r, rng)
    Z = rng.standard_normal((d, r))
    T = project_tangent(M, Z)
    assert np.max(np.abs(M.T @ T + T.T @ M)) <= 1e-10 * (1 + np.abs(Z).max())
    np.testing.assert_allclose(project_tangent(M, T), T, atol=1e-10 * (1 + np.abs(Z).max()))


@given(dims, seeds)
def test_tangent_space_set_equivalence(dr, seed):
    # T2 -> T1: X = M A + (I - M M^T) B with skew A satisfies M^T X + X^T M = 0
    d, r = dr
    rng = np.random.default_rng(seed)
    M = random_frame(d, r, rng)
    A = skew(rng.standard_normal((r, r)))
    B = rng.standard_normal((d, r))
    X = M @ A + B - M @ (M.T @ B)
    assert np.max(np.abs(M.T @ X + X.T @ M)) <= 1e-10 * (1 + np.abs(B).max())
    # and the projector fixes such X
    np.testing.assert_allclose(project_tangent(M, X), X, atol=1e-10 * (1 + np.abs(B).max()))


@given(dims, seeds)
def test_grassmann_agrees_when_mt_grad_symmetric(dr, seed):
    d, r = dr
    rng = np.random.default_rng(seed)
    M = random_frame(d, r, rng)
    C = rng.standard_normal((d, d))
    C = C + C.T
    Z = C @ M  # gradient of a rotation-invariant quadratic: M^T Z symmetric
    np.testing.assert_allclose(project_tangent(M, Z, G), project_tangent(M, Z, S),
                               atol=1e-10 * (1 + np.abs(Z).max()))


def test_grassmann_is_normal_component(rng):
    M = random_frame(5, 2, 3)
    Z = rng.standard_normal((5, 2))
    P = project_tangent(M, Z, G)
    assert np.max(np.abs(M.T @ P)) < 1e-12


# --- retraction ------------------------------------------------------------


def test_retract_zero_step_is_identity():
    M = random_frame(7, 3, 2)
    np.testing.assert_allclose(retract(M, np.zeros_like(M)), M, atol=1e-12)


@given(dims, seeds, st.floats(0.01, 3.0))
def test_retract_feasible_and_matches_closed_form(dr, seed, scale):
    d, r = dr
    rng = np.random.default_rng(seed)
    M = random_frame(d, r, rng)
    Z = project_tangent(M, scale * rng.standard_normal((d, r)))
    R1 = retract(M, Z)
    assert _mtm_err(R1) <= 1e-10
    np.testing.assert_allclose(retract_closed_form(M, Z), R1, atol=1e-8)


def test_retract_is_closest_feasible_point():
    # random-competitor oracle: the polar factor beats 20 random frames in distance to M + Z
    rng = np.random.default_rng(8)
    M = random_frame(8, 3, rng)
    Z = 0.1 * rng.standard_normal((8, 3))
    R = retract(M, Z)
    assert _mtm_err(R) <= 1e-10
    best = np.linalg.norm(R - (M + Z))
    for k in range(20):
        assert best <= np.linalg.norm(random_frame(8, 3, 100 + k) - (M + Z))


def test_retract_rank_deficient_raises():
    M = np.eye(3)[:, :2]
    Z = np.zeros((3, 2))
    Z[:, 1] = -M[:, 1]
    with pytest.raises(DegenerateStepError):
        retract(M, Z)


def test_retract_lifts_over_tuples():
    Ma, Mb = random_frame(4, 2, 0), random_frame(5, 2, 1)
    out = retract((Ma, Mb), (np.zeros((4, 2)), np.zeros((5, 2))))
    assert isinstance(out, tuple)
    np.testing.assert_allclose(out[0], Ma, atol=1e-12)
    np.testing.assert_allclose(out[1], Mb, atol=1e-12)


# --- constructive curve through a tangent vector --------------------------


@given(dims, seeds)
def test_curve_stays_feasible_and_has_velocity_x(dr, seed):
    d, r = dr
    rng = np.random.default_rng(seed)
    M = random_frame(d, r, rng)
    X = project_tangent(M, rng.standard_normal((d, r)))

    def gamma(t):
        w, Q = np.linalg.eigh(np.eye(r) + t * t * X.T @ X)
        return (M + t * X) @ (Q / np.sqrt(w)) @ Q.T

    for t in (0.01, 0.1):
        assert _mtm_err(gamma(t)) <= 1e-9
    h = 1e-4
    vel = (gamma(h) - gamma(-h)) / (2 * h)
    assert np.linalg.norm(vel - X) <= 1e-5 * max(np.linalg.norm(X), 1e-300) + 1e-12


# --- random frames and sign conventions ------------------------------------


def test_random_frame_1x1_is_unit():
    assert abs(abs(random_frame(1, 1, 5)[0, 0]) - 1) < 1e-15


def test_random_frame_deterministic():
    np.testing.assert_array_equal(random_frame(5, 2, 7), random_frame(5, 2, 7))


def test_random_frame_feasible_large():
    assert is_feasible(random_frame(100, 10, 1))


def test_random_frame_rejects_r_gt_d():
    with pytest.raises(InvalidShapeError):
        random_frame(2, 3, 0)


def test_fix_signs_largest_entry_positive(rng):
    U = rng.standard_normal((6, 3))
    V = rng.standard_normal((4, 3))
    U2, V2 = fix_signs(U, V)
    idx = np.argmax(np.abs(U2), axis=0)
    assert np.all(U2[idx, range(3)] > 0)
    # U S V^T is unchanged
    np.testing.assert_allclose(U2 @ V2.T, U @ V.T)


def test_orthogonalize_keeps_orientation(rng):
    A = rng.standard_normal((6, 3))
    Q = orthogonalize(A)
    assert is_feasible(Q)
    assert np.all(np.sum(Q * A, axis=0) > 0)
    assert abs(Q[:, 0] @ A[:, 0] - np.linalg.norm(A[:, 0])) < 1e-12


def test_random_rotation_orthogonal():
    R = random_rotation(4, 3)
    np.testing.assert_allclose(R.T @ R, np.eye(4), atol=1e-12)


# --- rotation invariance probe ---------------------------------------------


def test_probe_pca_invariant(rng):
    X = rng.standard_normal((5, 40))
    assert rotation_invariance_probe(pca_objective(X), random_frame(5, 3, 0))


def test_probe_ordered_pca_not_invariant(rng):
    X = rng.standard_normal((5, 40))
    f = ordered_pca_objective(X, [3.0, 2.0, 1.0])
    assert not rotation_invariance_probe(f, random_frame(5, 3, 0))


def test_probe_r1_sign_flip(rng):
    X = rng.standard_normal((4, 30))
    f = pca_objective(X)
    M = random_frame(4, 1, 0)
    assert rotation_invariance_probe(f, M)
    assert abs(f(-M) - f(M)) <= 1e-12 * (1 + abs(f(M)))
