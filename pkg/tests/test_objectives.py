import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import exact_cov_data
from ldr.baselines import lpp_generalized_eig, pca_svd
from ldr.data import LabeledData, center, is_centered
from ldr.errors import (
    DegenerateDataError,
    IllPosedError,
    InvalidConfigError,
    InvalidInputError,
    InvalidShapeError,
)
from ldr.experiments import gen_cca_pair, gen_gaussian_clusters, gen_spline_timeseries
from ldr.geometry import random_frame, rotation_invariance_probe
from ldr.objectives import (
    LaggedCovariances,
    ScatterPair,
    cca_orthogonal_objective,
    kernel_pair,
    lagged_covariances,
    lda_objective,
    lpp_objective,
    maf_crosscov_objective,
    maf_objective,
    maf_sqdist_objective,
    mds_scatter_objective,
    mds_stress_objective,
    neighborhood_graph,
    npe_objective,
    ordered_pca_objective,
    pca_objective,
    scatter_matrices,
    sdr_objective,
    sfa_objective,
    time_derivative,
)
from ldr.solver import gradient_check, minimize

TIGHT = {"f_rel_tol": 0.0, "grad_tol": 1e-10, "max_iters": 20000}


def _gauss(d, n, seed):
    rng = np.random.default_rng(seed)
    return center(rng.standard_normal((d, d)) @ rng.standard_normal((d, n)))


def _all_objectives():
    """(name, objective, frame factory) for every orthogonal objective."""
    X = _gauss(6, 60, 0)
    labeled = gen_gaussian_clusters(6, 20, 3, 2.0, 2.0, seed=1)
    spline = gen_spline_timeseries(6, 80, 0.1, seed=2)
    Xa, Xb = gen_cca_pair(6, 60, 0.1, seed=3)
    g = neighborhood_graph(X)
    M0 = random_frame(6, 2, 9)
    kp = kernel_pair(X[:, :40], np.sin(X[:1, :40]), M0)
    lc = lagged_covariances(spline)
    return [
        ("pca", pca_objective(X), 6),
        ("ordered_pca", ordered_pca_objective(X, [2.0, 1.0]), 6),
        ("mds_scatter", mds_scatter_objective(X), 6),
        ("mds_stress", mds_stress_objective(X[:, :30]), 6),
        ("lda", lda_objective(scatter_matrices(labeled)), 6),
        ("maf", maf_objective(lc), 6),
        ("maf_crosscov", maf_crosscov_objective(lc), 6),
        ("maf_sqdist", maf_sqdist_objective(lc), 6),
        ("sfa", sfa_objective(time_derivative(spline)), 6),
        ("sdr", sdr_objective(X[:, :40], kp), 6),
        ("lpp", lpp_objective(X, g), 6),
        ("npe", npe_objective(X, g), 6),
        ("cca_orth", cca_orthogonal_objective(Xa, Xb), (6, 6)),
    ]


OBJECTIVES = _all_objectives()


def _frame(shape, seed):
    if isinstance(shape, tuple):
        return tuple(random_frame(d, 2, seed * 7 + k) for k, d in enumerate(shape))
    return random_frame(shape, 2, seed)


@pytest.mark.parametrize("name,f,shape", OBJECTIVES, ids=[o[0] for o in OBJECTIVES])
def test_gradient_matches_finite_differences(name, f, shape):
    for seed in range(5):
        assert gradient_check(f, _frame(shape, seed)) < 1e-5


EXPECTED_INVARIANT = {"ordered_pca": False, "cca_orth": False}


@pytest.mark.parametrize("name,f,shape", OBJECTIVES, ids=[o[0] for o in OBJECTIVES])
def test_rotation_flag_matches_probe(name, f, shape):
    assert f.rotation_invariant == EXPECTED_INVARIANT.get(name, True)
    assert rotation_invariance_probe(f, _frame(shape, 1), trials=10, seed=3) == f.rotation_invariant


# --- PCA ---------------------------------------------------------------------


def test_pca_diag_covariance_r1():
    n = 50
    X = exact_cov_data([3.0, 1.0, 0.1], n)
    f = pca_objective(X)
    e1 = np.array([[1.0], [0.0], [0.0]])
    # residual variance (1 + 0.1) per sample
    assert f(e1) == pytest.approx(n * 1.1, rel=1e-12)
    rep = minimize(f, random_frame(3, 1, 4), **TIGHT)
    assert abs(abs(rep.final_frame[0, 0]) - 1) < 1e-6
    assert rep.f_final == pytest.approx(n * 1.1, rel=1e-10)


def test_pca_zero_data():
    f = pca_objective(np.zeros((4, 10)))
    M = random_frame(4, 2, 0)
    assert f(M) == 0.0
    assert np.all(f.grad(M) == 0)


def test_pca_manifold_matches_svd_on_seeded_data():
    for seed in range(3):
        X = _gauss(10, 200, seed)
        f = pca_objective(X)
        f_svd = f(pca_svd(X, 3).frame)
        rep = minimize(f, random_frame(10, 3, seed))
        assert abs(rep.f_final - f_svd) <= 1e-8 * abs(f_svd)


def test_pca_grad_equals_projected_form_on_manifold(rng):
    X = _gauss(5, 30, 1)
    M = random_frame(5, 2, 1)
    C = X @ X.T
    np.testing.assert_allclose(pca_objective(X).grad(M), -2 * (np.eye(5) - M @ M.T) @ C @ M, atol=1e-9)


def test_ordered_pca_diag_case():
    X = exact_cov_data([3.0, 1.0, 0.1], 40, seed=2)
    f = ordered_pca_objective(X, np.diag([2.0, 1.0]))
    rep = minimize(f, random_frame(3, 2, 1), **TIGHT)
    M = rep.final_frame
    assert abs(abs(M[0, 0]) - 1) < 1e-6 and abs(abs(M[1, 1]) - 1) < 1e-6


def test_ordered_pca_rejects_unordered():
    X = _gauss(3, 10, 0)
    for A in (np.eye(2), [1.0, 2.0], [1.0, -1.0], [[2.0, 1.0], [0.0, 1.0]]):
        with pytest.raises(InvalidConfigError):
            ordered_pca_objective(X, A)


def test_ordered_pca_recovers_eigenvector_order():
    X = _gauss(6, 100, 5)
    f = ordered_pca_objective(X, [3.0, 2.0, 1.0])
    rep = minimize(f, random_frame(6, 3, 2), **TIGHT)
    U = pca_svd(X, 3).frame
    cos = np.abs(np.sum(rep.final_frame * U, axis=0))
    assert np.all(cos > 1 - 1e-6)


def test_mds_scatter_is_pca_variance():
    X = _gauss(5, 30, 4)
    M = random_frame(5, 2, 0)
    Y = M.T @ X
    brute = sum(np.sum((Y[:, i] - Y[:, j]) ** 2) for i in range(30) for j in range(30))
    assert mds_scatter_objective(X)(M) == pytest.approx(-brute, rel=1e-12)


# --- MDS stress ----------------------------------------------------------------


def test_stress_zero_for_full_rank_identity():
    X = _gauss(3, 12, 1)
    assert mds_stress_objective(X)(np.eye(3)) == pytest.approx(0.0, abs=1e-18)


def test_stress_two_points():
    X = np.array([[0.0, 1.0], [0.0, 0.0]])
    D = np.array([[0.0, 1.0], [1.0, 0.0]])
    f = mds_stress_objective(X, D)
    assert f(np.array([[1.0], [0.0]])) == pytest.approx(0.0, abs=1e-15)
    assert f(np.array([[0.0], [1.0]])) == pytest.approx(2.0)


def test_stress_rejects_asymmetric():
    with pytest.raises(InvalidInputError):
        mds_stress_objective(np.zeros((2, 2)), np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_stress_gradient_seeded():
    X = _gauss(5, 30, 7)
    f = mds_stress_objective(X)
    assert gradient_check(f, random_frame(5, 2, 1)) < 1e-5


def test_stress_zero_distance_pairs_contribute_no_gradient():
    X = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    f = mds_stress_objective(X)
    M = np.array([[1.0], [0.0]])  # points 0 and 1 coincide after projection
    assert np.all(np.isfinite(f.grad(M)))


# --- LDA -----------------------------------------------------------------------


def test_scatter_identity_on_cluster_data():
    data = gen_gaussian_clusters(3, 1000, 3, 2.5, 5.0, seed=0)
    sp = scatter_matrices(data)
    C = data.X @ data.X.T
    assert np.linalg.norm(sp.within + sp.between - C) <= 1e-8 * np.linalg.norm(C)
    assert np.max(np.abs(sp.within - sp.within.T)) <= 1e-10 * np.abs(sp.within).max()


def test_scatter_each_point_own_class():
    X = _gauss(3, 6, 0)
    sp = scatter_matrices(X, np.arange(6))
    assert np.max(np.abs(sp.within)) < 1e-12
    np.testing.assert_allclose(sp.between, X @ X.T, atol=1e-12)


def test_scatter_one_class():
    X = _gauss(3, 6, 0)
    sp = scatter_matrices(X, np.zeros(6))
    assert np.max(np.abs(sp.between)) < 1e-20
    np.testing.assert_allclose(sp.within, X @ X.T, atol=1e-12)


def test_scatter_empty_class():
    with pytest.raises(InvalidInputError):
        scatter_matrices(_gauss(2, 4, 0), np.array([0, 0, 1, 1]), classes=[0, 1, 2])


def test_lda_scale_free_identity():
    f = lda_objective(ScatterPair(np.eye(4), np.eye(4)))
    for s in range(5):
        assert f(random_frame(4, 2, s)) == pytest.approx(-1.0, rel=1e-14)


def test_lda_zero_within_is_ill_posed():
    with pytest.raises(IllPosedError):
        lda_objective(ScatterPair(np.zeros((2, 2)), np.eye(2)))


def test_quotients_invariant_to_data_scale():
    data = gen_gaussian_clusters(4, 30, 3, 2.0, 2.0, seed=5)
    M = random_frame(4, 2, 0)
    f1 = lda_objective(scatter_matrices(data))(M)
    f3 = lda_objective(scatter_matrices(3 * data.X, data.labels))(M)
    assert f3 == pytest.approx(f1, rel=1e-10)
    S = gen_spline_timeseries(4, 50, 0.1, seed=1)
    assert maf_objective(lagged_covariances(3 * S))(M) == pytest.approx(maf_objective(lagged_covariances(S))(M),
                                                                          rel=1e-10)


def test_quadratic_objectives_scale_by_nine():
    X = _gauss(4, 30, 2)
    M = random_frame(4, 2, 1)
    assert pca_objective(3 * X)(M) == pytest.approx(9 * pca_objective(X)(M), rel=1e-12)
    Xd = time_derivative(X)
    assert sfa_objective(3 * Xd)(M) == pytest.approx(9 * sfa_objective(Xd)(M), rel=1e-12)


# --- CCA -----------------------------------------------------------------------


def test_cca_orth_identical_views():
    X = _gauss(4, 30, 0)
    f = cca_orthogonal_objective(X, X)
    M = random_frame(4, 2, 1)
    assert f((M, M)) == pytest.approx(-1.0, rel=1e-14)


def test_cca_orth_negated_views():
    X = _gauss(4, 30, 0)
    M = random_frame(4, 2, 1)
    assert cca_orthogonal_objective(X, -X)((M, M)) == pytest.approx(1.0, rel=1e-14)


def test_cca_orth_zero_view():
    with pytest.raises(DegenerateDataError):
        cca_orthogonal_objective(np.zeros((3, 10)), _gauss(3, 10, 1))


def test_cca_orth_not_rotation_invariant():
    Xa, Xb = gen_cca_pair(6, 80, 0.1, seed=2)
    f = cca_orthogonal_objective(Xa, Xb)
    assert not f.rotation_invariant
    assert not rotation_invariance_probe(f, (random_frame(6, 2, 0), random_frame(6, 2, 1)))


# --- MAF, SFA ------------------------------------------------------------------


def test_lagged_covariance_of_zero_data():
    lc = lagged_covariances(center(np.ones((3, 10))))
    assert np.all(lc.sigma == 0) and np.all(lc.sigma_delta == 0)


def test_lagged_covariance_periodic_signal():
    # delta-periodic: x_{t+delta} = x_t, so the lagged form is the paired covariance
    base = np.random.default_rng(0).standard_normal((2, 3))
    X = np.tile(base, 6)
    lc = lagged_covariances(X, 3)
    P = X[:, 3:]
    np.testing.assert_allclose(lc.sigma_delta, P @ P.T / P.shape[1], atol=1e-14)


def test_lagged_covariance_symmetric_on_splines():
    lc = lagged_covariances(gen_spline_timeseries(5, 200, 0.1, seed=3))
    assert np.max(np.abs(lc.sigma_delta - lc.sigma_delta.T)) <= 1e-12


def test_lagged_covariance_bad_delta():
    with pytest.raises(InvalidConfigError):
        lagged_covariances(_gauss(2, 5, 0), 5)


def test_maf_constant_ratio_cases():
    S = np.diag([2.0, 1.0, 0.5])
    M = random_frame(3, 2, 0)
    assert maf_objective(LaggedCovariances(S, S, 1))(M) == pytest.approx(-1.0)
    assert maf_objective(LaggedCovariances(S, np.zeros((3, 3)), 1))(M) == 0.0


def test_sfa_constant_signal():
    f = sfa_objective(time_derivative(np.ones((3, 10))))
    assert f(random_frame(3, 1, 0)) == 0.0


def test_sfa_picks_slowest_axis():
    Xd = exact_cov_data([0.1, 3.0], 40)
    rep = minimize(sfa_objective(Xd), random_frame(2, 1, 3), **TIGHT)
    assert abs(abs(rep.final_frame[0, 0]) - 1) < 1e-6


def test_sfa_matches_bottom_eigenvectors():
    Xd = time_derivative(gen_spline_timeseries(6, 200, 0.1, seed=4))
    f = sfa_objective(Xd)
    w = np.linalg.eigvalsh(Xd @ Xd.T)
    rep = minimize(f, random_frame(6, 2, 0), **TIGHT)
    assert rep.f_final == pytest.approx(w[:2].sum(), rel=1e-8)


def test_time_derivative_needs_two_samples():
    with pytest.raises(InvalidInputError):
        time_derivative(np.ones((2, 1)))


# --- SDR -----------------------------------------------------------------------


def test_sdr_independent_responses_zero():
    X = _gauss(3, 20, 0)
    M = random_frame(3, 1, 0)
    kp = kernel_pair(X, np.ones((1, 20)), M)  # constant responses: centered Gram is 0
    f = sdr_objective(X, kp)
    assert abs(f(M)) < 1e-12
    assert abs(f(random_frame(3, 1, 5))) < 1e-12


def test_sdr_two_sample_hand_computation():
    X = np.array([[-1.0, 1.0], [0.5, -0.5]])
    Z = np.array([[-2.0, 2.0]])
    M = np.array([[1.0], [0.0]])
    kp = kernel_pair(X, Z, M, ridge=0.1)
    # median distances: |2| for the projection, |4| for Z
    s_x, s_z = 2.0, 4.0
    kz = np.exp(-16 / (2 * s_z ** 2))
    H = np.eye(2) - 0.5
    Kz = H @ np.array([[1, kz], [kz, 1]]) @ H  # = (1 - kz)/2 [[1,-1],[-1,1]]
    ky = np.exp(-4 / (2 * s_x ** 2))
    Ky = H @ np.array([[1, ky], [ky, 1]]) @ H
    # both centered Grams are multiples of v v^T with v = (1, -1)/sqrt(2):
    # a = (1 - kz), b = (1 - ky); value = a / (b + 2 eps)
    a, b, reg = 1 - kz, 1 - ky, 2 * 0.1
    assert np.allclose(Kz, a / 2 * np.array([[1, -1], [-1, 1]]))
    assert np.allclose(Ky, b / 2 * np.array([[1, -1], [-1, 1]]))
    assert sdr_objective(X, kp)(M) == pytest.approx(a / (b + reg), rel=1e-12)


def test_sdr_optimized_beats_random_subspace():
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = center(rng.standard_normal((6, 60)))
        B = random_frame(6, 2, rng)
        P = B.T @ X
        Z = np.sin(P[:1]) + P[1:] ** 2
        M0 = random_frame(6, 2, rng)
        f = sdr_objective(X, kernel_pair(X, Z, M0))
        rep = minimize(f, M0, max_iters=300)
        wins += rep.f_final <= f(random_frame(6, 2, rng))
    assert wins >= 19


# --- graph methods ------------------------------------------------------------


def test_graph_two_points():
    X = np.array([[0.0, 1.0], [0.0, 1.0]])
    g = neighborhood_graph(X, k=1, tau=0.5)
    w = np.exp(-2.0 / 0.5)
    np.testing.assert_allclose(g.weights, [[0, w], [w, 0]])
    np.testing.assert_allclose(g.laplacian.sum(axis=1), 0, atol=1e-15)


def test_graph_duplicate_points_weight_one():
    X = np.array([[0.0, 0.0, 5.0, 5.0]])
    g = neighborhood_graph(X, k=1, tau=1.0)
    assert g.weights[0, 1] == 1.0 and g.weights[2, 3] == 1.0


def test_graph_invariants_seeded_cloud():
    X = _gauss(3, 50, 1)
    g = neighborhood_graph(X)
    W = g.weights
    assert np.all(W == W.T) and np.all(np.diag(W) == 0) and np.all(W >= 0)
    assert np.max(np.abs(g.laplacian @ np.ones(50))) <= 1e-9
    assert np.linalg.eigvalsh(g.laplacian).min() >= -1e-9
    np.testing.assert_allclose(np.diag(g.degree), W.sum(axis=1))


def test_graph_k_too_large():
    with pytest.raises(InvalidConfigError):
        neighborhood_graph(_gauss(2, 5, 0), k=5)


def test_lpp_full_rank_constant():
    X = _gauss(4, 30, 3)
    f = lpp_objective(X, neighborhood_graph(X))
    vals = [f(random_frame(4, 4, s)) for s in range(5)]
    assert np.ptp(vals) <= 1e-10 * abs(vals[0])


def test_lpp_duplicate_pair_toy():
    # two near-duplicate pairs; with k=1 the graph has two components
    X = center(np.array([[0.0, 0.1, 1.0, 1.1], [1.0, 1.1, 0.0, 0.0]]))
    g = neighborhood_graph(X, k=1)
    assert g.weights[0, 2] == 0 and g.weights[0, 1] > 0
    sol = lpp_generalized_eig(X, g, 1)
    f = lpp_objective(X, g)
    rep = minimize(f, random_frame(2, 1, 0), **TIGHT)
    assert f(sol.frame) == pytest.approx(rep.f_final, rel=1e-8, abs=1e-12)


def test_lpp_matches_generalized_eig():
    X = _gauss(5, 60, 8)
    g = neighborhood_graph(X)
    sol = lpp_generalized_eig(X, g, 2)
    f = lpp_objective(X, g)
    rep = minimize(f, random_frame(5, 2, 0), **TIGHT)
    assert rep.f_final == pytest.approx(f(sol.frame), rel=1e-6)


def test_lpp_mapping_whitens_degree_form():
    X = _gauss(4, 40, 2)
    g = neighborhood_graph(X)
    f = lpp_objective(X, g)
    M = random_frame(4, 2, 1)
    P = f.projection(M)
    np.testing.assert_allclose(P @ X @ g.degree @ X.T @ P.T, np.eye(2), atol=1e-8)


def test_npe_whitening_uses_covariance():
    X = _gauss(4, 40, 3)
    f = npe_objective(X, neighborhood_graph(X))
    P = f.projection(random_frame(4, 2, 0))
    np.testing.assert_allclose(P @ X @ X.T @ P.T, np.eye(2), atol=1e-8)


# --- data containers -----------------------------------------------------------


@given(st.integers(1, 5), st.integers(1, 40), st.integers(0, 1000))
def test_center_gives_centered(d, n, seed):
    X = np.random.default_rng(seed).standard_normal((d, n)) * 10 + 3
    assert is_centered(center(X))


def test_labeled_data_validation():
    with pytest.raises(InvalidShapeError):
        LabeledData(np.zeros((2, 3)), [0, 1])
    with pytest.raises(InvalidInputError):
        LabeledData(np.zeros((2, 3)), [0, 0, 0])
