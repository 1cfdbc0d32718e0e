"""Synthetic data generators and the heuristic-vs-manifold benchmark harness."""
from __future__ import annotations

import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .baselines import cca_traditional, lda_heuristic, maf_heuristic, pca_svd
from .data import LabeledData, center
from .errors import InvalidConfigError, InvalidShapeError, UndefinedMetricError
from .geometry import random_frame_like, random_rotation
from .objectives import (
    cca_orthogonal_objective,
    lagged_covariances,
    lda_objective,
    maf_objective,
    pca_objective,
    scatter_matrices,
)
from .solver import SolverConfig, minimize

logger = logging.getLogger(__name__)

METHODS = ("pca", "lda", "cca", "maf")


def improvement_metric(f_orth: float, f_eig: float, normalize: bool = True) -> float:
    """Improvement of the manifold optimum over the heuristic point.

    Both values follow the minimization convention, so positive numbers mean
    the manifold solution is better. With ``normalize`` the difference is
    divided by ``|f_eig|``.
    """
    diff = -(f_orth - f_eig)
    if not normalize:
        return float(diff)
    if f_eig == 0:
        raise UndefinedMetricError("normalized improvement is undefined when f_eig = 0")
    return float(diff / abs(f_eig))


# ---------------------------------------------------------------------------
# generators


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _random_cov_factor(d, ecc, rng):
    """Square root ``R diag(sqrt(1 + e))`` of a randomly oriented covariance."""
    R = random_rotation(d, rng)
    return R * np.sqrt(1.0 + ecc)


def gen_gaussian_clusters(d: int, n_per: int, c: int, mean_std: float = 2.5,
                          ecc_mean: float = 5.0, seed=0) -> LabeledData:
    """``c`` Gaussian classes of ``n_per`` points each, globally centered.

    Class means are ``N(0, mean_std^2 I)``. Each class covariance is
    ``R diag(1 + e, 1, ..., 1) R^T`` with Haar-random R and ``e ~ Exp(ecc_mean)``.
    Labels are ``0 .. c-1``.
    """
    if c < 2:
        raise InvalidConfigError("need at least two classes")
    if d < 1 or n_per < 0:
        raise InvalidShapeError("d must be positive and n_per nonnegative")
    rng = _rng(seed)
    blocks, labels = [], []
    for k in range(c):
        mu = mean_std * rng.standard_normal(d)
        ecc = np.zeros(d)
        ecc[0] = rng.exponential(ecc_mean) if ecc_mean > 0 else 0.0
        F = _random_cov_factor(d, ecc, rng)
        blocks.append(mu[:, None] + F @ rng.standard_normal((d, n_per)))
        labels.append(np.full(n_per, k))
    X = np.hstack(blocks)
    return LabeledData(center(X), np.concatenate(labels))


def gen_random_cov_data(d: int, n: int, ecc_mean: float = 2.0, seed=0) -> np.ndarray:
    """Centered Gaussian data with covariance ``R diag(1 + e_j) R^T``, ``e_j ~ Exp(ecc_mean)``."""
    if d < 1 or n < 0:
        raise InvalidShapeError("d must be positive and n nonnegative")
    rng = _rng(seed)
    ecc = rng.exponential(ecc_mean, d) if ecc_mean > 0 else np.zeros(d)
    F = _random_cov_factor(d, ecc, rng)
    return center(F @ rng.standard_normal((d, n)))


def _add_noise(S, noise, rng):
    if noise == 0 or S.size == 0:
        return S
    scale = np.sqrt(np.mean(S ** 2))
    return S + noise * scale * rng.standard_normal(S.shape)


def gen_cca_pair(d: int, n: int, noise: float = 0.1, seed=0, same_transform: bool = False,
                 shared_latent: bool = True):
    """Two views ``A Z + noise`` and ``B Z + noise`` of a latent ``Z`` of dimension ``max(1, d // 2)``.

    ``A`` and ``B`` have standard normal entries. Noise is iid Gaussian with
    standard deviation ``noise`` times the RMS of the clean signal. With
    ``shared_latent=False`` the second view gets its own independent latent.
    """
    if d < 1 or n < 0:
        raise InvalidShapeError("d must be positive and n nonnegative")
    if noise < 0:
        raise InvalidConfigError("noise must be nonnegative")
    rng = _rng(seed)
    k = max(1, d // 2)
    Z = rng.standard_normal((k, n))
    A = rng.standard_normal((d, k))
    B = A if same_transform else rng.standard_normal((d, k))
    Zb = Z if shared_latent else rng.standard_normal((k, n))
    Xa = _add_noise(A @ Z, noise, rng)
    Xb = _add_noise(B @ Zb, noise, rng)
    return center(Xa), center(Xb)


def spline_sources(d: int, n: int, seed=0) -> np.ndarray:
    """``d`` natural cubic splines on a uniform grid of ``[0, 1]``.

    Each passes through 0 at both ends and through four interior knots with
    uniform locations and standard normal values.
    """
    rng = _rng(seed)
    t = np.linspace(0.0, 1.0, n)
    S = np.empty((d, n))
    for i in range(d):
        knots = np.sort(rng.uniform(0.0, 1.0, 4))
        x = np.concatenate([[0.0], knots, [1.0]])
        y = np.concatenate([[0.0], rng.standard_normal(4), [0.0]])
        # repeated knot locations have probability zero; nudge them if they occur
        x = np.maximum.accumulate(x + np.arange(6) * 1e-12)
        S[i] = CubicSpline(x, y, bc_type="natural")(t)
    return S


def gen_spline_timeseries(d: int, n: int, noise: float = 0.1, seed=0) -> np.ndarray:
    """Random spline signals mixed by ``W`` with entries ``U[0, d^{-1/2}]``, plus noise, centered."""
    if n < 8:
        raise InvalidConfigError("need at least 8 time points")
    if d < 1:
        raise InvalidShapeError("d must be positive")
    if noise < 0:
        raise InvalidConfigError("noise must be nonnegative")
    rng = _rng(seed)
    S = spline_sources(d, n, rng)
    W = rng.uniform(0.0, d ** -0.5, (d, d))
    return center(_add_noise(W @ S, noise, rng))


# ---------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class TrialSpec:
    method: str
    d: int
    r: int
    seed: int
    params: dict = field(default_factory=dict, hash=False, compare=True)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 1 <= self.r < self.d:
            raise InvalidShapeError(f"need 1 <= r < d, got d={self.d}, r={self.r}")

    def rng(self) -> np.random.Generator:
        tag = zlib.crc32(self.method.encode())
        return np.random.default_rng([self.seed, self.d, self.r, tag])


@dataclass
class ExperimentResult:
    spec: TrialSpec
    f_eig: float = float("nan")
    f_orth: float = float("nan")
    improvement: float = float("nan")
    iterations: int = 0
    wall_ms: float = 0.0
    normalized: bool = True
    trace_monotone: bool = True
    warm_start_ok: bool = True
    start: str = ""
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def row(self) -> dict:
        row = {"method": self.spec.method, "d": self.spec.d, "r": self.spec.r, "seed": self.spec.seed}
        row.update({k: v for k, v in asdict(self).items() if k != "spec"})
        return row


def default_size(method: str, d: int) -> dict:
    """Desk-scale sample sizes per method."""
    if method == "pca":
        return {"n": 1000, "ecc_mean": 2.0}
    if method == "lda":
        # d classes; cap the total sample count for large d
        return {"n_per": int(min(1000, max(50, 20000 // d))), "c": d, "mean_std": 5.0 / d, "ecc_mean": 5.0}
    if method == "cca":
        return {"n": max(500, 10 * d), "noise": 0.1}
    return {"n": 1000, "noise": 0.1, "lag": 1}


def build_problem(spec: TrialSpec):
    """Data, objective and heuristic frame for one trial.

    Returns ``(objective, heuristic_frame, normalize)``.
    """
    p = {**default_size(spec.method, spec.d), **spec.params}
    rng = spec.rng()
    d, r = spec.d, spec.r
    if spec.method == "pca":
        X = gen_random_cov_data(d, p["n"], p["ecc_mean"], rng)
        return pca_objective(X), pca_svd(X, r).frame, True
    if spec.method == "lda":
        data = gen_gaussian_clusters(d, p["n_per"], max(2, p["c"]), p["mean_std"], p["ecc_mean"], rng)
        sp = scatter_matrices(data)
        return lda_objective(sp), lda_heuristic(sp, r).frame, True
    if spec.method == "cca":
        Xa, Xb = gen_cca_pair(d, p["n"], p["noise"], rng)
        sol = cca_traditional(Xa, Xb, r)
        return cca_orthogonal_objective(Xa, Xb), sol.info["orthogonalized"], False
    X = gen_spline_timeseries(d, p["n"], p["noise"], rng)
    lc = lagged_covariances(X, p["lag"])
    return maf_objective(lc), maf_heuristic(lc, r).frame, True


def _monotone(trace, slack=1e-12):
    t = np.asarray(trace)
    return bool(np.all(np.diff(t) <= slack))


def run_trial(spec: TrialSpec, cfg: SolverConfig | None = None) -> ExperimentResult:
    """Run one trial. Failures are recorded in ``error`` rather than raised."""
    cfg = cfg or SolverConfig()
    res = ExperimentResult(spec)
    try:
        f, M_eig, normalize = build_problem(spec)
        res.normalized = normalize
        res.f_eig = f_eig = float(f(M_eig))
        warm = minimize(f, M_eig, cfg)
        cold = minimize(f, random_frame_like(M_eig, spec.rng().spawn(1)[0]), cfg)
        best, res.start = (warm, "warm") if warm.f_final <= cold.f_final else (cold, "random")
        res.f_orth = best.f_final
        res.iterations = best.iterations
        res.wall_ms = best.wall_ms
        res.trace_monotone = _monotone(warm.objective_trace) and _monotone(cold.objective_trace)
        res.warm_start_ok = warm.f_final <= f_eig
        res.improvement = improvement_metric(res.f_orth, f_eig, normalize)
    except Exception as exc:  # recorded per trial; the run continues
        logger.warning("trial %s failed: %s", spec, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _run_trial_args(args):
    return run_trial(*args)


def run_benchmark(grid, cfg: SolverConfig | None = None, workers: int = 1) -> list:
    """Run every trial in ``grid``. Output order matches the grid order."""
    grid = list(grid)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_run_trial_args, [(s, cfg) for s in grid]))
    return [run_trial(s, cfg) for s in grid]


def summarize(results) -> list:
    """Median and 25/75% quantiles of improvement (and median wall time) per (method, d, r)."""
    groups: dict = {}
    for res in results:
        groups.setdefault((res.spec.method, res.spec.d, res.spec.r), []).append(res)
    rows = []
    for (method, d, r), items in groups.items():
        done = [x for x in items if x.ok]
        imp = np.array([x.improvement for x in done])
        wall = np.array([x.wall_ms for x in done])
        its = np.array([x.iterations for x in done])
        q25, med, q75 = np.quantile(imp, [0.25, 0.5, 0.75]) if len(imp) else (np.nan,) * 3
        rows.append({
            "method": method, "d": d, "r": r, "trials": len(items), "failed": len(items) - len(done),
            "median": float(med), "q25": float(q25), "q75": float(q75),
            "median_wall_ms": float(np.median(wall)) if len(wall) else float("nan"),
            "median_iterations": float(np.median(its)) if len(its) else float("nan"),
            "normalized": bool(done[0].normalized) if done else True,
        })
    return rows


# ---------------------------------------------------------------------------
# presets


def _grid(methods, ds, rs, seeds, params=None):
    return [TrialSpec(m, d, r, s, dict(params or {})) for m in methods for d in ds for r in rs
            for s in range(seeds) if r < d]


def preset(name: str, seeds: int = 20, full: bool = False, methods=METHODS) -> list:
    """Benchmark grids at desk scale.

    ``fig1``: LDA on three 3-d clusters, r = 2. ``fig2a`` and ``fig3``: each
    method over d in {4, 16, 64, 256} at r = 3 (``full`` adds d = 1024).
    ``fig2b``: d = 100 over r in {1, 2, 5, 10, 20, 40} (``full`` adds 80).
    """
    if name == "fig1":
        return _grid(["lda"], [3], [2], seeds, {"n_per": 1000, "c": 3, "mean_std": 2.5, "ecc_mean": 5.0})
    if name in ("fig2a", "fig3"):
        ds = [4, 16, 64, 256] + ([1024] if full else [])
        return _grid(methods, ds, [3], seeds)
    if name == "fig2b":
        rs = [1, 2, 5, 10, 20, 40] + ([80] if full else [])
        return _grid(methods, [100], rs, seeds)
    raise InvalidConfigError(f"unknown preset {name!r}; choose from fig1, fig2a, fig2b, fig3")


PRESETS = ("fig1", "fig2a", "fig2b", "fig3")


def timed_benchmark(grid, cfg=None, workers=1):
    """``run_benchmark`` plus total elapsed seconds."""
    t0 = time.perf_counter()
    results = run_benchmark(grid, cfg, workers)
    return results, time.perf_counter() - t0
