"""First-order projected gradient descent on matrix manifolds.

Each iteration projects the negative Euclidean gradient onto the tangent
space, then backtracks along the retracted curve until the Armijo condition
holds. The same loop serves the Stiefel, Grassmann, product-Stiefel and
unconstrained cases; only the projection and the retraction change.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from . import geometry as geo
from .errors import DegenerateStepError, InvalidConfigError, InvalidInputError, NumericalFailure
from .geometry import ManifoldKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Objective:
    """A differentiable objective to be minimized over a matrix manifold.

    Attributes
    ----------
    name : str
    value : callable
        ``value(M) -> float``. Maximization problems are negated when the
        objective is built, so this is always minimized.
    grad : callable
        ``grad(M)``: Euclidean gradient with the same shape (or tuple
        structure) as ``M``.
    rotation_invariant : bool
        Whether ``value(M R) == value(M)`` for orthogonal ``R``, i.e. whether
        the objective only depends on the spanned subspace.
    manifold : ManifoldKind
        Natural constraint set. EUCLIDEAN for unconstrained objectives.
    mapping : callable, optional
        ``mapping(M) -> P`` giving the linear map of the reduced data
        ``Y = P X``. Defaults to ``M^T``.
    """

    name: str
    value: Callable[[Any], float]
    grad: Callable[[Any], Any]
    rotation_invariant: bool = True
    manifold: ManifoldKind = ManifoldKind.STIEFEL
    mapping: Callable[[Any], Any] | None = None

    def __call__(self, M) -> float:
        return self.value(M)

    def projection(self, M):
        if self.mapping is not None:
            return self.mapping(M)
        return geo.frame_map(lambda m: m.T, M)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    grad_tol: float | None = None  # None -> 1e-6 * (1 + |f(M0)|)
    f_rel_tol: float = 1e-10
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 50
    manifold_kind: ManifoldKind = ManifoldKind.STIEFEL

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidConfigError("max_iters must be >= 1")
        if not 0 < self.armijo_c < 1:
            raise InvalidConfigError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise InvalidConfigError("backtrack_factor must lie in (0, 1)")
        if self.initial_step <= 0:
            raise InvalidConfigError("initial_step must be positive")
        if self.grad_tol is not None and self.grad_tol < 0:
            raise InvalidConfigError("grad_tol must be nonnegative")
        if self.f_rel_tol < 0:
            raise InvalidConfigError("f_rel_tol must be nonnegative")
        object.__setattr__(self, "manifold_kind", ManifoldKind(self.manifold_kind))

    def to_dict(self) -> dict:
        return {
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "f_rel_tol": self.f_rel_tol,
            "armijo_c": self.armijo_c,
            "backtrack_factor": self.backtrack_factor,
            "initial_step": self.initial_step,
            "max_backtracks": self.max_backtracks,
            "manifold_kind": self.manifold_kind.value,
        }


@dataclass
class SolveReport:
    final_frame: Any
    f_init: float
    f_final: float
    iterations: int
    converged: bool
    status: str
    objective_trace: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    grad_norm: float = float("nan")
    wall_ms: float = 0.0


def _check_finite(x, what):
    ok = np.isfinite(x) if np.isscalar(x) else all(
        np.all(np.isfinite(a)) for a in (x if geo.is_tuple(x) else (x,))
    )
    if not ok:
        raise NumericalFailure(f"non-finite {what}")


def minimize(f: Objective, M0, cfg: SolverConfig | None = None, **overrides) -> SolveReport:
    """Minimize ``f`` over the manifold by projected gradient descent.

    Parameters
    ----------
    f : Objective
    M0 : array or tuple of arrays
        Feasible starting point.
    cfg : SolverConfig, optional
        Keyword ``overrides`` replace individual fields of ``cfg``.

    Returns
    -------
    SolveReport
        ``converged`` is False when ``max_iters`` is reached or the line
        search stalls; the last accepted (feasible) frame is returned.
    """
    cfg = replace(cfg or SolverConfig(), **overrides)
    kind = ManifoldKind.EUCLIDEAN if f.manifold is ManifoldKind.EUCLIDEAN else cfg.manifold_kind
    M = geo.frame_map(lambda m: np.array(m, dtype=float), M0)
    if kind is not ManifoldKind.EUCLIDEAN and not geo.is_feasible(M, 1e-8):
        raise InvalidInputError("starting point is not on the manifold")

    if kind is ManifoldKind.EUCLIDEAN:
        def step(M, Z):
            return geo.frame_axpy(1.0, Z, M)
    else:
        step = geo.retract

    t0 = time.perf_counter()
    fx = float(f.value(M))
    _check_finite(fx, "objective")
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-6 * (1 + abs(fx))
    trace = [fx]
    steps: list[float] = []
    beta = None
    status = "max_iters"
    converged = False
    dnorm = float("nan")
    it = 0
    while True:
        G = f.grad(M)
        _check_finite(G, "gradient")
        D = geo.project_tangent(M, geo.frame_map(np.negative, G), kind)
        dnorm = geo.frame_norm(D)
        if dnorm <= grad_tol:
            status, converged = "grad_tol", True
            break
        if it >= cfg.max_iters:
            break
        beta = cfg.initial_step / (1 + dnorm) if beta is None else 2 * beta
        decrease = cfg.armijo_c * dnorm ** 2
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            try:
                M_new = step(M, geo.frame_map(lambda d: beta * d, D))
                f_new = float(f.value(M_new))
            except (DegenerateStepError, NumericalFailure, np.linalg.LinAlgError, FloatingPointError):
                f_new = np.inf
            if np.isfinite(f_new) and f_new <= fx - beta * decrease:
                accepted = True
                break
            beta *= cfg.backtrack_factor
        if not accepted:
            status = "stalled"
            break
        it += 1
        df = fx - f_new
        M, fx = M_new, f_new
        trace.append(fx)
        steps.append(beta)
        if abs(df) <= cfg.f_rel_tol * (1 + abs(fx)):
            status, converged = "f_tol", True
            break

    wall_ms = 1e3 * (time.perf_counter() - t0)
    logger.debug("%s: %s after %d iterations, f=%.6g", f.name, status, it, fx)
    return SolveReport(
        final_frame=M,
        f_init=trace[0],
        f_final=fx,
        iterations=it,
        converged=converged,
        status=status,
        objective_trace=trace,
        step_sizes=steps,
        grad_norm=dnorm,
        wall_ms=wall_ms,
    )


def gradient_check(f: Objective, M, h: float = 1e-5) -> float:
    """Max entrywise relative error between ``f.grad`` and central differences.

    Every ambient entry of ``M`` (all tuple elements included) is perturbed by
    ``+-h``. Returns ``max |fd - g| / (1 + |g|)``.
    """
    if not 1e-8 <= h <= 1e-3:
        raise InvalidConfigError("h must lie in [1e-8, 1e-3]")
    frames = [np.array(m, dtype=float) for m in (M if geo.is_tuple(M) else (M,))]
    grads = f.grad(tuple(frames) if geo.is_tuple(M) else frames[0])
    grads = [np.asarray(g, dtype=float) for g in (grads if geo.is_tuple(M) else (grads,))]
    _check_finite(grads, "gradient")

    def evaluate():
        return float(f.value(tuple(frames) if geo.is_tuple(M) else frames[0]))

    worst = 0.0
    for m, g in zip(frames, grads):
        for idx in np.ndindex(m.shape):
            orig = m[idx]
            m[idx] = orig + h
            fp = evaluate()
            m[idx] = orig - h
            fm = evaluate()
            m[idx] = orig
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise NumericalFailure("non-finite objective during finite differencing")
            fd = (fp - fm) / (2 * h)
            worst = max(worst, abs(fd - g[idx]) / (1 + abs(g[idx])))
    return worst
