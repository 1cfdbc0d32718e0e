"""Command line interface: ``solve``, ``gradcheck``, ``bench`` and ``datagen``.

Matrices live on disk as CSV with one sample per row (n x d); they are
transposed to d x n in memory. Reports are JSON.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import baselines as bl
from . import experiments as ex
from . import objectives as ob
from . import unconstrained as un
from .data import center
from .errors import LDRError
from .geometry import ManifoldKind, fix_signs, is_tuple, random_frame
from .solver import Objective, SolverConfig, gradient_check, minimize

logger = logging.getLogger("ldr")

EXIT_OK, EXIT_ERROR, EXIT_STALLED = 0, 1, 2


class CLIError(Exception):
    """User-facing failure; reported on stderr with exit code 1."""


# ---------------------------------------------------------------------------
# file formats


def fmt(x) -> str:
    """17 significant digits: enough for an exact double round trip."""
    return format(float(x), ".17g")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


@dataclass
class Table:
    header: list
    rows: list  # list of lists of strings
    path: str
    has_header: bool = False

    def column_index(self, spec: str) -> int:
        ncol = len(self.header)
        if spec == "last":
            return ncol - 1
        if spec == "first":
            return 0
        if self.has_header and spec in self.header:
            return self.header.index(spec)
        try:
            k = int(spec)
        except ValueError:
            raise CLIError(f"{self.path}: no column {spec!r}") from None
        if not -ncol <= k < ncol:
            raise CLIError(f"{self.path}: column index {k} out of range for {ncol} columns")
        return k % ncol

    def numeric(self, columns) -> np.ndarray:
        """Selected columns as a float array of shape (len(columns), n)."""
        out = np.empty((len(columns), len(self.rows)))
        offset = 2 if self.has_header else 1
        for i, row in enumerate(self.rows):
            for j, c in enumerate(columns):
                try:
                    out[j, i] = float(row[c])
                except ValueError:
                    raise CLIError(f"{self.path}: line {i + offset}: not a number: {row[c]!r}") from None
        return out


def read_table(path) -> Table:
    """Parse a CSV file; the first line is a header if any field is non-numeric."""
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None
    lines = list(csv.reader(io.StringIO(text)))
    lines = [ln for ln in lines if ln and any(f.strip() for f in ln)]
    if not lines:
        raise CLIError(f"{path}: empty file")
    first = [f.strip() for f in lines[0]]
    explicit = not all(_is_number(f) for f in first)
    header = first if explicit else [f"x{j + 1}" for j in range(len(first))]
    body = lines[1:] if explicit else lines
    rows = []
    for i, ln in enumerate(body):
        ln = [f.strip() for f in ln]
        if len(ln) != len(header):
            lineno = i + (2 if explicit else 1)
            raise CLIError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(ln)}")
        rows.append(ln)
    return Table(header, rows, path, explicit)


def atomic_write(path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_csv(Y: np.ndarray, header) -> str:
    """``Y`` is written row by row (rows = samples)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in Y:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def rows_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else (fmt(row[c]) if isinstance(row[c], float) else row[c])
                    for c in columns])
    return buf.getvalue()


def write_json(path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2, allow_nan=True) + "\n")


# ---------------------------------------------------------------------------
# problems


@dataclass
class Inputs:
    X: np.ndarray
    labels: np.ndarray | None = None
    Xb: np.ndarray | None = None
    responses: np.ndarray | None = None
    lag: int = 1
    split: int | None = None


@dataclass
class Problem:
    objective: Objective
    start: object
    baseline: object = None
    baseline_name: str | None = None
    embed: object = None  # custom map from frame to output coordinates


def _orth_bottom(C, r):
    _, Q = np.linalg.eigh(C)
    return fix_signs(Q[:, :r])


def _need(value, what, name):
    if value is None:
        raise CLIError(f"objective {name!r} needs {what}")
    return value


def _p_pca(inp, r, rng):
    return Problem(ob.pca_objective(inp.X), None, bl.pca_svd(inp.X, r).frame, "pca_svd")


def _p_ordered_pca(inp, r, rng):
    A = np.arange(r, 0, -1, dtype=float)
    return Problem(ob.ordered_pca_objective(inp.X, A), None, bl.pca_svd(inp.X, r).frame, "pca_svd")


def _p_mds_scatter(inp, r, rng):
    return Problem(ob.mds_scatter_objective(inp.X), None, bl.pca_svd(inp.X, r).frame, "pca_svd")


def _p_mds_stress(inp, r, rng):
    return Problem(ob.mds_stress_objective(inp.X), None, bl.pca_svd(inp.X, r).frame, "pca_svd")


def _p_lda(inp, r, rng):
    labels = _need(inp.labels, "a labels column (--labels-col)", "lda")
    sp = ob.scatter_matrices(inp.X, labels)
    return Problem(ob.lda_objective(sp), None, bl.lda_heuristic(sp, r).frame, "lda_heuristic")


def _p_cca_orth(inp, r, rng):
    Xb = _need(inp.Xb, "a second dataset (--second)", "cca_orth")
    sol = bl.cca_traditional(inp.X, Xb, r)
    return Problem(ob.cca_orthogonal_objective(inp.X, Xb), None, sol.info["orthogonalized"],
                   "cca_traditional_orthogonalized")


def _p_cca_trad(inp, r, rng):
    Xb = _need(inp.Xb, "a second dataset (--second)", "cca_trad")
    sol = bl.cca_traditional(inp.X, Xb, r)
    return Problem(ob.cca_traditional_objective(inp.X, Xb), None, sol.frame, "cca_traditional")


def _maf_family(builder):
    def make(inp, r, rng):
        lc = ob.lagged_covariances(inp.X, inp.lag)
        return Problem(builder(lc), None, bl.maf_heuristic(lc, r).frame, "maf_heuristic")
    return make


def _p_sfa(inp, r, rng):
    Xdot = ob.time_derivative(inp.X)
    return Problem(ob.sfa_objective(Xdot), None, _orth_bottom(Xdot @ Xdot.T, r), "sfa_eig")


def _p_sdr(inp, r, rng):
    Z = _need(inp.responses, "responses (--responses)", "sdr")
    M0 = bl.pca_svd(inp.X, r).frame
    kp = ob.kernel_pair(inp.X, Z, M0)
    return Problem(ob.sdr_objective(inp.X, kp), M0)


def _graph(X):
    return ob.neighborhood_graph(X, k=min(7, X.shape[1] - 1))


def _p_lpp(inp, r, rng):
    g = _graph(inp.X)
    return Problem(ob.lpp_objective(inp.X, g), None, bl.lpp_generalized_eig(inp.X, g, r).frame,
                   "lpp_generalized_eig")


def _p_npe(inp, r, rng):
    return Problem(ob.npe_objective(inp.X, _graph(inp.X)), None)


def _p_ppca(inp, r, rng):
    M, s2 = bl.ppca_closed_form(inp.X, r)
    return Problem(un.ppca_nll(inp.X, s2), None, M, "ppca_closed_form")


def _p_linreg(inp, r, rng):
    k = inp.split if inp.split is not None else r
    if k != r:
        raise CLIError("--split must equal --r: the first r columns are the regression inputs")
    split = un.RegressionSplit.from_data(inp.X, k)
    q = inp.X.shape[0] - k
    try:
        base = un.linreg_fit(split)
    except LDRError:
        base = None
    return Problem(un.linreg_objective(split), np.zeros((q, k)), base, "least_squares" if base is not None else None,
                   embed=lambda M: un.linreg_embedding(M) @ inp.X)


def _p_lmnn(inp, r, rng):
    labels = _need(inp.labels, "a labels column (--labels-col)", "lmnn")
    ns = un.target_neighbors(inp.X, labels)
    return Problem(un.lmnn_objective(inp.X, ns), bl.pca_svd(inp.X, r).frame)


def _p_constant(inp, r, rng):
    f = Objective("constant", lambda M: 3.0, lambda M: np.zeros_like(M))
    return Problem(f, None)


PROBLEMS = {
    "pca": _p_pca,
    "ordered_pca": _p_ordered_pca,
    "mds_scatter": _p_mds_scatter,
    "mds_stress": _p_mds_stress,
    "lda": _p_lda,
    "cca_orth": _p_cca_orth,
    "cca_trad": _p_cca_trad,
    "maf": _maf_family(ob.maf_objective),
    "maf_crosscov": _maf_family(ob.maf_crosscov_objective),
    "maf_sqdist": _maf_family(ob.maf_sqdist_objective),
    "sfa": _p_sfa,
    "sdr": _p_sdr,
    "lpp": _p_lpp,
    "npe": _p_npe,
    "ppca": _p_ppca,
    "fa": None,  # fitted by EM, handled separately
    "linreg": _p_linreg,
    "lmnn": _p_lmnn,
    "constant": _p_constant,
}


def _lookup(name):
    if name not in PROBLEMS:
        raise CLIError(f"unknown objective {name!r}; available: {', '.join(sorted(PROBLEMS))}")
    return name


def _frame_json(M):
    if is_tuple(M):
        return [_frame_json(m) for m in M]
    return {"shape": list(M.shape), "column_major": [float(v) for v in np.ravel(M, order="F")]}


def _solver_config(args) -> SolverConfig:
    kw = {"manifold_kind": ManifoldKind(args.manifold)}
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    if args.tol is not None:
        kw["grad_tol"] = args.tol
    return SolverConfig(**kw)


def _manifest(args, argv, extra) -> dict:
    m = {"command": args.command, "tool_version": __version__, "argv": list(argv)}
    m.update(extra)
    return m


# ---------------------------------------------------------------------------
# solve


def _load_inputs(args):
    table = read_table(args.input)
    ncol = len(table.header)
    used = set()
    labels = None
    if args.labels_col is not None:
        k = table.column_index(args.labels_col)
        used.add(k)
        labels = np.array([row[k] for row in table.rows])
    responses_cols = []
    if args.responses:
        responses_cols = [table.column_index(c) for c in args.responses.split(",")]
        used.update(responses_cols)
    features = [j for j in range(ncol) if j not in used]
    if not features:
        raise CLIError("no feature columns left")
    X = table.numeric(features)
    Z = table.numeric(responses_cols) if responses_cols else None
    Xb = None
    if args.second:
        tb = read_table(args.second)
        Xb = tb.numeric(list(range(len(tb.header))))
        if Xb.shape[1] != X.shape[1]:
            raise CLIError("--second must have the same number of rows as the input")
    means = {}
    if not args.no_center:
        means["input"] = X.mean(axis=1).tolist() if X.shape[1] else []
        X = center(X)
        if Xb is not None:
            means["second"] = Xb.mean(axis=1).tolist() if Xb.shape[1] else []
            Xb = center(Xb)
    inp = Inputs(X, labels, Xb, Z, args.lag, args.split)
    return inp, [table.header[j] for j in features], means


def _solve_fa(args, inp, cfg):
    model = un.fa_fit(inp.X, args.r, max_em_iters=cfg.max_iters)
    Y = model.transform(inp.X)
    trace = model.nll_trace
    report = {
        "objective": "fa", "f_init": trace[0], "f_final": trace[-1], "iterations": len(trace) - 1,
        "converged": model.converged, "status": "em_tol" if model.converged else "max_iters",
        "wall_ms": None, "frame": _frame_json(model.loading), "noise": model.noise.tolist(),
        "heywood": model.heywood.tolist(), "objective_trace": trace,
    }
    return report, Y, model.converged


def _random_start(name, inp, r, rng):
    d = inp.X.shape[0]
    if name in ("cca_orth", "cca_trad"):
        return random_frame(d, r, rng), random_frame(inp.Xb.shape[0], r, rng)
    if name == "linreg":
        return rng.standard_normal((d - r, r))
    return random_frame(d, r, rng)


def cmd_solve(args, argv) -> int:
    name = _lookup(args.objective)
    cfg = _solver_config(args)
    inp, feature_names, means = _load_inputs(args)
    rng = np.random.default_rng(args.seed)
    if name == "fa":
        report, Y, converged = _solve_fa(args, inp, cfg)
        baseline_f = None
        extra = {}
    else:
        prob = PROBLEMS[name](inp, args.r, rng)
        f = prob.objective
        baseline_f = float(f(prob.baseline)) if prob.baseline is not None else None
        if args.init == "baseline" and prob.baseline is None:
            raise CLIError(f"objective {name!r} has no baseline solution")
        if args.init == "random":
            start = _random_start(name, inp, args.r, rng)
        elif args.init == "baseline":
            start = prob.baseline
        elif prob.start is not None:
            start = prob.start
        elif prob.baseline is not None:
            start = prob.baseline
        else:
            start = _random_start(name, inp, args.r, rng)
        rep = minimize(f, start, cfg)
        M = rep.final_frame
        if prob.embed is not None:
            Y = prob.embed(M)
        else:
            P = f.projection(M)
            Y = np.vstack([p @ x for p, x in zip(P, (inp.X, inp.Xb))]) if is_tuple(P) else P @ inp.X
        converged = rep.converged
        report = {
            "objective": name, "f_init": rep.f_init, "f_final": rep.f_final, "iterations": rep.iterations,
            "converged": rep.converged, "status": rep.status, "wall_ms": rep.wall_ms,
            "frame": _frame_json(M), "objective_trace": rep.objective_trace,
        }
        extra = {}
        if prob.baseline is not None:
            extra["baseline"] = {"name": prob.baseline_name, "f": baseline_f, "frame": _frame_json(prob.baseline)}
        if name == "cca_orth":
            extra["correlation"] = -rep.f_final
    report.update(extra)
    out = Path(args.out) if args.out else Path(args.input).with_suffix("")
    report_path = out.with_name(out.name + ".report.json")
    proj_path = out.with_name(out.name + ".projection.csv")
    d = inp.X.shape[0] + (inp.Xb.shape[0] if inp.Xb is not None else 0)
    report["manifest"] = _manifest(args, argv, {
        "objective": name, "d": d, "n": inp.X.shape[1], "r": args.r, "seed": args.seed,
        "solver": cfg.to_dict(), "centered": not args.no_center, "means": means,
        "features": feature_names, "init": args.init,
        "inputs": [str(args.input)] + ([str(args.second)] if args.second else []),
        "outputs": [str(report_path), str(proj_path)],
    })
    header = [f"y{j + 1}" for j in range(Y.shape[0])]
    atomic_write(proj_path, matrix_csv(Y.T, header))
    write_json(report_path, report)
    msg = f"{name}: f_init={report['f_init']:.10g} f_final={report['f_final']:.10g}"
    if baseline_f is not None:
        msg += f" baseline={baseline_f:.10g}"
    print(msg + f" iterations={report['iterations']} status={report['status']}")
    print(f"wrote {report_path} and {proj_path}")
    return EXIT_OK if converged else EXIT_STALLED


# ---------------------------------------------------------------------------
# gradcheck


def synthetic_inputs(name, d, r, seed, n=None) -> Inputs:
    """Small seeded dataset suited to objective ``name``."""
    rng = np.random.default_rng(seed)
    n = n or (30 if name in ("lmnn", "mds_stress", "sdr") else max(60, 4 * d))
    if name in ("lda", "lmnn"):
        c = 3
        data = ex.gen_gaussian_clusters(d, -(-n // c), c, mean_std=2.0, ecc_mean=2.0, seed=rng)
        return Inputs(data.X, data.labels)
    if name in ("cca_orth", "cca_trad"):
        Xa, Xb = ex.gen_cca_pair(d, n, 0.1, rng)
        return Inputs(Xa, Xb=Xb)
    if name.startswith("maf") or name == "sfa":
        return Inputs(ex.gen_spline_timeseries(d, max(n, 50), 0.1, rng))
    X = ex.gen_random_cov_data(d, n, 2.0, rng)
    Z = np.sin(X[:1]) + 0.1 * rng.standard_normal((1, n)) if name == "sdr" else None
    return Inputs(X, responses=Z, split=r)


GRAD_TOL = 1e-5
GRAD_TOL_NONSMOOTH = 1e-4


def gradcheck_objective(name, d, r, seed, frames=5, h=1e-5):
    """Max relative gradient error at ``frames`` seeded points for objective ``name``.

    Returns a list of ``(frame_index, error)`` and the pass threshold. LMNN
    points whose hinge arguments come within 1e-4 of a kink are skipped.
    """
    _lookup(name)
    rng = np.random.default_rng(seed)
    inp = synthetic_inputs(name, d, r, seed)
    if name == "fa":
        X = inp.X
        noise = np.exp(rng.standard_normal(X.shape[0]) * 0.3)
        f = un.fa_nll(X, noise)
    else:
        f = PROBLEMS[name](inp, r, rng).objective
    tol = GRAD_TOL_NONSMOOTH if name == "lmnn" else GRAD_TOL
    out = []
    tries = 0
    while len(out) < frames:
        tries += 1
        if tries > 50 * frames:
            raise CLIError("could not find points away from hinge kinks")
        M = _random_start(name, inp, r, rng)
        if name == "lmnn":
            ns = un.target_neighbors(inp.X, inp.labels)
            if np.min(np.abs(un.lmnn_margins(inp.X, ns, M)), initial=np.inf) <= 1e-4:
                continue
        out.append((len(out), gradient_check(f, M, h)))
    return out, tol


def cmd_gradcheck(args, argv) -> int:
    names = list(PROBLEMS) if args.objective == "all" else [args.objective]
    for nm in names:
        _lookup(nm)
    failed = False
    rows = []
    print(f"{'objective':<14} {'frame':>5} {'max_rel_err':>12} {'threshold':>9}  result")
    for nm in names:
        results, tol = gradcheck_objective(nm, args.d, args.r, args.seed)
        for k, err in results:
            ok = err < tol
            failed |= not ok
            rows.append({"objective": nm, "frame": k, "max_rel_err": err, "threshold": tol, "pass": ok})
            print(f"{nm:<14} {k:>5} {err:>12.3e} {tol:>9.0e}  {'PASS' if ok else 'FAIL'}")
    if args.out:
        write_json(args.out, {"results": rows, "manifest": _manifest(args, argv, {
            "objective": args.objective, "d": args.d, "r": args.r, "seed": args.seed})})
    return EXIT_ERROR if failed else EXIT_OK


# ---------------------------------------------------------------------------
# bench

BENCH_COLUMNS = ["method", "d", "r", "seed", "f_eig", "f_orth", "improvement", "normalized",
                 "iterations", "wall_ms", "kind", "q25", "q75", "start", "error"]


def load_grid(spec, seeds=20, full=False):
    """A preset name or a JSON file.

    The file holds either a list of trials ``{"method", "d", "r", "seed", "params"}``
    or a product ``{"methods": [...], "d": [...], "r": [...], "seeds": k}``.
    """
    if spec in ex.PRESETS:
        return ex.preset(spec, seeds=seeds, full=full)
    p = Path(spec)
    if not p.exists():
        raise CLIError(f"unknown preset {spec!r}; choose from {', '.join(ex.PRESETS)} or a JSON grid file")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CLIError(f"{spec}: invalid JSON at line {exc.lineno}") from None
    try:
        if isinstance(data, list):
            return [ex.TrialSpec(t["method"], int(t["d"]), int(t["r"]), int(t.get("seed", 0)),
                                 dict(t.get("params", {}))) for t in data]
        return [ex.TrialSpec(m, int(d), int(r), s, dict(data.get("params", {})))
                for m in data["methods"] for d in data["d"] for r in data["r"]
                for s in range(int(data.get("seeds", seeds))) if int(r) < int(d)]
    except (KeyError, TypeError) as exc:
        raise CLIError(f"{spec}: malformed grid ({exc})") from None


def bench_rows(results):
    rows = []
    for res in results:
        row = res.row()
        row["kind"] = "trial"
        rows.append(row)
    for s in ex.summarize(results):
        rows.append({"method": s["method"], "d": s["d"], "r": s["r"], "seed": "summary",
                     "improvement": s["median"], "q25": s["q25"], "q75": s["q75"],
                     "wall_ms": s["median_wall_ms"], "iterations": s["median_iterations"],
                     "normalized": s["normalized"], "kind": "summary",
                     "error": f"{s['failed']} failed" if s["failed"] else None})
    return rows


def cmd_bench(args, argv) -> int:
    grid = load_grid(args.grid, seeds=args.seeds, full=args.full)
    cfg = _solver_config(args)
    results, elapsed = ex.timed_benchmark(grid, cfg, workers=args.workers)
    rows = bench_rows(results)
    text = rows_csv(rows, BENCH_COLUMNS)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    for s in ex.summarize(results):
        logger.info("%s d=%d r=%d median=%.3g [%.3g, %.3g] median_wall_ms=%.1f", s["method"], s["d"], s["r"],
                    s["median"], s["q25"], s["q75"], s["median_wall_ms"])
    print(f"{len(results)} trials in {elapsed:.1f} s", file=sys.stderr)
    return EXIT_ERROR if any(not r.ok for r in results) else EXIT_OK


# ---------------------------------------------------------------------------
# datagen

GENERATORS = ("clusters", "randcov", "cca", "spline")


def cmd_datagen(args, argv) -> int:
    if args.generator not in GENERATORS:
        raise CLIError(f"unknown generator {args.generator!r}; choose from {', '.join(GENERATORS)}")
    if args.d < 1 or args.n < 0:
        raise CLIError("need d >= 1 and n >= 0")
    outputs = {}
    if args.generator == "clusters":
        if args.classes < 2 or args.n_per < 0:
            raise CLIError("need --classes >= 2 and --n-per >= 0")
        mean_std = args.mean_std if args.mean_std is not None else 2.5
        ecc = args.ecc_mean if args.ecc_mean is not None else 5.0
        header = [f"x{j + 1}" for j in range(args.d)] + ["label"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        if args.n_per > 0:
            data = ex.gen_gaussian_clusters(args.d, args.n_per, args.classes, mean_std, ecc, args.seed)
            for x, lab in zip(data.X.T, data.labels):
                w.writerow([fmt(v) for v in x] + [str(lab)])
        outputs[args.out] = buf.getvalue()
    elif args.generator == "randcov":
        ecc = args.ecc_mean if args.ecc_mean is not None else 2.0
        X = ex.gen_random_cov_data(args.d, args.n, ecc, args.seed)
        outputs[args.out] = matrix_csv(X.T, [f"x{j + 1}" for j in range(args.d)])
    elif args.generator == "cca":
        Xa, Xb = ex.gen_cca_pair(args.d, args.n, args.noise, args.seed)
        second = args.second or str(Path(args.out).with_suffix("")) + "_b.csv"
        outputs[args.out] = matrix_csv(Xa.T, [f"a{j + 1}" for j in range(args.d)])
        outputs[second] = matrix_csv(Xb.T, [f"b{j + 1}" for j in range(args.d)])
    else:
        X = ex.gen_spline_timeseries(args.d, args.n, args.noise, args.seed)
        outputs[args.out] = matrix_csv(X.T, [f"x{j + 1}" for j in range(args.d)])
    for path, text in outputs.items():
        atomic_write(path, text)
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r", type=int, default=2, help="target dimension")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="absolute tolerance on the projected gradient norm")
    p.add_argument("--manifold", choices=["stiefel", "grassmann"], default="stiefel")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ldr", description="Linear dimensionality reduction on matrix manifolds")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"ldr {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimize an objective on a CSV dataset")
    p.add_argument("input")
    p.add_argument("--objective", required=True)
    p.add_argument("--labels-col", default=None, help="'last', 'first', an index or a header name")
    p.add_argument("--second", default=None, help="second view for CCA")
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--responses", default=None, help="comma-separated response columns for SDR")
    p.add_argument("--split", type=int, default=None, help="number of leading input columns for linreg")
    p.add_argument("--init", choices=["auto", "baseline", "random"], default="auto")
    p.add_argument("--no-center", action="store_true")
    _common(p)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check at seeded points")
    p.add_argument("--objective", required=True, help="objective name or 'all'")
    p.add_argument("--d", type=int, default=6)
    _common(p)

    p = sub.add_parser("bench", help="heuristic vs manifold benchmark")
    p.add_argument("grid", help="preset (fig1, fig2a, fig2b, fig3) or JSON grid file")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--full", action="store_true", help="include the largest sizes (d = 1024, r = 80)")
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("datagen", help="write a synthetic dataset")
    p.add_argument("generator", help=", ".join(GENERATORS))
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--n-per", type=int, default=1000)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--mean-std", type=float, default=None)
    p.add_argument("--ecc-mean", type=float, default=None)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--second", default=None, help="path for the second CCA view")
    _common(p)
    return ap


COMMANDS = {"solve": cmd_solve, "gradcheck": cmd_gradcheck, "bench": cmd_bench, "datagen": cmd_datagen}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "datagen" and not args.out:
        print("error: datagen needs --out", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args, argv)
    except (CLIError, LDRError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
