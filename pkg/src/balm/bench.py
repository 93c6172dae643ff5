"""Instance generators, file formats, and the benchmark matchup runner.

Problem files are canonical JSON (sorted keys, two-space indent); floats
serialize through repr, the shortest decimal that reparses to the same
bit pattern, so parse-then-serialize is the identity on canonical files.
History tables are CSV with a single JSON metadata comment up front and
carry full iterates, so every certificate can be replayed offline.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .errors import BalmError, ConfigInvalid, InvalidDims, SchemaError
from .linalg import cholesky_factor, solve_spd
from .multiplier import MultiplierSystem, solve_lcp
from .problems import (
    Block,
    PrimalDualPoint,
    Problem,
    Sense,
    SeparableProblem,
    flatten_blocks,
    total_objective,
)
from .prox import Box, L1, Linear, NonnegativeOrthant, Quadratic, SeparableSum, WholeSpace, Zero
from .solvers import (
    AltSplitConfig,
    BalancedAlmConfig,
    BaselineConfig,
    Method,
    RunHistory,
    SplitConfig,
    StopRule,
    alt_split_metric,
    balanced_metric,
    run,
    split_metric,
)
from .problems import kkt_residual

SCHEMA_VERSION = "1"
GENERATOR_KINDS = ("random_qp_eq", "basis_pursuit", "lasso_eq", "nonneg_qp_ineq")
METHOD_NAMES = (
    "balanced-alm",
    "split-balanced",
    "alt-split",
    "classic-alm",
    "lalm",
    "primal-dual",
    "admm",
    "ladmm",
)


# ---------------------------------------------------------------------------
# instance generators


def generate_instance(kind: str, dims: tuple, seed: int, sparsity: int | None = None):
    """Build a named random instance; returns (problem, reference) where
    reference is a saddle point when one is computed with the instance."""
    m, n = dims
    if m < 1 or n < 1:
        raise InvalidDims(f"dims must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    if kind == "random_qp_eq":
        return _random_qp_eq(m, n, rng)
    if kind == "basis_pursuit":
        return _basis_pursuit(m, n, rng, sparsity)
    if kind == "lasso_eq":
        return _lasso_eq(m, n, rng, sparsity)
    if kind == "nonneg_qp_ineq":
        return _nonneg_qp_ineq(m, n, rng)
    raise ValueError(f"unknown instance kind {kind!r}")


def _random_spd(n: int, rng) -> np.ndarray:
    g = rng.standard_normal((n, n))
    p = g @ g.T / n + 0.5 * np.eye(n)
    return 0.5 * (p + p.T)


def _random_qp_eq(m: int, n: int, rng):
    """Equality QP with its saddle point read off the KKT system."""
    if m > n:
        raise InvalidDims("random_qp_eq needs m <= n for full-row-rank constraints")
    if m == 1 and n == 1:
        # canonical scalar instance: min x^2/2 subject to x = 1
        prob = Problem(Quadratic(np.eye(1), np.zeros(1)), WholeSpace(), np.eye(1), np.ones(1), Sense.EQUALITY)
        return prob, PrimalDualPoint(np.ones(1), np.ones(1))
    p = _random_spd(n, rng)
    c = rng.standard_normal(n)
    a = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    kkt = np.block([[p, -a.T], [a, np.zeros((m, m))]])
    sol = np.linalg.solve(kkt, np.concatenate([-c, b]))
    prob = Problem(Quadratic(p, c), WholeSpace(), a, b, Sense.EQUALITY)
    return prob, PrimalDualPoint(sol[:n], sol[n:])


def _basis_pursuit(m: int, n: int, rng, sparsity):
    if m > n:
        raise InvalidDims("basis_pursuit needs m <= n")
    k = max(1, m // 4) if sparsity is None else sparsity
    if not 0 <= k <= n:
        raise InvalidDims(f"sparsity {k} outside [0, {n}]")
    a = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    if k:
        support = rng.choice(n, size=k, replace=False)
        x_true[support] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
    prob = Problem(L1(1.0), WholeSpace(), a, a @ x_true, Sense.EQUALITY)
    return prob, None


def _lasso_eq(m: int, n: int, rng, sparsity):
    """Lasso in two-block form: min gamma||x||_1 + 0.5||y - d||^2
    subject to A x - y = 0."""
    k = max(1, n // 10) if sparsity is None else sparsity
    if not 0 <= k <= n:
        raise InvalidDims(f"sparsity {k} outside [0, {n}]")
    a = rng.standard_normal((m, n)) / np.sqrt(m)
    x_true = np.zeros(n)
    if k:
        support = rng.choice(n, size=k, replace=False)
        x_true[support] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
    d = a @ x_true + 0.05 * rng.standard_normal(m)
    gamma = 0.1 * float(np.max(np.abs(a.T @ d)))
    blocks = (
        Block(L1(gamma), WholeSpace(), a),
        Block(Quadratic(np.eye(m), -d), WholeSpace(), -np.eye(m)),
    )
    return SeparableProblem(blocks, np.zeros(m), Sense.EQUALITY), None


def _nonneg_qp_ineq(m: int, n: int, rng):
    if m > n:
        raise InvalidDims("nonneg_qp_ineq needs m <= n for full-row-rank constraints")
    p = _random_spd(n, rng)
    c = rng.standard_normal(n)
    a = rng.standard_normal((m, n))
    b = a @ rng.standard_normal(n) + rng.standard_normal(m)
    prob = Problem(Quadratic(p, c), WholeSpace(), a, b, Sense.INEQUALITY)
    return prob, ineq_qp_reference(p, c, a, b)


def ineq_qp_reference(p: np.ndarray, c: np.ndarray, a: np.ndarray, b: np.ndarray) -> PrimalDualPoint:
    """Saddle point of min 0.5 x'Px + c'x s.t. A x >= b (P positive
    definite, A full row rank).

    Reduces to the dual linear complementarity problem in lam with
    matrix A P^-1 A^T, solves it by projected Gauss-Seidel at a tight
    tolerance, then polishes by re-solving the equality KKT system on
    the identified active set.
    """
    n, m = p.shape[0], a.shape[0]
    p_factor = cholesky_factor(p)
    pinv_at = np.column_stack([solve_spd(p_factor, a[i]) for i in range(m)])
    dual_mat = a @ pinv_at
    dual_mat = 0.5 * (dual_mat + dual_mat.T)
    q = -(a @ solve_spd(p_factor, c)) - b
    sys = MultiplierSystem(h=dual_mat, factor=cholesky_factor(dual_mat))
    lam = solve_lcp(sys, np.zeros(m), q, tol=1e-12, max_sweeps=200_000)
    x = solve_spd(p_factor, a.T @ lam - c)
    active = np.flatnonzero(lam > 1e-9)
    if active.size:
        kkt = np.block(
            [[p, -a[active].T], [a[active], np.zeros((active.size, active.size))]]
        )
        sol = np.linalg.solve(kkt, np.concatenate([-c, b[active]]))
        lam_pol = np.zeros(m)
        lam_pol[active] = sol[n:]
        slack = a @ sol[:n] - b
        if np.all(lam_pol >= -1e-12) and np.all(slack >= -1e-11 * (1.0 + np.abs(b))):
            return PrimalDualPoint(sol[:n], np.maximum(lam_pol, 0.0))
    return PrimalDualPoint(x, lam)


# ---------------------------------------------------------------------------
# problem files


def _encode_objective(theta):
    if isinstance(theta, Zero):
        return {"kind": "zero"}
    if isinstance(theta, L1):
        return {"kind": "l1", "weight": theta.weight}
    if isinstance(theta, Quadratic):
        return {"kind": "quadratic", "p": theta.p.tolist(), "c": theta.c.tolist()}
    if isinstance(theta, Linear):
        return {"kind": "linear", "c": theta.c.tolist()}
    if isinstance(theta, SeparableSum):
        return {"kind": "separable_sum", "parts": [_encode_objective(p) for p in theta.parts]}
    raise SchemaError(f"cannot encode objective {type(theta).__name__}")


def _decode_objective(doc):
    try:
        kind = doc["kind"]
        if kind == "zero":
            return Zero()
        if kind == "l1":
            return L1(float(doc["weight"]))
        if kind == "quadratic":
            return Quadratic(np.array(doc["p"], dtype=float), np.array(doc["c"], dtype=float))
        if kind == "linear":
            return Linear(np.array(doc["c"], dtype=float))
        if kind == "separable_sum":
            return SeparableSum(tuple(_decode_objective(p) for p in doc["parts"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad objective entry: {exc}") from exc
    raise SchemaError(f"unknown objective kind {kind!r}")


def _encode_set(spec):
    if isinstance(spec, WholeSpace):
        return {"kind": "whole_space"}
    if isinstance(spec, NonnegativeOrthant):
        return {"kind": "nonnegative_orthant"}
    if isinstance(spec, Box):
        return {"kind": "box", "lower": spec.lower.tolist(), "upper": spec.upper.tolist()}
    raise SchemaError(f"cannot encode set {type(spec).__name__}")


def _decode_set(doc):
    try:
        kind = doc["kind"]
        if kind == "whole_space":
            return WholeSpace()
        if kind == "nonnegative_orthant":
            return NonnegativeOrthant()
        if kind == "box":
            return Box(np.array(doc["lower"], dtype=float), np.array(doc["upper"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad set entry: {exc}") from exc
    raise SchemaError(f"unknown set kind {kind!r}")


def serialize_problem(prob, reference: PrimalDualPoint | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "sense": prob.sense.value,
        "b": prob.b.tolist(),
        "reference": None
        if reference is None
        else {"x": reference.x.tolist(), "lambda": reference.lam.tolist()},
    }
    if isinstance(prob, SeparableProblem):
        doc.update(
            objective=None,
            set=None,
            a=None,
            blocks=[
                {
                    "objective": _encode_objective(blk.theta),
                    "set": _encode_set(blk.x_set),
                    "a": blk.a.tolist(),
                }
                for blk in prob.blocks
            ],
        )
    else:
        doc.update(
            objective=_encode_objective(prob.theta),
            set=_encode_set(prob.x_set),
            a=prob.a.tolist(),
            blocks=None,
        )
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_problem(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("problem file must hold a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    try:
        sense = Sense(doc["sense"])
        b = np.array(doc["b"], dtype=float)
        if doc.get("blocks") is not None:
            blocks = tuple(
                Block(
                    _decode_objective(blk["objective"]),
                    _decode_set(blk["set"]),
                    np.array(blk["a"], dtype=float),
                )
                for blk in doc["blocks"]
            )
            prob = SeparableProblem(blocks, b, sense)
        else:
            prob = Problem(
                _decode_objective(doc["objective"]),
                _decode_set(doc["set"]),
                np.array(doc["a"], dtype=float),
                b,
                sense,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad problem file: {exc}") from exc
    ref_doc = doc.get("reference")
    reference = (
        None
        if ref_doc is None
        else PrimalDualPoint(np.array(ref_doc["x"], dtype=float), np.array(ref_doc["lambda"], dtype=float))
    )
    return prob, reference


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_problem(path: str, prob, reference: PrimalDualPoint | None = None) -> None:
    atomic_write(path, serialize_problem(prob, reference))


def read_problem(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    return parse_problem(text)


# ---------------------------------------------------------------------------
# history tables


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_history(history: RunHistory, method: str, params: dict) -> str:
    n = history.iterates[0].x.size
    m = history.iterates[0].lam.size
    meta = {
        "schema": 1,
        "method": method,
        "params": params,
        "n": n,
        "m": m,
        "converged": history.converged,
        "has_reference": history.h_distances is not None,
        "has_predictors": history.predictors is not None,
    }
    cols = ["k", "primal", "dual", "complementarity", "step_h"]
    if history.h_distances is not None:
        cols.append("dist_h")
    cols += [f"x_{i}" for i in range(n)] + [f"lam_{j}" for j in range(m)]
    if history.predictors is not None:
        cols += [f"px_{i}" for i in range(n)] + [f"plam_{j}" for j in range(m)]
    lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(cols)]
    for k, (w, res) in enumerate(zip(history.iterates, history.residuals)):
        row = [
            str(k),
            _fmt(res.primal),
            _fmt(res.dual),
            _fmt(res.complementarity),
            _fmt(history.successive_h_steps[k]),
        ]
        if history.h_distances is not None:
            row.append(_fmt(history.h_distances[k]))
        row += [_fmt(v) for v in w.x] + [_fmt(v) for v in w.lam]
        if history.predictors is not None:
            # predictors lead the iterate list by one step; pad the first row
            pred = history.predictors[k - 1] if k >= 1 else history.iterates[0]
            row += [_fmt(v) for v in pred.x] + [_fmt(v) for v in pred.lam]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_history(path: str, history: RunHistory, method: str, params: dict) -> None:
    atomic_write(path, serialize_history(history, method, params))


def read_history_table(path: str):
    """Parse a history table into (meta, columns-as-float-lists)."""
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if len(lines) < 2 or not lines[0].startswith("# "):
        raise SchemaError("history table is missing its metadata line")
    try:
        meta = json.loads(lines[0][2:])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"bad metadata line: {exc}") from exc
    names = lines[1].split(",")
    cols = {name: [] for name in names}
    for ln in lines[2:]:
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != len(names):
            raise SchemaError("ragged history table row")
        for name, val in zip(names, parts):
            cols[name].append(float(val))
    return meta, cols


def metric_for(method: str, params: dict, prob) -> np.ndarray:
    """Rebuild the metric a run used, from its recorded parameters."""
    if method == "balanced-alm":
        p = flatten_blocks(prob) if isinstance(prob, SeparableProblem) else prob
        return balanced_metric(p.a, params["r"], params["delta"])
    if method == "split-balanced":
        return split_metric([blk.a for blk in prob.blocks], params["r_list"], params["delta"])
    if method == "alt-split":
        return alt_split_metric(
            prob.blocks[0].a, prob.blocks[1].a, params["r"], params["s"], params["delta"]
        )
    n = prob.n if not isinstance(prob, SeparableProblem) else sum(b.n for b in prob.blocks)
    return np.eye(n + prob.m)


def history_from_table(prob, meta: dict, cols: dict) -> RunHistory:
    """Reconstruct a RunHistory (iterates, predictors, metric) from a
    parsed table; residuals are recomputed from the iterates."""
    n, m = meta["n"], meta["m"]
    rows = len(cols["k"])
    iterates = [
        PrimalDualPoint(
            np.array([cols[f"x_{i}"][row] for i in range(n)]),
            np.array([cols[f"lam_{j}"][row] for j in range(m)]),
        )
        for row in range(rows)
    ]
    predictors = None
    if meta.get("has_predictors"):
        predictors = [
            PrimalDualPoint(
                np.array([cols[f"px_{i}"][row] for i in range(n)]),
                np.array([cols[f"plam_{j}"][row] for j in range(m)]),
            )
            for row in range(1, rows)
        ]
    run_prob = flatten_blocks(prob) if (
        isinstance(prob, SeparableProblem) and meta["method"] in ("balanced-alm", "classic-alm", "lalm", "primal-dual")
    ) else prob
    return RunHistory(
        iterates=iterates,
        residuals=[kkt_residual(run_prob, w) for w in iterates],
        successive_h_steps=cols["step_h"],
        h_distances=cols.get("dist_h"),
        predictors=predictors,
        metric=metric_for(meta["method"], meta["params"], prob),
        converged=bool(meta.get("converged")),
    )


# ---------------------------------------------------------------------------
# configs by name, matchup runner


def build_config(
    name: str,
    prob,
    *,
    r: float = 1.0,
    delta: float = 0.01,
    alpha: float = 1.0,
    s: float | None = None,
    sigma: float | None = None,
    r_list=None,
    sharp_bounds: bool = False,
    inner_tol: float = 1e-10,
    inner_max_iters: int = 50_000,
):
    """Turn a method name plus shared flags into a config; stepsizes that
    carry validity conditions get safe defaults from the instance when
    not supplied."""

    def gram():
        p = flatten_blocks(prob) if isinstance(prob, SeparableProblem) else prob
        return p.gram_norm

    if name == "balanced-alm":
        return BalancedAlmConfig(r=r, delta=delta, alpha=alpha)
    if name == "split-balanced":
        if not isinstance(prob, SeparableProblem):
            raise ConfigInvalid("split-balanced needs a block-structured problem")
        weights = tuple(r_list) if r_list else (r,) * len(prob.blocks)
        return SplitConfig(r_list=weights, delta=delta)
    if name == "alt-split":
        return AltSplitConfig(r=r, s=(s if s is not None else r), delta=delta)
    if name == "classic-alm":
        return BaselineConfig(Method.CLASSIC_ALM, r=r, inner_tol=inner_tol, inner_max_iters=inner_max_iters)
    if name == "lalm":
        val = sigma if sigma is not None else 1.01 * r * gram()
        return BaselineConfig(Method.LALM, r=r, sigma_or_s=val, sharp_bounds=sharp_bounds)
    if name == "primal-dual":
        val = s if s is not None else 1.01 * gram() / r
        return BaselineConfig(Method.PRIMAL_DUAL, r=r, sigma_or_s=val)
    if name == "admm":
        return BaselineConfig(Method.ADMM, r=r, inner_tol=inner_tol, inner_max_iters=inner_max_iters)
    if name == "ladmm":
        if not isinstance(prob, SeparableProblem) or len(prob.blocks) != 2:
            raise ConfigInvalid("ladmm needs a two-block problem")
        val = s if s is not None else 1.01 * r * prob.block_gram_norms[1]
        return BaselineConfig(
            Method.LINEARIZED_ADMM, r=r, sigma_or_s=val,
            inner_tol=inner_tol, inner_max_iters=inner_max_iters, sharp_bounds=sharp_bounds,
        )
    raise ValueError(f"unknown method {name!r}")


def config_params(name: str, cfg) -> dict:
    """The parameters a history table needs to rebuild the run metric."""
    if isinstance(cfg, BalancedAlmConfig):
        return {"r": cfg.r, "delta": cfg.delta, "alpha": cfg.alpha}
    if isinstance(cfg, SplitConfig):
        return {"r_list": list(cfg.r_list), "delta": cfg.delta}
    if isinstance(cfg, AltSplitConfig):
        return {"r": cfg.r, "s": cfg.s, "delta": cfg.delta}
    return {"r": cfg.r, "sigma_or_s": cfg.sigma_or_s, "sharp_bounds": cfg.sharp_bounds}


@dataclass
class ReportRow:
    method: str
    status: str
    iterations: int = 0
    primal: float = float("nan")
    dual: float = float("nan")
    complementarity: float = float("nan")
    objective: float = float("nan")
    wall_time: float = 0.0
    error: str | None = None
    history_path: str | None = None

    def line(self) -> str:
        if self.status == "error":
            return f"method={self.method} status=error error={self.error!r}"
        return (
            f"method={self.method} status={self.status} iterations={self.iterations}"
            f" primal={self.primal:.6e} dual={self.dual:.6e}"
            f" complementarity={self.complementarity:.6e} objective={self.objective:.12e}"
            f" wall_time={self.wall_time:.3f}s history={self.history_path}"
        )


def run_matchup(problem_path: str, methods, stop: StopRule, report_path: str, **flags) -> list:
    """Run each named method on the same instance from the same start and
    write a summary report plus one history table per method.  A method
    that raises keeps its error in the report without stopping the rest."""
    prob, reference = read_problem(problem_path)
    rows = []
    for name in methods:
        row = ReportRow(method=name, status="error")
        started = time.perf_counter()
        try:
            cfg = build_config(name, prob, **flags)
            history = run(prob, cfg, stop, reference=reference)
            final = history.residuals[-1]
            row.status = "converged" if history.converged else "max-iters"
            row.iterations = len(history.iterates) - 1
            row.primal, row.dual = final.primal, final.dual
            row.complementarity = final.complementarity
            row.objective = total_objective(prob, history.iterates[-1].x)
            row.history_path = f"{report_path}.{name}.csv"
            write_history(row.history_path, history, name, config_params(name, cfg))
        except (BalmError, ValueError) as exc:
            row.error = str(exc)
        row.wall_time = time.perf_counter() - started
        rows.append(row)
    header = f"# matchup schema=1 problem={os.path.basename(problem_path)} tol={stop.kkt_tol} max_iters={stop.max_iters}"
    atomic_write(report_path, "\n".join([header] + [row.line() for row in rows]) + "\n")
    return rows
