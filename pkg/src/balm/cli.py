"""Command line front end: generate instances, solve, compare, certify.

Exit codes: 0 success, 1 non-convergence or a failed certificate,
2 invalid configuration, 3 I/O or file-format trouble.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench
from .diagnostics import contraction_ledger, vi_gap
from .errors import BalmError, ConfigInvalid, NoConvergence, SchemaError
from .problems import PrimalDualPoint, total_objective
from .solvers import StopRule, run

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 1
EXIT_BAD_CONFIG = 2
EXIT_BAD_IO = 3


def _add_shared_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=float, default=1.0, help="primal prox weight")
    p.add_argument("--delta", type=float, default=0.01, help="dual metric shift")
    p.add_argument("--alpha", type=float, default=1.0, help="relaxation factor in (0, 2)")
    p.add_argument("--s", type=float, default=None, help="dual/second-block stepsize")
    p.add_argument("--sigma", type=float, default=None, help="linearization weight for lalm")
    p.add_argument("--r-list", default=None, help="comma-separated per-block prox weights")
    p.add_argument("--sharp-bounds", action="store_true", help="use the 0.75 stepsize bounds")
    p.add_argument("--inner-tol", type=float, default=1e-10)
    p.add_argument("--inner-max-iters", type=int, default=50_000)
    p.add_argument("--tol", type=float, default=1e-8, help="KKT stopping tolerance")
    p.add_argument("--max-iters", type=int, default=100_000)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="balm")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance to a problem file")
    g.add_argument("--kind", choices=bench.GENERATOR_KINDS, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sparsity", type=int, default=None)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run one method on a problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--method", choices=bench.METHOD_NAMES, required=True)
    s.add_argument("--history", default=None, help="write the iteration table here")
    _add_shared_solver_flags(s)

    m = sub.add_parser("matchup", help="run several methods and write a report")
    m.add_argument("--problem", required=True)
    m.add_argument("--methods", required=True, help="comma-separated method names")
    m.add_argument("--report", required=True)
    _add_shared_solver_flags(m)

    c = sub.add_parser("certify", help="replay a history table against the certificates")
    c.add_argument("--problem", required=True)
    c.add_argument("--history", required=True)
    c.add_argument("--check", required=True, help="comma subset of contraction,gap")
    c.add_argument("--reference", default=None, help="JSON file with x and lambda arrays")
    c.add_argument("--t", type=int, default=None, help="ergodic index for the gap check")
    c.add_argument("--probes", type=int, default=500)
    c.add_argument("--seed", type=int, default=0)
    return parser


def _flags(args) -> dict:
    r_list = None
    if args.r_list:
        r_list = tuple(float(tok) for tok in args.r_list.split(","))
    return dict(
        r=args.r,
        delta=args.delta,
        alpha=args.alpha,
        s=args.s,
        sigma=args.sigma,
        r_list=r_list,
        sharp_bounds=args.sharp_bounds,
        inner_tol=args.inner_tol,
        inner_max_iters=args.inner_max_iters,
    )


def _cmd_generate(args) -> int:
    prob, reference = bench.generate_instance(args.kind, (args.m, args.n), args.seed, args.sparsity)
    bench.write_problem(args.out, prob, reference)
    print(f"wrote {args.kind} instance (m={args.m}, n={args.n}, seed={args.seed}) to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    prob, reference = bench.read_problem(args.problem)
    cfg = bench.build_config(args.method, prob, **_flags(args))
    stop = StopRule(max_iters=args.max_iters, kkt_tol=args.tol)
    history = run(prob, cfg, stop, reference=reference)
    if args.history:
        bench.write_history(args.history, history, args.method, bench.config_params(args.method, cfg))
    final = history.residuals[-1]
    status = "converged" if history.converged else "max-iters"
    print(
        f"method={args.method} status={status} iterations={len(history.iterates) - 1}"
        f" primal={final.primal:.6e} dual={final.dual:.6e}"
        f" complementarity={final.complementarity:.6e}"
        f" objective={total_objective(prob, history.iterates[-1].x):.12e}"
    )
    return EXIT_OK if history.converged else EXIT_NO_CONVERGENCE


def _cmd_matchup(args) -> int:
    methods = [tok for tok in args.methods.split(",") if tok]
    stop = StopRule(max_iters=args.max_iters, kkt_tol=args.tol)
    rows = bench.run_matchup(args.problem, methods, stop, args.report, **_flags(args))
    for row in rows:
        print(row.line())
    print(f"report written to {args.report}")
    return EXIT_OK


def _load_reference(args, embedded):
    if args.reference:
        import json

        with open(args.reference) as fh:
            doc = json.load(fh)
        return PrimalDualPoint(np.array(doc["x"], dtype=float), np.array(doc["lambda"], dtype=float))
    return embedded


def _cmd_certify(args) -> int:
    checks = [tok for tok in args.check.split(",") if tok]
    unknown = set(checks) - {"contraction", "gap"}
    if unknown:
        raise ConfigInvalid(f"unknown checks: {sorted(unknown)}")
    prob, embedded = bench.read_problem(args.problem)
    meta, cols = bench.read_history_table(args.history)
    history = bench.history_from_table(prob, meta, cols)
    all_ok = True
    if "contraction" in checks:
        reference = _load_reference(args, embedded)
        alpha = meta["params"].get("alpha", 1.0)
        certs = contraction_ledger(history, history.metric, reference, alpha=alpha)
        min_slack = min((c.slack for c in certs), default=float("inf"))
        ok = all(c.passes for c in certs)
        all_ok &= ok
        print(f"contraction: {'PASS' if ok else 'FAIL'} (iterations={len(certs)}, min slack={min_slack:.3e})")
    if "gap" in checks:
        t = args.t if args.t is not None else len(history.iterates) - 2
        cert = vi_gap(prob, history, t, args.probes, args.seed)
        all_ok &= cert.passes
        print(
            f"gap: {'PASS' if cert.passes else 'FAIL'} (t={cert.t}, probes={len(cert.probe_points)},"
            f" max_lhs={cert.max_lhs:.6e}, bound={cert.bound:.6e})"
        )
    return EXIT_OK if all_ok else EXIT_NO_CONVERGENCE


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "matchup": _cmd_matchup,
        "certify": _cmd_certify,
    }
    try:
        return handlers[args.command](args)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_IO
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ConfigInvalid, BalmError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
