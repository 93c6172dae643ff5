from __future__ import annotations

import numpy as np
import pytest

from balm.errors import ConfigInvalid, DimensionMismatch, InnerNoConvergence, UnsupportedCombination
from balm.linalg import cholesky_factor
from balm.multiplier import build_h0, build_h2, build_hp
from balm.problems import Block, PrimalDualPoint, Problem, SeparableProblem, Sense, default_start, flatten_blocks, kkt_residual
from balm.prox import Box, L1, NonnegativeOrthant, Quadratic, WholeSpace, Zero
from balm.solvers import (
    AltSplitConfig,
    BalancedAlmConfig,
    BaselineConfig,
    Method,
    RunHistory,
    SplitConfig,
    StopRule,
    admm_step,
    alt_split_metric,
    alt_split_step,
    balanced_alm_step,
    balanced_metric,
    classic_alm_step,
    generalized_step,
    ladmm_step,
    lalm_step,
    primal_dual_step,
    run,
    split_balanced_step,
    split_metric,
)

import support


def _scalar_two_block(theta2=None):
    """Two scalar blocks sharing x1 + x2 = 1."""
    t2 = Quadratic(np.eye(1), np.zeros(1)) if theta2 is None else theta2
    return SeparableProblem(
        (
            Block(Quadratic(np.eye(1), np.zeros(1)), WholeSpace(), np.eye(1)),
            Block(t2, WholeSpace(), np.eye(1)),
        ),
        np.ones(1),
        Sense.EQUALITY,
    )


# ---------------------------------------------------------------------------
# configs


def test_balanced_config_validation():
    BalancedAlmConfig(1.0, 0.1, 1.9)
    for bad in [dict(r=0.0, delta=0.1), dict(r=1.0, delta=0.0)]:
        with pytest.raises(ConfigInvalid):
            BalancedAlmConfig(**bad)
    for alpha in [0.0, 2.0, -0.5]:
        with pytest.raises(ConfigInvalid):
            BalancedAlmConfig(1.0, 0.1, alpha)


def test_split_config_validation():
    SplitConfig((1.0, 2.0), 0.1)
    with pytest.raises(ConfigInvalid):
        SplitConfig((), 0.1)
    with pytest.raises(ConfigInvalid):
        SplitConfig((1.0, -1.0), 0.1)
    with pytest.raises(ConfigInvalid):
        SplitConfig((1.0,), 0.0)


def test_alt_split_config_validation():
    AltSplitConfig(1.0, 1.0, 0.1)
    with pytest.raises(ConfigInvalid):
        AltSplitConfig(1.0, 0.0, 0.1)


def test_baseline_config_validation():
    BaselineConfig(Method.CLASSIC_ALM, 1.0)
    with pytest.raises(ConfigInvalid):
        BaselineConfig("classic-alm", 1.0)
    with pytest.raises(ConfigInvalid):
        BaselineConfig(Method.CLASSIC_ALM, 0.0)
    with pytest.raises(ConfigInvalid):
        BaselineConfig(Method.CLASSIC_ALM, 1.0, inner_tol=0.0)
    with pytest.raises(ConfigInvalid):
        BaselineConfig(Method.CLASSIC_ALM, 1.0, inner_max_iters=0)


def test_stop_rule_validation():
    StopRule(1, 1e-8)
    with pytest.raises(ConfigInvalid):
        StopRule(0, 1e-8)
    with pytest.raises(ConfigInvalid):
        StopRule(10, 0.0)


def test_method_names():
    assert {m.value for m in Method} == {"classic-alm", "lalm", "primal-dual", "admm", "ladmm"}


# ---------------------------------------------------------------------------
# metric matrices


def test_balanced_metric_worked():
    h = balanced_metric(np.eye(1), 1.0, 1.0)
    assert np.allclose(h, [[1.0, 1.0], [1.0, 2.0]], atol=1e-15)


def test_split_metric_single_block_matches_balanced():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 4))
    one = balanced_metric(a, 1.3, 0.2)
    other = split_metric([a], (1.3,), 0.2)
    assert np.array_equal(one, other)


def test_split_metric_two_block_layout():
    a1, a2 = np.array([[1.0, 0.0]]), np.array([[2.0]])
    h = split_metric([a1, a2], (2.0, 3.0), 0.5)
    expect = np.array(
        [
            [2.0, 0.0, 0.0, 1.0],
            [0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 2.0],
            [1.0, 0.0, 2.0, 0.5 + 4.0 / 3.0 + 0.5],
        ]
    )
    assert np.allclose(h, expect, atol=1e-14)


def test_alt_split_metric_worked():
    h = alt_split_metric(np.eye(1), np.eye(1), 1.0, 1.0, 1.0)
    expect = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 3.0]])
    assert np.allclose(h, expect, atol=1e-15)


def test_metrics_positive_definite_random():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m = int(rng.integers(1, 4))
        n1, n2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        a1 = rng.standard_normal((m, n1))
        a2 = rng.standard_normal((m, n2))
        r, s, delta = 0.5 + rng.random(), 0.5 + rng.random(), 0.01 + 0.2 * rng.random()
        cholesky_factor(balanced_metric(np.hstack([a1, a2]), r, delta))
        cholesky_factor(split_metric([a1, a2], (r, s), delta))
        cholesky_factor(alt_split_metric(a1, a2, r, s, delta))


# ---------------------------------------------------------------------------
# balanced family steps


def test_balanced_step_scalar_trajectory():
    prob = support.scalar_problem()
    cfg = BalancedAlmConfig(1.0, 1.0)
    sys = build_h0(prob.a, cfg.r, cfg.delta)
    w0 = PrimalDualPoint(np.zeros(1), np.zeros(1))
    w1 = balanced_alm_step(prob, cfg, sys, w0)
    assert w1.x[0] == pytest.approx(0.0, abs=1e-12)
    assert w1.lam[0] == pytest.approx(0.5, abs=1e-12)
    w2 = balanced_alm_step(prob, cfg, sys, w1)
    assert w2.x[0] == pytest.approx(0.25, abs=1e-12)
    assert w2.lam[0] == pytest.approx(0.75, abs=1e-12)


def test_balanced_step_fixed_point_at_saddle():
    rng = np.random.default_rng(10)
    prob, star = support.random_eq_qp(rng, 5, 3)
    cfg = BalancedAlmConfig(2.0, 0.3)
    sys = build_h0(prob.a, cfg.r, cfg.delta)
    w1 = balanced_alm_step(prob, cfg, sys, star)
    assert np.linalg.norm(w1.as_array() - star.as_array()) <= 1e-9


def test_generalized_alpha_one_is_predictor_object():
    prob = support.scalar_problem()
    cfg = BalancedAlmConfig(1.0, 1.0, alpha=1.0)
    sys = build_h0(prob.a, cfg.r, cfg.delta)
    w0 = PrimalDualPoint(np.zeros(1), np.zeros(1))
    pred = balanced_alm_step(prob, cfg, sys, w0)
    out = generalized_step(prob, cfg, sys, w0)
    assert np.array_equal(out.as_array(), pred.as_array())


def test_generalized_alpha_half_worked():
    prob = support.scalar_problem()
    cfg = BalancedAlmConfig(1.0, 1.0, alpha=0.5)
    sys = build_h0(prob.a, cfg.r, cfg.delta)
    out = generalized_step(prob, cfg, sys, PrimalDualPoint(np.zeros(1), np.zeros(1)))
    # half way from (0, 0) to the predictor (0, 0.5)
    assert out.x[0] == pytest.approx(0.0, abs=1e-12)
    assert out.lam[0] == pytest.approx(0.25, abs=1e-12)


def test_split_step_scalar_worked():
    prob = _scalar_two_block()
    cfg = SplitConfig((1.0, 1.0), 1.0)
    sys = build_hp([(blk.a, r) for blk, r in zip(prob.blocks, cfg.r_list)], cfg.delta)
    w1 = split_balanced_step(prob, cfg, sys, PrimalDualPoint(np.zeros(2), np.zeros(1)))
    assert np.allclose(w1.x, [0.0, 0.0], atol=1e-12)
    assert w1.lam[0] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_split_step_rejects_weight_mismatch():
    prob = _scalar_two_block()
    cfg = SplitConfig((1.0,), 1.0)
    sys = build_hp([(prob.blocks[0].a, 1.0)], 1.0)
    with pytest.raises(ConfigInvalid):
        split_balanced_step(prob, cfg, sys, PrimalDualPoint(np.zeros(2), np.zeros(1)))


def test_alt_split_step_scalar_worked():
    prob = _scalar_two_block(theta2=Zero())
    cfg = AltSplitConfig(1.0, 1.0, 1.0)
    sys = build_h2(prob.blocks[1].a, cfg.r, cfg.s, cfg.delta)
    w1 = alt_split_step(prob, cfg, sys, PrimalDualPoint(np.zeros(2), np.zeros(1)))
    assert np.allclose(w1.x, [0.0, 0.0], atol=1e-12)
    assert w1.lam[0] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_alt_split_rejects_constrained_first_block():
    prob = SeparableProblem(
        (
            Block(Quadratic(np.eye(1), np.zeros(1)), NonnegativeOrthant(), np.eye(1)),
            Block(Zero(), WholeSpace(), np.eye(1)),
        ),
        np.ones(1),
        Sense.EQUALITY,
    )
    cfg = AltSplitConfig(1.0, 1.0, 1.0)
    sys = build_h2(prob.blocks[1].a, 1.0, 1.0, 1.0)
    with pytest.raises(UnsupportedCombination):
        alt_split_step(prob, cfg, sys, PrimalDualPoint(np.zeros(2), np.zeros(1)))


def test_alt_split_rejects_wrong_block_count():
    prob = SeparableProblem((Block(Zero(), WholeSpace(), np.eye(1)),), np.ones(1), Sense.EQUALITY)
    sys = build_h2(np.eye(1), 1.0, 1.0, 1.0)
    with pytest.raises(ConfigInvalid):
        alt_split_step(prob, AltSplitConfig(1.0, 1.0, 1.0), sys, PrimalDualPoint(np.zeros(1), np.zeros(1)))


# ---------------------------------------------------------------------------
# baseline steps


def test_classic_step_zero_objective_exact():
    # min 0 s.t. x = 1: the inner solve lands on x = 1, dual stays 0
    prob = Problem(Zero(), WholeSpace(), np.eye(1), np.ones(1), Sense.EQUALITY)
    w1 = classic_alm_step(prob, BaselineConfig(Method.CLASSIC_ALM, 1.0), PrimalDualPoint(np.zeros(1), np.zeros(1)))
    assert w1.x[0] == pytest.approx(1.0, abs=1e-10)
    assert w1.lam[0] == pytest.approx(0.0, abs=1e-10)


def test_classic_step_quadratic_worked():
    prob = support.scalar_problem()
    w1 = classic_alm_step(prob, BaselineConfig(Method.CLASSIC_ALM, 1.0), PrimalDualPoint(np.zeros(1), np.zeros(1)))
    # inner: min x^2/2 + (1/2)(x - 1)^2 -> x = 1/2; dual ascent -> 1/2
    assert w1.x[0] == pytest.approx(0.5, abs=1e-8)
    assert w1.lam[0] == pytest.approx(0.5, abs=1e-8)


def test_classic_inner_cap_raises():
    prob = Problem(
        Quadratic(np.eye(2), np.zeros(2)),
        WholeSpace(),
        np.diag([1.0, 2.0]),
        np.ones(2),
        Sense.EQUALITY,
    )
    cfg = BaselineConfig(Method.CLASSIC_ALM, 1.0, inner_tol=1e-12, inner_max_iters=1)
    with pytest.raises(InnerNoConvergence):
        classic_alm_step(prob, cfg, PrimalDualPoint(np.zeros(2), np.zeros(2)))


def test_lalm_step_zero_objective_worked():
    prob = Problem(Zero(), WholeSpace(), np.eye(1), np.ones(1), Sense.EQUALITY)
    cfg = BaselineConfig(Method.LALM, 1.0, sigma_or_s=1.1)
    w1 = lalm_step(prob, cfg, PrimalDualPoint(np.zeros(1), np.zeros(1)))
    assert w1.x[0] == pytest.approx(1.0 / 1.1, abs=1e-12)
    assert w1.lam[0] == pytest.approx(1.0 - 1.0 / 1.1, abs=1e-12)


def test_lalm_rejects_small_sigma():
    prob = support.scalar_problem()
    with pytest.raises(ConfigInvalid):
        lalm_step(prob, BaselineConfig(Method.LALM, 1.0, sigma_or_s=0.9), PrimalDualPoint(np.zeros(1), np.zeros(1)))


def test_lalm_sharp_bounds_admits_smaller_sigma():
    prob = support.scalar_problem()
    w = PrimalDualPoint(np.zeros(1), np.zeros(1))
    with pytest.raises(ConfigInvalid):
        lalm_step(prob, BaselineConfig(Method.LALM, 1.0, sigma_or_s=0.8), w)
    lalm_step(prob, BaselineConfig(Method.LALM, 1.0, sigma_or_s=0.8, sharp_bounds=True), w)


def test_primal_dual_step_worked():
    prob = support.scalar_problem()
    cfg = BaselineConfig(Method.PRIMAL_DUAL, 1.0, sigma_or_s=2.0)
    w1 = primal_dual_step(prob, cfg, PrimalDualPoint(np.zeros(1), np.zeros(1)))
    assert w1.x[0] == pytest.approx(0.0, abs=1e-12)
    assert w1.lam[0] == pytest.approx(0.5, abs=1e-12)


def test_primal_dual_rejects_small_product():
    prob = support.scalar_problem()
    cfg = BaselineConfig(Method.PRIMAL_DUAL, 1.0, sigma_or_s=0.9)
    with pytest.raises(ConfigInvalid):
        primal_dual_step(prob, cfg, PrimalDualPoint(np.zeros(1), np.zeros(1)))


def test_admm_step_worked():
    prob = _scalar_two_block()
    w1 = admm_step(prob, BaselineConfig(Method.ADMM, 1.0), PrimalDualPoint(np.zeros(2), np.zeros(1)))
    assert w1.x[0] == pytest.approx(0.5, abs=1e-8)
    assert w1.x[1] == pytest.approx(0.25, abs=1e-8)
    assert w1.lam[0] == pytest.approx(0.25, abs=1e-8)


def test_ladmm_step_worked():
    prob = _scalar_two_block(theta2=Zero())
    cfg = BaselineConfig(Method.LINEARIZED_ADMM, 1.0, sigma_or_s=2.1)
    w1 = ladmm_step(prob, cfg, PrimalDualPoint(np.zeros(2), np.zeros(1)))
    assert w1.x[0] == pytest.approx(0.5, abs=1e-8)
    assert w1.x[1] == pytest.approx(0.5 / 2.1, abs=1e-8)
    assert w1.lam[0] == pytest.approx(0.5 - 0.5 / 2.1, abs=1e-8)


def test_ladmm_rejects_small_s():
    prob = _scalar_two_block(theta2=Zero())
    cfg = BaselineConfig(Method.LINEARIZED_ADMM, 1.0, sigma_or_s=0.5)
    with pytest.raises(ConfigInvalid):
        ladmm_step(prob, cfg, PrimalDualPoint(np.zeros(2), np.zeros(1)))


def test_baselines_reject_inequality():
    prob = Problem(Zero(), WholeSpace(), np.eye(1), np.zeros(1), Sense.INEQUALITY)
    with pytest.raises(ConfigInvalid):
        classic_alm_step(prob, BaselineConfig(Method.CLASSIC_ALM, 1.0), PrimalDualPoint(np.zeros(1), np.zeros(1)))


# ---------------------------------------------------------------------------
# the run driver


def test_run_balanced_converges_to_saddle():
    rng = np.random.default_rng(30)
    prob, star = support.random_eq_qp(rng, 6, 3)
    hist = run(prob, BalancedAlmConfig(1.0, 0.1), StopRule(20_000, 1e-9), reference=star)
    assert hist.converged
    last = hist.iterates[-1]
    assert np.linalg.norm(last.x - star.x) <= 1e-6
    assert hist.h_distances is not None
    diffs = np.diff(hist.h_distances)
    assert np.all(diffs <= 1e-9)


def test_run_starts_at_saddle_stops_immediately():
    rng = np.random.default_rng(31)
    prob, star = support.random_eq_qp(rng, 4, 2)
    hist = run(prob, BalancedAlmConfig(1.0, 0.1), StopRule(100, 1e-7), w0=star)
    assert hist.converged and len(hist) == 1
    assert np.isnan(hist.successive_h_steps[0])


def test_run_respects_max_iters():
    prob = support.scalar_problem()
    hist = run(prob, BalancedAlmConfig(1.0, 1.0), StopRule(3, 1e-16))
    assert not hist.converged
    assert len(hist) == 4


def test_run_relaxed_records_predictors():
    prob = support.scalar_problem()
    hist = run(prob, BalancedAlmConfig(1.0, 1.0, alpha=1.5), StopRule(50, 1e-10))
    assert hist.converged
    assert hist.predictors is not None
    assert len(hist.predictors) == len(hist) - 1
    # the corrector interpolates: w1 = w0 - 1.5 (w0 - pred0)
    w0, w1 = hist.iterates[0], hist.iterates[1]
    pred = hist.predictors[0]
    assert np.allclose(w1.as_array(), w0.as_array() - 1.5 * (w0.as_array() - pred.as_array()), atol=1e-15)


def test_run_unrelaxed_has_no_predictors():
    prob = support.scalar_problem()
    hist = run(prob, BalancedAlmConfig(1.0, 1.0), StopRule(50, 1e-10))
    assert hist.predictors is None


def test_run_alpha_values_all_converge():
    rng = np.random.default_rng(32)
    prob, star = support.random_eq_qp(rng, 4, 2)
    for alpha in (0.5, 1.0, 1.5, 1.9):
        hist = run(prob, BalancedAlmConfig(1.0, 0.2, alpha=alpha), StopRule(50_000, 1e-8))
        assert hist.converged, alpha
        assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-5


def test_run_split_single_block_bitwise_matches_balanced():
    rng = np.random.default_rng(33)
    p = support.random_spd(rng, 4)
    c = rng.standard_normal(4)
    a = rng.standard_normal((2, 4))
    b = rng.standard_normal(2)
    sep = SeparableProblem((Block(Quadratic(p, c), WholeSpace(), a),), b, Sense.EQUALITY)
    flat = Problem(Quadratic(p.copy(), c.copy()), WholeSpace(), a, b, Sense.EQUALITY)
    stop = StopRule(60, 1e-13)
    h_split = run(sep, SplitConfig((1.2,), 0.3), stop)
    h_bal = run(flat, BalancedAlmConfig(1.2, 0.3), stop)
    assert len(h_split) == len(h_bal)
    for ws, wb in zip(h_split.iterates, h_bal.iterates):
        assert np.array_equal(ws.x, wb.x)
        assert np.array_equal(ws.lam, wb.lam)
    assert np.array_equal(h_split.metric, h_bal.metric)
    assert h_split.successive_h_steps[1:] == h_bal.successive_h_steps[1:]


def test_run_balanced_flattens_separable():
    rng = np.random.default_rng(34)
    sep, star = support.two_block_qp(rng, 3, 2, 2)
    hist = run(sep, BalancedAlmConfig(1.0, 0.2), StopRule(30_000, 1e-9))
    assert hist.converged
    assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-6


def test_run_split_two_block_converges():
    rng = np.random.default_rng(35)
    sep, star = support.two_block_qp(rng, 3, 2, 2)
    hist = run(sep, SplitConfig((1.0, 1.5), 0.2), StopRule(40_000, 1e-9))
    assert hist.converged
    assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-6


def test_run_alt_split_two_block_converges():
    rng = np.random.default_rng(36)
    sep, star = support.two_block_qp(rng, 3, 2, 2)
    hist = run(sep, AltSplitConfig(1.0, 1.5, 0.2), StopRule(40_000, 1e-9))
    assert hist.converged
    assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-6


def test_run_inequality_keeps_multiplier_nonnegative():
    rng = np.random.default_rng(37)
    prob, star = support.random_ineq_qp(rng, 5, 3)
    hist = run(prob, BalancedAlmConfig(1.0, 0.2), StopRule(30_000, 1e-9))
    assert hist.converged
    for w in hist.iterates:
        assert w.lam.min() >= -1e-12
    assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-5


def test_run_inequality_constrained_primal_set():
    # min 0.5||x||^2 - x1 s.t. x1 + x2 >= 1, x >= 0
    prob = Problem(
        Quadratic(np.eye(2), np.array([-1.0, 0.0])),
        NonnegativeOrthant(),
        np.array([[1.0, 1.0]]),
        np.ones(1),
        Sense.INEQUALITY,
    )
    hist = run(prob, BalancedAlmConfig(1.0, 0.5), StopRule(20_000, 1e-9))
    assert hist.converged
    x = hist.iterates[-1].x
    assert np.allclose(x, [1.0, 0.0], atol=1e-6)


def test_run_baselines_converge_scalar():
    prob = support.scalar_problem()
    stop = StopRule(5_000, 1e-9)
    for cfg in [
        BaselineConfig(Method.CLASSIC_ALM, 1.0),
        BaselineConfig(Method.LALM, 1.0, sigma_or_s=1.1),
        BaselineConfig(Method.PRIMAL_DUAL, 1.0, sigma_or_s=2.0),
    ]:
        hist = run(prob, cfg, stop)
        assert hist.converged, cfg.method
        assert hist.iterates[-1].x[0] == pytest.approx(1.0, abs=1e-6)
        assert np.array_equal(hist.metric, np.eye(2))


def test_run_two_block_baselines_converge():
    rng = np.random.default_rng(38)
    sep, star = support.two_block_qp(rng, 2, 2, 1)
    stop = StopRule(20_000, 1e-9)
    g2 = sep.block_gram_norms[1]
    for cfg in [
        BaselineConfig(Method.ADMM, 1.0),
        BaselineConfig(Method.LINEARIZED_ADMM, 1.0, sigma_or_s=1.01 * g2),
    ]:
        hist = run(sep, cfg, stop)
        assert hist.converged, cfg.method
        assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-5


def test_run_single_block_baseline_flattens_separable():
    rng = np.random.default_rng(39)
    sep, star = support.two_block_qp(rng, 2, 2, 1)
    hist = run(sep, BaselineConfig(Method.CLASSIC_ALM, 1.0), StopRule(5_000, 1e-9))
    assert hist.converged
    assert np.linalg.norm(hist.iterates[-1].x - star.x) <= 1e-5


def test_run_validates_stepsize_up_front():
    prob = support.scalar_problem()
    stop = StopRule(10, 1e-8)
    with pytest.raises(ConfigInvalid):
        run(prob, BaselineConfig(Method.LALM, 1.0, sigma_or_s=0.5), stop)
    with pytest.raises(ConfigInvalid):
        run(prob, BaselineConfig(Method.PRIMAL_DUAL, 1.0, sigma_or_s=0.5), stop)
    sep = _scalar_two_block()
    with pytest.raises(ConfigInvalid):
        run(sep, BaselineConfig(Method.LINEARIZED_ADMM, 1.0, sigma_or_s=0.5), stop)


def test_run_rejects_mismatched_start():
    prob = support.scalar_problem()
    with pytest.raises(DimensionMismatch):
        run(prob, BalancedAlmConfig(1.0, 1.0), StopRule(10, 1e-8), w0=PrimalDualPoint(np.zeros(2), np.zeros(1)))


def test_run_rejects_start_outside_set():
    prob = Problem(Zero(), Box(np.zeros(1), np.ones(1)), np.eye(1), np.zeros(1), Sense.EQUALITY)
    with pytest.raises(ValueError):
        run(prob, BalancedAlmConfig(1.0, 1.0), StopRule(10, 1e-8), w0=PrimalDualPoint(np.array([2.0]), np.zeros(1)))


def test_run_rejects_negative_inequality_multiplier_start():
    prob = Problem(Zero(), WholeSpace(), np.eye(1), np.zeros(1), Sense.INEQUALITY)
    with pytest.raises(ValueError):
        run(prob, BalancedAlmConfig(1.0, 1.0), StopRule(10, 1e-8), w0=PrimalDualPoint(np.zeros(1), np.array([-1.0])))


def test_run_rejects_split_on_single_block_problem():
    prob = support.scalar_problem()
    with pytest.raises(ConfigInvalid):
        run(prob, SplitConfig((1.0,), 0.1), StopRule(10, 1e-8))


def test_run_rejects_unknown_config():
    with pytest.raises(ConfigInvalid):
        run(support.scalar_problem(), object(), StopRule(10, 1e-8))


def test_run_deterministic_repeat():
    rng = np.random.default_rng(40)
    prob, _ = support.random_eq_qp(rng, 4, 2)
    stop = StopRule(200, 1e-10)
    h1 = run(prob, BalancedAlmConfig(1.0, 0.3), stop)
    h2 = run(prob, BalancedAlmConfig(1.0, 0.3), stop)
    assert len(h1) == len(h2)
    for a, b in zip(h1.iterates, h2.iterates):
        assert np.array_equal(a.as_array(), b.as_array())


def test_run_history_is_runhistory():
    hist = run(support.scalar_problem(), BalancedAlmConfig(1.0, 1.0), StopRule(5, 1e-2))
    assert isinstance(hist, RunHistory)
    assert len(hist.residuals) == len(hist)
    assert len(hist.successive_h_steps) == len(hist)
