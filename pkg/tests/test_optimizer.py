import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import feasible_points
from ma_uplink.objective import gradient_closed_form, total_power_objective
from ma_uplink.optimizer import (
    UNIT_ARMIJO,
    LineSearchExhausted,
    OptimizationError,
    OptimizerOptions,
    backtracking_step,
    flop_count_estimate,
    optimize,
    optimize_multistart,
    project,
)
from ma_uplink.scenario import build_feasible_regions, reference_scenario


REGIONS = build_feasible_regions(4.5, 4, 0.5)


def test_project_example():
    np.testing.assert_allclose(project([-1, 1.5, 5, 4.0], REGIONS), [0, 1.5, 3.25, 4.0])


def test_project_identity_inside(ref_x0):
    np.testing.assert_array_equal(project(ref_x0, REGIONS), ref_x0)


@given(arrays(np.float64, 4, elements=st.floats(-20, 20)))
def test_project_idempotent_and_feasible(x):
    p = project(x, REGIONS)
    np.testing.assert_array_equal(project(p, REGIONS), p)
    assert REGIONS.contains(p)
    assert np.min(np.diff(p)) >= 0.5 - 1e-12


@given(arrays(np.float64, 4, elements=st.floats(-20, 20)))
def test_project_is_nearest_point(x):
    # brute force over a grid of each box: clamping minimises each coordinate separately
    p = project(x, REGIONS)
    for i in range(4):
        grid = np.linspace(REGIONS.lower[i], REGIONS.upper[i], 201)
        assert abs(p[i] - x[i]) <= np.min(np.abs(grid - x[i])) + 1e-12


def test_options_validation():
    for bad in ({"rho": 1.0}, {"rho": 0.0}, {"delta0": 0}, {"max_outer": 0}, {"max_inner": 0},
                {"armijo": 0}, {"armijo": 1.5}, {"degenerate_policy": "ignore"}):
        with pytest.raises(ValueError):
            OptimizerOptions(**bad)


# -- line search ---------------------------------------------------------------

def test_line_search_zero_gradient(single_user_cfg, ref_x0):
    f = total_power_objective(ref_x0, single_user_cfg)
    x1, f1, delta, trials = backtracking_step(ref_x0, np.zeros(4), f, OptimizerOptions(),
                                              single_user_cfg, REGIONS)
    np.testing.assert_array_equal(x1, ref_x0)
    assert trials == 1 and delta == 1.0 and f1 == f


@pytest.mark.parametrize("armijo", [1e-4, 1e-3])
def test_line_search_accepts_sufficient_decrease(ref_cfg, ref_x0, armijo):
    opts = OptimizerOptions(delta0=1.0, rho=0.5, armijo=armijo)
    f = total_power_objective(ref_x0, ref_cfg)
    g = gradient_closed_form(ref_x0, ref_cfg)
    x1, f1, delta, trials = backtracking_step(ref_x0, g, f, opts, ref_cfg, REGIONS)
    # recompute both sides independently
    x_chk = np.clip(ref_x0 - delta * g, REGIONS.lower, REGIONS.upper)
    np.testing.assert_array_equal(x1, x_chk)
    assert total_power_objective(x_chk, ref_cfg) == f1
    assert f1 <= f - armijo * delta * float(g @ g)
    assert delta == 0.5 ** (trials - 1)
    if trials > 1:
        # the previous, larger step must have failed the test
        x_prev = np.clip(ref_x0 - 2 * delta * g, REGIONS.lower, REGIONS.upper)
        assert total_power_objective(x_prev, ref_cfg) > f - armijo * 2 * delta * float(g @ g)


def test_line_search_tiny_step(ref_cfg):
    x = REGIONS.midpoints
    opts = OptimizerOptions(delta0=1e-12)
    f = total_power_objective(x, ref_cfg)
    g = gradient_closed_form(x, ref_cfg)
    x1, f1, delta, trials = backtracking_step(x, g, f, opts, ref_cfg, REGIONS)
    assert trials == 1 and delta == 1e-12
    np.testing.assert_allclose(x1, x - 1e-12 * g, rtol=0, atol=1e-14)
    assert f1 <= f - opts.armijo * delta * float(g @ g)


def test_line_search_exhaustion(ref_cfg, ref_x0):
    # at the start point the literal coefficient-1 test rejects every step
    opts = OptimizerOptions(armijo=UNIT_ARMIJO)
    f = total_power_objective(ref_x0, ref_cfg)
    g = gradient_closed_form(ref_x0, ref_cfg)
    with pytest.raises(LineSearchExhausted):
        backtracking_step(ref_x0, g, f, opts, ref_cfg, REGIONS)


# -- full optimizer ------------------------------------------------------------

def test_single_user_converges_immediately(single_user_cfg):
    res = optimize(single_user_cfg)
    assert res.status == "converged"
    assert res.trace.iterations == 1
    assert res.objective == pytest.approx(0.25, rel=1e-14)
    np.testing.assert_array_equal(res.positions, [0, 1.5, 3.0, 4.5])


@pytest.mark.parametrize("span", [2.5, 3.5, 4.5])
def test_reference_config_converges(span):
    cfg = reference_scenario(span=span)
    res = optimize(cfg)
    recs = res.trace.records
    assert res.status == "converged" and not res.trace.line_search_exhausted
    assert len(recs) <= 101
    assert res.objective < recs[0].objective
    np.testing.assert_allclose(recs[0].positions, [0, span / 3, 2 * span / 3, span])
    regions = cfg.regions()
    for a, b in zip(recs, recs[1:]):
        assert b.objective <= a.objective - OptimizerOptions().armijo * b.step * a.grad_norm**2 + 1e-12
        assert regions.contains(b.positions)
        assert np.min(np.diff(b.positions)) >= 0.5 - 1e-12
    assert abs(recs[-1].objective - recs[-2].objective) <= 1e-7


def test_result_powers_meet_targets(ref_cfg):
    from ma_uplink.channel import sinr_zf
    res = optimize(ref_cfg)
    assert res.powers.sum() == pytest.approx(res.objective, rel=1e-9)
    np.testing.assert_allclose(sinr_zf(res.positions, ref_cfg, res.powers), 1.0, rtol=1e-9)


def test_infinite_tau_stops_after_one_step(ref_cfg):
    res = optimize(ref_cfg.with_(span=2.5), OptimizerOptions(tau=math.inf))
    assert res.status == "converged" and len(res.trace) == 2


def test_outer_cap(ref_cfg):
    res = optimize(ref_cfg, OptimizerOptions(max_outer=2, tau=0.0))
    assert res.status == "outer_cap" and res.trace.iterations == 2


def test_literal_coefficient_stalls_at_start(ref_cfg):
    res = optimize(ref_cfg, OptimizerOptions(armijo=UNIT_ARMIJO))
    assert res.status == "converged" and res.trace.line_search_exhausted
    assert res.trace.iterations == 0


def test_deterministic(ref_cfg):
    a = optimize(ref_cfg)
    b = optimize(ref_cfg)
    assert [(r.objective, r.step, r.grad_norm, r.positions.tobytes()) for r in a.trace.records] == \
           [(r.objective, r.step, r.grad_norm, r.positions.tobytes()) for r in b.trace.records]


def test_singular_start_reports_iteration():
    cfg = reference_scenario().with_(aoas=(0.3, math.asin(math.sin(0.3) + 1e-9), 1.0))
    with pytest.raises(OptimizationError) as exc:
        optimize(cfg)
    assert exc.value.iteration == 0


def test_multistart_never_worse(ref_cfg):
    single = optimize(ref_cfg.with_(span=9.0))
    multi = optimize_multistart(ref_cfg.with_(span=9.0), seeds=range(5))
    assert multi.objective <= single.objective


@pytest.mark.parametrize("x0", feasible_points(reference_scenario(), 5, seed=8))
def test_random_starts_descend(x0, ref_cfg):
    res = optimize(ref_cfg, x0=x0)
    assert np.all(np.diff(res.trace.objectives) <= 0)
    assert res.objective <= total_power_objective(x0, ref_cfg)


# -- complexity ----------------------------------------------------------------

def test_flop_examples():
    assert flop_count_estimate(3, 30, 10, 10, "closed_form") == 5970
    assert flop_count_estimate(3, 30, 10, 10, "definition_based") == 11370


@given(n=st.integers(1, 64), to=st.integers(1, 50), ti=st.integers(1, 50))
def test_flop_single_user_equal(n, to, ti):
    assert flop_count_estimate(1, n, to, ti, "closed_form") == flop_count_estimate(1, n, to, ti, "definition_based")


@given(m=st.integers(2, 40), n=st.integers(1, 64), to=st.integers(1, 50), ti=st.integers(1, 50))
def test_flop_closed_form_cheaper(m, n, to, ti):
    assert flop_count_estimate(m, n, to, ti, "closed_form") < flop_count_estimate(m, n, to, ti, "definition_based")


def test_flop_bad_input():
    with pytest.raises(ValueError):
        flop_count_estimate(0, 30, 10, 10)
    with pytest.raises(ValueError):
        flop_count_estimate(3, 30, 10, 10, "autodiff")
