import numpy as np
import pytest

from ma_uplink.baselines import fpa_positions, fpa_power, rpa_average_power
from ma_uplink.objective import total_power_objective
from ma_uplink.optimizer import optimize
from ma_uplink.scenario import ScenarioConfig, reference_scenario


def test_fpa_positions(ref_cfg):
    np.testing.assert_array_equal(fpa_positions(ref_cfg), [0, 0.5, 1.0, 1.5])
    one = ScenarioConfig(1, 1, (0.3,), (1.0,), 1.0, 0.5)
    np.testing.assert_array_equal(fpa_positions(one), [0.0])


def test_fpa_power_is_objective(ref_cfg):
    assert fpa_power(ref_cfg) == total_power_objective([0, 0.5, 1.0, 1.5], ref_cfg)


def test_fpa_independent_of_span():
    assert fpa_power(reference_scenario(span=2.5)) == fpa_power(reference_scenario(span=9.0))


def test_single_draw_equals_objective(ref_cfg):
    est = rpa_average_power(ref_cfg, num_draws=1, seed=3)
    regions = ref_cfg.regions()
    rng = np.random.default_rng([3, 0])
    x = regions.lower + rng.random(4) * (regions.upper - regions.lower)
    assert est.mean_power == total_power_objective(x, ref_cfg)
    assert est.std_error == 0.0 and est.num_draws == 1


def test_rpa_deterministic(ref_cfg):
    assert rpa_average_power(ref_cfg, 500, seed=1) == rpa_average_power(ref_cfg, 500, seed=1)


def test_rpa_seeds_agree_statistically(ref_cfg):
    a = rpa_average_power(ref_cfg, 2000, seed=1)
    b = rpa_average_power(ref_cfg, 2000, seed=2)
    assert a.mean_power != b.mean_power
    assert abs(a.mean_power - b.mean_power) <= 3 * np.hypot(a.std_error, b.std_error)


def test_rpa_lower_bound(ref_cfg):
    # every draw is at least sum(eps*sigma^2)/N, so the mean is too
    est = rpa_average_power(ref_cfg, 1000, seed=0)
    assert est.mean_power >= ref_cfg.omega.sum() / ref_cfg.num_antennas


def test_rpa_rejects_bad_count(ref_cfg):
    with pytest.raises(ValueError):
        rpa_average_power(ref_cfg, 0)


@pytest.mark.parametrize("span", [2.5, 4.5, 6.0])
def test_optimizer_dominates_benchmarks(span):
    cfg = reference_scenario(span=span)
    res = optimize(cfg)
    assert res.objective <= fpa_power(cfg)
    assert res.objective <= rpa_average_power(cfg, 2000).mean_power
