import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SCENARIOS
from ma_uplink.scenario import (
    InfeasibleGeometryError,
    InvalidScenarioError,
    ScenarioConfig,
    build_feasible_regions,
    check_scenario,
    initial_positions,
    load_scenario,
    reference_scenario,
    parse_angle,
    rate_epsilons,
    scenario_from_mapping,
    validate_scenario,
)


def test_regions_reference_geometry():
    r = build_feasible_regions(4.5, 4, 0.5)
    np.testing.assert_allclose(r.lower, [0, 1.25, 2.5, 3.75], atol=1e-15)
    np.testing.assert_allclose(r.upper, [0.75, 2.0, 3.25, 4.5], atol=1e-15)


def test_regions_single_antenna():
    r = build_feasible_regions(1.0, 1, 0.5)
    assert r.lower.tolist() == [0.0]
    assert r.upper.tolist() == [1.0]


def test_regions_infeasible():
    with pytest.raises(InfeasibleGeometryError):
        build_feasible_regions(1.0, 3, 0.5)


@given(
    n=st.integers(1, 12),
    d=st.floats(0.0, 2.0),
    extra=st.floats(1e-3, 10.0),
    data=st.data(),
)
def test_regions_invariants(n, d, extra, data):
    L = (n - 1) * d + extra
    r = build_feasible_regions(L, n, d)
    assert r.lower[0] == 0.0 and r.upper[-1] == L
    widths = r.upper - r.lower
    np.testing.assert_allclose(widths, (L - (n - 1) * d) / n, rtol=1e-12, atol=1e-12)
    assert np.all(r.lower < r.upper)
    assert np.all(r.upper[:-1] <= r.lower[1:])
    u = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    x = r.lower + u * widths
    if n > 1:
        assert np.min(np.diff(x)) >= d - 1e-12 * max(1.0, L)


def test_reference_config_valid():
    cfg = reference_scenario()
    assert validate_scenario(cfg) == []
    np.testing.assert_array_equal(cfg.epsilons, [1.0, 1.0, 1.0])


def test_rate_epsilons_exact():
    np.testing.assert_array_equal(rate_epsilons([1, 2, 0.5]), [1.0, 3.0, 2**0.5 - 1])


def test_duplicate_sines_reported():
    # π - π/6 folded back into (-π/2, π/2] is π/6 again
    cfg = reference_scenario().with_(aoas=(math.pi / 6, math.pi - 5 * math.pi / 6, math.pi / 2))
    errors = validate_scenario(cfg)
    assert any("duplicate sin θ" in e for e in errors)


def test_fewer_antennas_than_users():
    errors = validate_scenario(reference_scenario().with_(num_antennas=2, span=4.5))
    assert any("N < M" in e for e in errors)


def test_validation_collects_everything():
    cfg = ScenarioConfig(num_users=3, num_antennas=2, aoas=(0.1, 0.1, 2.0),
                         rate_targets=(1, -1, 1), span=0.4, min_spacing=0.5,
                         noise_power=-1.0)
    errors = validate_scenario(cfg)
    joined = " | ".join(errors)
    for needle in ("N < M", "duplicate sin θ", "noise_power", "rate_targets",
                   "geometry infeasible", "aoas must lie"):
        assert needle in joined
    with pytest.raises(InvalidScenarioError) as exc:
        check_scenario(cfg)
    assert exc.value.errors == errors


@given(
    m=st.integers(-2, 4), n=st.integers(-2, 6),
    span=st.floats(allow_nan=True, allow_infinity=True),
    dmin=st.floats(allow_nan=True, allow_infinity=True),
    aoas=st.lists(st.floats(allow_nan=True, allow_infinity=True), max_size=4),
    rates=st.lists(st.floats(allow_nan=True), max_size=4),
)
def test_validate_is_total(m, n, span, dmin, aoas, rates):
    cfg = ScenarioConfig(m, n, tuple(aoas), tuple(rates), span, dmin)
    assert isinstance(validate_scenario(cfg), list)


def test_initial_positions_examples():
    r = build_feasible_regions(4.5, 4, 0.5)
    np.testing.assert_allclose(initial_positions(r, "endpoints_uniform"), [0, 1.5, 3.0, 4.5])
    np.testing.assert_allclose(initial_positions(r, "midpoint"), [0.375, 1.625, 2.875, 4.125])
    np.testing.assert_allclose(
        initial_positions(build_feasible_regions(1.0, 1, 0.5), "midpoint"), [0.5])


def test_endpoints_uniform_clamps_into_boxes():
    r = build_feasible_regions(3.0, 5, 0.6)  # boxes of width 0.12
    x = initial_positions(r, "endpoints_uniform")
    assert r.contains(x)
    assert np.all(np.diff(x) >= 0.6 - 1e-12)


def test_seeded_random_is_deterministic():
    r = build_feasible_regions(4.5, 4, 0.5)
    a = initial_positions(r, "seeded_random", seed=7)
    b = initial_positions(r, "seeded_random", seed=7)
    np.testing.assert_array_equal(a, b)
    assert r.contains(a)
    with pytest.raises(ValueError):
        initial_positions(r, "seeded_random")
    with pytest.raises(ValueError):
        initial_positions(r, "nonsense")


@pytest.mark.parametrize("text, value", [
    ("pi/16", math.pi / 16), ("pi", math.pi), ("-pi/4", -math.pi / 4),
    ("3*pi/8", 3 * math.pi / 8), ("2pi/5", 2 * math.pi / 5), (0.25, 0.25), ("0.5", 0.5),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, rel=1e-15)


def test_parse_angle_rejects_garbage():
    with pytest.raises(ValueError):
        parse_angle("pie/2")


def test_load_reference_file(tmp_path):
    cfg = load_scenario(SCENARIOS / "reference.yaml")
    assert cfg == reference_scenario()


def test_scalar_rate_broadcast():
    cfg = scenario_from_mapping({"num_users": 2, "num_antennas": 3, "aoas": [0, "pi/4"],
                                 "rate_targets": 2, "span": 3, "min_spacing": 0.5})
    assert cfg.rate_targets == (2.0, 2.0)
    assert cfg.wavelength == 1.0 and cfg.noise_power == 1.0


def test_malformed_documents(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("num_users: [3\n")
    with pytest.raises(ValueError):
        load_scenario(bad)
    bad.write_text("num_users: 3\nfoo: 1\n")
    with pytest.raises(ValueError, match="unknown"):
        load_scenario(bad)
    bad.write_text("num_users: 3\n")
    with pytest.raises(ValueError, match="missing"):
        load_scenario(bad)
