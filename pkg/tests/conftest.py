import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from ma_uplink.scenario import ScenarioConfig, reference_scenario

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

_ACCEPTANCE = []


def record_acceptance(number: int, title: str, passed: bool, detail: str = ""):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    _ACCEPTANCE.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def ref_cfg():
    return reference_scenario()


@pytest.fixture
def single_user_cfg():
    return ScenarioConfig(num_users=1, num_antennas=4, aoas=(math.pi / 6,), rate_targets=(1.0,),
                          span=4.5, min_spacing=0.5)


@pytest.fixture
def ref_x0():
    return np.array([0.0, 1.5, 3.0, 4.5])


def feasible_points(cfg, n, seed=0):
    regions = cfg.regions()
    rng = np.random.default_rng(seed)
    return regions.lower + rng.random((n, cfg.num_antennas)) * (regions.upper - regions.lower)
