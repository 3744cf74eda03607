"""Movable-antenna position optimization for multiuser zero-forcing uplink."""

from .scenario import (
    FeasibleRegions,
    ScenarioConfig,
    build_feasible_regions,
    check_scenario,
    initial_positions,
    load_scenario,
    reference_scenario,
    validate_scenario,
)
from .channel import (
    channel_matrix,
    eigendecompose_gain,
    gain_matrix,
    gain_matrix_partial,
    min_powers,
    simulate_uplink_sinr,
    sinr_general,
    sinr_zf,
    steering_vector,
    zf_combiner,
)
from .objective import (
    gradient_closed_form,
    gradient_finite_difference,
    gradient_trace_form,
    total_power_objective,
)
from .optimizer import OptimizerOptions, flop_count_estimate, optimize, project
from .baselines import fpa_positions, rpa_average_power

__version__ = "0.1.0"
