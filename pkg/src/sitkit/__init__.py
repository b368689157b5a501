"""Design, power and simulation tools for stacked incrementality tests."""

from .compare import (
    ComparisonReport,
    compare_designs,
    conversion_bound_min_n,
    rpt_difference,
    rpt_mde,
    sit_difference,
    sit_mde,
    special_case_min_n,
)
from .model import (
    Group,
    GroupSummary,
    Increment,
    PopulationSpec,
    ResponseMode,
    SetParameters,
    Sided,
    TestConfig,
    TestResult,
    net_benefit,
    pooled_control_split,
)
from .power import PlanningGroup, min_detectable_effect, min_sample_equal, min_sample_ratio, power
from .welch import p_value, run_test, run_two_arm_test, stacked_difference, welch_statistic

__version__ = "0.1.0"
