import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sitkit.model import TestConfig
from sitkit.numerics import normal_quantile
from sitkit.power import (
    PlanningGroup,
    min_detectable_effect,
    min_sample_equal,
    min_sample_ratio,
    power,
    welch_df,
)

CONFIG = TestConfig(0.05, 0.8)
Z_GAP = normal_quantile(0.95) - normal_quantile(0.2)


def plan(n=1000, variance=0.25, k=4):
    return [PlanningGroup(f"g{i}", variance, n=n) for i in range(k)]


def test_power_reference_plan():
    assert power(0.05, CONFIG, plan()) == pytest.approx(0.4744, abs=5e-4)


def test_power_matches_monte_carlo_oracle():
    # Simulate the sample means and variances of four normal groups directly.
    rng = np.random.default_rng(2024)
    reps, n, var, theta = 100_000, 1000, 0.25, 0.05
    means = rng.normal(0.0, math.sqrt(var / n), size=(reps, 4))
    means[:, 2] += theta
    s2 = var * rng.chisquare(n - 1, size=(reps, 4)) / (n - 1)
    signs = np.array([-1.0, 1.0, 1.0, -1.0])
    se2 = (s2 / n).sum(axis=1)
    t = (means * signs).sum(axis=1) / np.sqrt(se2)
    nu = se2**2 / ((s2 / n) ** 2 / (n - 1)).sum(axis=1)
    from scipy import stats

    rate = np.mean(t > stats.t.ppf(0.95, nu))
    assert power(theta, CONFIG, plan()) == pytest.approx(rate, abs=0.01)


def test_power_limits():
    groups = plan()
    se = math.sqrt(sum(g.variance / g.n for g in groups))
    assert power(1e-12, CONFIG, groups) == pytest.approx(0.05, abs=1e-9)
    assert power(100 * se, CONFIG, groups) >= 0.9999
    with pytest.raises(ValueError):
        power(0.0, CONFIG, groups)


def test_power_two_sided_uses_half_alpha():
    two = TestConfig(0.05, 0.8, "two_sided")
    one_at_half = TestConfig(0.025, 0.8)
    assert power(0.05, two, plan()) == pytest.approx(power(0.05, one_at_half, plan()), abs=1e-15)


def test_weights_scale_variance():
    plain = [PlanningGroup("a", 1.0, n=50), PlanningGroup("b", 1.0, n=50)]
    weighted = [PlanningGroup("a", 0.25, n=50, weight=2.0), PlanningGroup("b", 1.0, n=50)]
    assert power(0.3, CONFIG, plain) == pytest.approx(power(0.3, CONFIG, weighted))


def test_mde_reference_plan():
    mde = min_detectable_effect(CONFIG, plan())
    assert mde == pytest.approx(Z_GAP * math.sqrt(0.001), rel=2e-3)
    assert mde == pytest.approx(0.0786, abs=1e-4)
    assert power(mde, CONFIG, plan()) == pytest.approx(0.8, abs=1e-9)
    assert min_detectable_effect(CONFIG, plan(variance=0.0)) == 0.0


def test_min_sample_equal_reference():
    n = min_sample_equal(0.1, CONFIG, [0.25] * 4)
    assert 618 <= n <= 621
    assert n == 619
    assert power(0.1, CONFIG, plan(n)) >= 0.8 > power(0.1, CONFIG, plan(n - 1))


def test_min_sample_equal_scales_quadratically():
    n1 = min_sample_equal(0.1, CONFIG, [0.25] * 4)
    n2 = min_sample_equal(0.05, CONFIG, [0.25] * 4)
    assert n2 / n1 == pytest.approx(4.0, rel=0.01)


def test_min_sample_equal_degenerate():
    assert min_sample_equal(0.1, CONFIG, [0.0]) == 2
    with pytest.raises(ValueError):
        min_sample_equal(0.0, CONFIG, [1.0])


@settings(max_examples=30, deadline=None)
@given(
    theta=st.floats(0.01, 2.0),
    variances=st.lists(st.floats(0.01, 5.0), min_size=2, max_size=5),
)
def test_min_sample_equal_is_minimal(theta, variances):
    n = min_sample_equal(theta, CONFIG, variances)
    at = lambda m: [PlanningGroup(str(i), v, n=m) for i, v in enumerate(variances)]
    assert power(theta, CONFIG, at(n)) >= CONFIG.pi_min
    if n > 2:
        assert power(theta, CONFIG, at(n - 1)) < CONFIG.pi_min


def test_min_sample_ratio_three_to_one():
    n_c, n_e = min_sample_ratio(0.1, CONFIG, [0.25, 0.25], [0.25, 0.25], 1.0, 3.0)
    normal_approx = (Z_GAP / 0.1) ** 2 * (0.5 + 0.5 / 3.0)
    assert n_c == pytest.approx(normal_approx, abs=3)
    assert n_e == math.ceil(3 * n_c)
    groups = [PlanningGroup("c", 0.25, n=n_c)] * 2 + [PlanningGroup("e", 0.25, n=n_e)] * 2
    assert power(0.1, CONFIG, groups) >= 0.8


def test_min_sample_ratio_one_to_one_matches_equal():
    assert min_sample_ratio(0.1, CONFIG, [0.25] * 2, [0.25] * 2, 1, 1) == (619, 619)


def test_min_sample_ratio_four_shifts_load_to_exposed():
    equal = min_sample_equal(0.1, CONFIG, [0.25] * 4)
    n_c, n_e = min_sample_ratio(0.1, CONFIG, [0.25] * 2, [0.25] * 2, 1, 4)
    assert n_c < equal < n_e
    assert 2 * (n_c + n_e) > 4 * equal


def test_welch_df_equal_groups():
    assert welch_df([1.0] * 4, [100] * 4) == pytest.approx(396.0)
    assert math.isinf(welch_df([0.0, 0.0], [10, 10]))


def test_planning_group_validation():
    with pytest.raises(ValueError):
        PlanningGroup("x", -1.0, n=10)
    with pytest.raises(ValueError):
        PlanningGroup("x", 1.0, n=1)


@settings(max_examples=100, deadline=None)
@given(
    theta=st.floats(0.01, 1.0),
    n=st.integers(5, 5000),
    variance=st.floats(0.05, 5.0),
    factor=st.floats(1.05, 3.0),
)
def test_power_monotonicity(theta, n, variance, factor):
    base = power(theta, CONFIG, plan(n, variance))
    if 1e-12 < base < 1.0 - 1e-12:
        assert power(theta * factor, CONFIG, plan(n, variance)) > base
        assert power(theta, CONFIG, plan(math.ceil(n * factor), variance)) > base
        assert power(theta, CONFIG, plan(n, variance * factor)) < base


@settings(max_examples=50, deadline=None)
@given(
    theta=st.floats(0.05, 1.0),
    variances=st.lists(st.floats(0.05, 3.0), min_size=2, max_size=4),
    weights=st.lists(st.floats(0.2, 3.0), min_size=4, max_size=4),
)
def test_weights_match_scaled_variances(theta, variances, weights):
    weights = weights[: len(variances)]
    scaled = [w * w * v for v, w in zip(variances, weights)]
    assert min_sample_equal(theta, CONFIG, variances, weights) == min_sample_equal(theta, CONFIG, scaled)
    n = 200
    weighted = [PlanningGroup(str(i), v, n=n, weight=w) for i, (v, w) in enumerate(zip(variances, weights))]
    plain = [PlanningGroup(str(i), v, n=n) for i, v in enumerate(scaled)]
    assert power(theta, CONFIG, weighted) == pytest.approx(power(theta, CONFIG, plain), rel=1e-12)
