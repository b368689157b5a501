import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from sitkit.model import Group, GroupSummary, Sided, TestConfig
from sitkit.numerics import t_pdf, t_quantile
from sitkit.welch import p_value, run_test, run_two_arm_test, stacked_difference, welch_interval, welch_statistic


def four(means, n=100, variance=1.0):
    return [GroupSummary(g, n, m, variance) for g, m in zip((Group.E1, Group.C1, Group.E2, Group.C2), means)]


@pytest.mark.parametrize(
    "means,expected",
    [((0.12, 0.10, 0.15, 0.11), 0.02), ((0.1, 0.1, 0.1, 0.1), 0.0), ((0.10, 0.12, 0.11, 0.15), -0.02)],
)
def test_stacked_difference(means, expected):
    assert stacked_difference(*four(means)) == pytest.approx(expected, abs=1e-15)


def test_stacked_difference_checks_roles():
    e1, c1, e2, c2 = four((0, 0, 0, 0))
    with pytest.raises(ValueError):
        stacked_difference(c1, e1, e2, c2)


def test_welch_statistic_symmetric_four_groups():
    t, nu = welch_statistic(four((0.5, 0.5, 0.5, 0.5)))
    assert t == 0.0
    assert nu == pytest.approx(396.0)


def test_welch_statistic_two_groups():
    groups = [GroupSummary(Group.A2, 10, 1.0, 1.0, weight=1.0), GroupSummary(Group.A1, 10, 0.0, 1.0, weight=-1.0)]
    t, nu = welch_statistic(groups)
    assert t == pytest.approx(1.0 / math.sqrt(0.2))
    assert nu == pytest.approx(18.0)


@settings(max_examples=100)
@given(
    ns=st.lists(st.integers(2, 10_000), min_size=4, max_size=4),
    variances=st.lists(st.floats(0.01, 100.0), min_size=4, max_size=4),
    means=st.lists(st.floats(-10.0, 10.0), min_size=4, max_size=4),
)
def test_welch_statistic_matches_brute_force(ns, variances, means):
    groups = [GroupSummary(g, n, m, v) for g, n, m, v in zip((Group.E1, Group.C1, Group.E2, Group.C2), ns, means, variances)]
    t, nu = welch_statistic(groups)
    signs = (-1, 1, 1, -1)
    psi = [v / n for v, n in zip(variances, ns)]
    se2 = sum(psi)
    assert t == pytest.approx(sum(s * m for s, m in zip(signs, means)) / math.sqrt(se2), rel=1e-9, abs=1e-12)
    assert nu == pytest.approx(se2**2 / sum(p * p / (n - 1) for p, n in zip(psi, ns)), rel=1e-12)


def test_welch_statistic_zero_variance():
    with pytest.raises(ZeroDivisionError):
        welch_statistic(four((1, 0, 0, 0), variance=0.0))


def test_p_value_examples():
    assert p_value(0.0, 17.3) == pytest.approx(0.5)
    assert p_value(t_quantile(0.95, 42.0), 42.0) == pytest.approx(0.05, abs=1e-10)
    tail, _ = integrate.quad(lambda x: t_pdf(x, 18.0), 2.0, np.inf, epsabs=1e-13)
    assert p_value(2.0, 18.0) == pytest.approx(tail, abs=1e-10)
    assert p_value(2.0, 18.0) == pytest.approx(0.0304, abs=5e-5)
    assert p_value(-2.0, 18.0, Sided.TWO_SIDED) == pytest.approx(2 * tail, abs=1e-10)


def test_run_test_null_and_strong_signal():
    config = TestConfig()
    null = run_test(*four((0.3, 0.3, 0.3, 0.3)), config)
    assert null.p_value == pytest.approx(0.5) and not null.reject_null
    strong = run_test(*four((0.0, 0.0, 2.0, 0.0), n=1000), config)
    assert strong.t_stat > 10 and strong.reject_null


def test_run_test_matches_raw_recomputation():
    rng = np.random.default_rng(11)
    raw = {
        Group.E1: rng.normal(0.2, 1.0, 300),
        Group.C1: rng.normal(0.0, 1.5, 250),
        Group.E2: rng.normal(0.5, 0.8, 400),
        Group.C2: rng.normal(0.0, 1.2, 350),
    }
    summaries = [GroupSummary.from_sample(g, x) for g, x in raw.items()]
    result = run_test(*summaries, TestConfig())
    d = (raw[Group.E2].mean() - raw[Group.C2].mean()) - (raw[Group.E1].mean() - raw[Group.C1].mean())
    se2 = sum(x.var(ddof=1) / x.size for x in raw.values())
    nu = se2**2 / sum((x.var(ddof=1) / x.size) ** 2 / (x.size - 1) for x in raw.values())
    t = d / math.sqrt(se2)
    assert result.d_bar == pytest.approx(d, rel=1e-12)
    assert result.t_stat == pytest.approx(t, rel=1e-12)
    assert result.nu == pytest.approx(nu, rel=1e-12)
    assert result.p_value == pytest.approx(stats.t.sf(t, nu), rel=1e-8)


def test_per_strategy_increments_match_scipy_welch_interval():
    rng = np.random.default_rng(5)
    exposed = rng.normal(1.0, 2.0, 120)
    control = rng.normal(0.6, 1.0, 90)
    inc = welch_interval(GroupSummary.from_sample("E1", exposed), GroupSummary.from_sample("C1", control), 0.05)
    res = stats.ttest_ind(exposed, control, equal_var=False)
    lo, hi = res.confidence_interval(0.95)
    assert (inc.ci_low, inc.ci_high) == (pytest.approx(lo, rel=1e-8), pytest.approx(hi, rel=1e-8))
    assert inc.estimate == pytest.approx(exposed.mean() - control.mean())


def test_two_arm_test_matches_scipy():
    rng = np.random.default_rng(3)
    a1 = rng.normal(0.0, 1.0, 200)
    a2 = rng.normal(0.3, 2.0, 150)
    result = run_two_arm_test(GroupSummary.from_sample("A1", a1), GroupSummary.from_sample("A2", a2), TestConfig())
    ref = stats.ttest_ind(a2, a1, equal_var=False, alternative="greater")
    assert result.t_stat == pytest.approx(ref.statistic, rel=1e-10)
    assert result.p_value == pytest.approx(ref.pvalue, rel=1e-8)
    assert result.per_strategy_increments is None


summary_inputs = st.tuples(
    st.lists(st.integers(2, 5000), min_size=4, max_size=4),
    st.lists(st.floats(-5.0, 5.0), min_size=4, max_size=4),
    st.lists(st.floats(0.01, 10.0), min_size=4, max_size=4),
)


def _build(ns, means, variances):
    return [GroupSummary(g, n, m, v) for g, n, m, v in zip((Group.E1, Group.C1, Group.E2, Group.C2), ns, means, variances)]


@settings(max_examples=100)
@given(inputs=summary_inputs, c=st.floats(0.01, 100.0), shift=st.floats(-100.0, 100.0))
def test_welch_scale_and_translation_invariance(inputs, c, shift):
    ns, means, variances = inputs
    t, nu = welch_statistic(_build(ns, means, variances))
    t_scaled, nu_scaled = welch_statistic(_build(ns, [c * m for m in means], [c * c * v for v in variances]))
    t_shift, _ = welch_statistic(_build(ns, [m + shift for m in means], variances))
    assert t_scaled == pytest.approx(t, rel=1e-9, abs=1e-9)
    assert nu_scaled == pytest.approx(nu, rel=1e-9)
    assert t_shift == pytest.approx(t, rel=1e-6, abs=1e-6)


@settings(max_examples=100)
@given(inputs=summary_inputs)
def test_swapping_strategies_negates_t(inputs):
    ns, means, variances = inputs
    swap = [2, 3, 0, 1]
    t, nu = welch_statistic(_build(ns, means, variances))
    t_sw, nu_sw = welch_statistic(_build([ns[i] for i in swap], [means[i] for i in swap], [variances[i] for i in swap]))
    assert t_sw == pytest.approx(-t, rel=1e-12, abs=1e-12)
    assert nu_sw == pytest.approx(nu, rel=1e-12)


@given(t=st.floats(-20.0, 20.0), nu=st.floats(1.0, 1e5))
def test_two_sided_p_value_identity(t, nu):
    expected = 2 * min(p_value(t, nu), p_value(-t, nu))
    assert p_value(t, nu, "two_sided") == pytest.approx(min(1.0, expected), abs=1e-12)
