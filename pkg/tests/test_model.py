import pytest
from hypothesis import given
from hypothesis import strategies as st

from sitkit.model import (
    Group,
    GroupSummary,
    PopulationSpec,
    ResponseMode,
    SetParameters,
    Sided,
    TestConfig,
    net_benefit,
    pooled_control_split,
    to_dict,
)


def test_net_benefit_examples():
    assert net_benefit(0.0, 1000) == 0.0
    assert net_benefit(0.02, 0) == 0.0
    assert net_benefit(0.01, 50000) == pytest.approx(500.0)
    with pytest.raises(ValueError):
        net_benefit(0.01, -1)


def test_pooled_control_split_projects_flags():
    records = {
        "a": {"qualifies_1": True, "qualifies_2": False},
        "b": {"qualifies_1": False, "qualifies_2": True},
        "c": {"qualifies_1": True, "qualifies_2": True},
    }
    tagged = [dict(v, id=k) for k, v in records.items()]
    c1, c2 = pooled_control_split(tagged)
    assert [r["id"] for r in c1] == ["a", "c"]
    assert [r["id"] for r in c2] == ["b", "c"]

    c1, c2 = pooled_control_split([{"qualifies_1": 1, "qualifies_2": 0}])
    assert len(c1) == 1 and c2 == []


def test_pooled_control_split_rejects_unqualified_record():
    with pytest.raises(ValueError):
        pooled_control_split([{"qualifies_1": False, "qualifies_2": False}])


@given(st.lists(st.sampled_from([(True, False), (False, True), (True, True)]), max_size=300))
def test_pooled_control_split_counting_identity(flags):
    records = [{"qualifies_1": a, "qualifies_2": b} for a, b in flags]
    c1, c2 = pooled_control_split(records)
    both = sum(a and b for a, b in flags)
    assert len(c1) + len(c2) == len(records) + both


def test_pooled_control_split_thousand_records():
    records = [{"qualifies_1": i % 2 == 0 or i < 300, "qualifies_2": i % 2 == 1 or i < 300} for i in range(1000)]
    assert sum(r["qualifies_1"] and r["qualifies_2"] for r in records) == 300
    c1, c2 = pooled_control_split(records)
    assert len(c1) + len(c2) == 1300


def test_group_summary_defaults_and_validation():
    g = GroupSummary(Group.E1, 10, 1.0, 2.0)
    assert g.weight == -1.0
    assert g.psi == pytest.approx(0.2)
    assert GroupSummary("C2", 10, 0.0, 1.0).weight == -1.0
    assert GroupSummary("E2", 10, 0.0, 1.0, weight=0.5).weight == 0.5
    with pytest.raises(ValueError):
        GroupSummary(Group.E1, 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        GroupSummary(Group.E1, 5, 0.0, -1.0)


def test_group_summary_from_sample_uses_unbiased_variance():
    g = GroupSummary.from_sample("C1", [1.0, 2.0, 3.0, 4.0])
    assert (g.n, g.mean, g.variance) == (4, 2.5, pytest.approx(5.0 / 3.0))


def test_bernoulli_parameters_derive_variances():
    p = SetParameters.bernoulli(mu_B1=0.1, mu_I1=0.12, mu_B2=0.1, mu_I2=0.15)
    assert p.var_I2 == pytest.approx(0.15 * 0.85)
    assert p.variance("Bo") == 0.0
    with pytest.raises(ValueError):
        SetParameters.bernoulli(mu_B1=1.2, mu_I1=0.1, mu_B2=0.1, mu_I2=0.1)
    with pytest.raises(ValueError):
        SetParameters(0.1, 0.1, 0.1, 0.1, var_B1=0.5, response_mode="bernoulli")


def test_gaussian_parameters_need_variances():
    with pytest.raises(ValueError):
        SetParameters(1.0, 1.0, 1.0, 1.0, var_B1=1.0)
    p = SetParameters(1.0, 1.2, 1.0, 1.3, var_B1=1.0, var_I1=1.0, var_B2=1.0, var_I2=2.0)
    assert p.response_mode is ResponseMode.GAUSSIAN
    assert not p.has_variance("Io")


def test_population_spec_validation():
    params = SetParameters.bernoulli(mu_B1=0.1, mu_I1=0.1, mu_B2=0.1, mu_I2=0.1)
    spec = PopulationSpec(100, 100, 50, params)
    assert spec.n_U == 250
    assert PopulationSpec(0, 0, 10, params).n_U == 10
    with pytest.raises(ValueError):
        PopulationSpec(1, 1, 1, params)
    with pytest.raises(ValueError):
        PopulationSpec(-1, 100, 0, params)
    with pytest.raises(ValueError):
        PopulationSpec(100, 0, 0, params)  # strategy 2 has no audience
    gaussian = SetParameters(1.0, 1.0, 1.0, 1.0, var_B1=1.0, var_I1=1.0, var_B2=1.0, var_I2=1.0)
    with pytest.raises(ValueError):
        PopulationSpec(100, 100, 10, gaussian)


def test_test_config_invariants():
    assert TestConfig().critical_level == 0.05
    assert TestConfig(sided="two_sided").critical_level == 0.025
    assert TestConfig(sided=Sided.TWO_SIDED).sided is Sided.TWO_SIDED
    for alpha, pi in [(0.9, 0.8), (0.0, 0.8), (0.05, 1.0), (0.05, 0.05)]:
        with pytest.raises(ValueError):
            TestConfig(alpha, pi)


def test_to_dict_flattens_enums():
    data = to_dict(GroupSummary(Group.E2, 3, 1.0, 0.5))
    assert data == {"group_id": "E2", "n": 3, "mean": 1.0, "variance": 0.5, "weight": 1.0}


@given(x=st.floats(-1.0, 1.0), k=st.floats(-100.0, 100.0), n=st.integers(0, 10**7))
def test_net_benefit_is_linear_in_incrementality(x, k, n):
    assert net_benefit(k * x, n) == pytest.approx(k * net_benefit(x, n), rel=1e-12, abs=1e-300)


@given(st.lists(st.sampled_from([(True, False), (False, True), (True, True)]), max_size=100))
def test_pooled_control_split_is_idempotent(flags):
    records = [{"qualifies_1": a, "qualifies_2": b, "i": i} for i, (a, b) in enumerate(flags)]
    c1, c2 = pooled_control_split(records)
    assert pooled_control_split(c1)[0] == c1
    assert pooled_control_split(c2)[1] == c2


@given(n=st.integers(2, 10**6), s2=st.floats(0.0, 1e6))
def test_psi_times_n_recovers_variance(n, s2):
    assert GroupSummary(Group.C1, n, 0.0, s2).psi * n == pytest.approx(s2, rel=1e-15)
