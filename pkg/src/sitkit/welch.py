"""Stacked difference, Welch's t-statistic and p-values from group summaries."""

from __future__ import annotations

import math
from typing import Sequence

from .model import Group, GroupSummary, Increment, Sided, TestConfig, TestResult
from .numerics import t_quantile, t_sf


def _expect(summary: GroupSummary, role: Group) -> None:
    if summary.group_id is not role:
        raise ValueError(f"expected a {role.value} summary, got {summary.group_id.value}")


def stacked_difference(e1: GroupSummary, c1: GroupSummary, e2: GroupSummary, c2: GroupSummary) -> float:
    """(mean_E2 − mean_C2) − (mean_E1 − mean_C1)."""
    for summary, role in ((e1, Group.E1), (c1, Group.C1), (e2, Group.E2), (c2, Group.C2)):
        _expect(summary, role)
    return (e2.mean - c2.mean) - (e1.mean - c1.mean)


def welch_statistic(groups: Sequence[GroupSummary]) -> tuple[float, float]:
    """Welch's t for the weighted combination Σ w_g·mean_g, and its Welch–Satterthwaite ν.

    Each group contributes w_g²·s²_g/n_g to the variance of the combination, so
    non-unit weights are handled by replacing s²_g with w_g²·s²_g.
    """
    if len(groups) < 2:
        raise ValueError("Welch's statistic needs at least two groups")
    numerator = math.fsum(g.weight * g.mean for g in groups)
    terms = [g.weight * g.weight * g.psi for g in groups]
    total = math.fsum(terms)
    if total <= 0.0:
        raise ZeroDivisionError("all groups have zero variance; the standard error is zero")
    nu = total * total / math.fsum(term * term / (g.n - 1) for term, g in zip(terms, groups))
    return numerator / math.sqrt(total), nu


def p_value(t: float, nu: float, sided: Sided | str = Sided.ONE_SIDED_GREATER) -> float:
    sided = Sided(sided)
    if sided is Sided.ONE_SIDED_GREATER:
        return t_sf(t, nu)
    return min(1.0, 2.0 * t_sf(abs(t), nu))


def welch_interval(exposed: GroupSummary, control: GroupSummary, alpha: float) -> Increment:
    """Two-sided 1 − alpha Welch interval for mean_exposed − mean_control."""
    diff = exposed.mean - control.mean
    se2 = exposed.psi + control.psi
    level = 1.0 - alpha
    if se2 == 0.0:
        return Increment(diff, diff, diff, level)
    nu = se2 * se2 / (exposed.psi**2 / (exposed.n - 1) + control.psi**2 / (control.n - 1))
    half = t_quantile(1.0 - alpha / 2.0, nu) * math.sqrt(se2)
    return Increment(diff, diff - half, diff + half, level)


def _result(groups: Sequence[GroupSummary], config: TestConfig, increments=None) -> TestResult:
    t, nu = welch_statistic(groups)
    d_bar = math.fsum(g.weight * g.mean for g in groups)
    p = p_value(t, nu, config.sided)
    return TestResult(d_bar, t, nu, p, p < config.alpha, increments)


def run_test(e1: GroupSummary, c1: GroupSummary, e2: GroupSummary, c2: GroupSummary, config: TestConfig) -> TestResult:
    """Stacked incrementality test of H0: μ_D = 0 on four group summaries."""
    stacked_difference(e1, c1, e2, c2)  # validates the roles
    increments = (welch_interval(e1, c1, config.alpha), welch_interval(e2, c2, config.alpha))
    return _result((e1, c1, e2, c2), config, increments)


def run_two_arm_test(arm1: GroupSummary, arm2: GroupSummary, config: TestConfig) -> TestResult:
    """Welch test of mean_A2 − mean_A1 for a two-arm A/B design."""
    _expect(arm1, Group.A1)
    _expect(arm2, Group.A2)
    return _result((arm1, arm2), config)
