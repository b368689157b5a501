"""Analytic comparison of the stacked test (SIT) with a restricted-population A/B test (RPT).

All formulas use population variances and normal quantiles, with
z = z_{1−α} − z_{1−π_min}. Set sizes enter as exact real-valued fractions
(each RPT arm holds half of every set, each SIT group a quarter).

Sign convention: both differences are "strategy 2 minus strategy 1", so a
positive value favours strategy 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import PopulationSpec, TestConfig
from .numerics import normal_quantile

# (4 − √2)² is the constant relating the special-case bound to z²/Δ².
_SPECIAL_FACTOR = 4.0 - math.sqrt(2.0)


@dataclass(frozen=True)
class ComparisonReport:
    delta_R: float
    delta_S: float
    theta_R: float
    theta_S: float
    sit_superior: bool
    margin: float


def z_gap(config: TestConfig) -> float:
    """z_{1−α} − z_{1−π_min} (α halved for two-sided tests)."""
    return normal_quantile(1.0 - config.critical_level) - normal_quantile(1.0 - config.pi_min)


def rpt_difference(pop: PopulationSpec) -> float:
    """Mean of the strategy-2 arm minus mean of the strategy-1 arm."""
    p = pop.params
    arm2 = pop.n2 * p.mu_I2 + pop.n_o * p.mu_Itheta + pop.n1 * p.mu_B1
    arm1 = pop.n2 * p.mu_B2 + pop.n_o * p.mu_Io + pop.n1 * p.mu_I1
    return (arm2 - arm1) / pop.n_U


def sit_difference(pop: PopulationSpec) -> float:
    """Expected stacked difference (E2 − C2) − (E1 − C1)."""
    p = pop.params
    s1 = pop.n1 + pop.n_o
    s2 = pop.n2 + pop.n_o
    d2 = (pop.n2 * (p.mu_I2 - p.mu_B2) + pop.n_o * (p.mu_Itheta - p.mu_Bo)) / s2
    d1 = (pop.n1 * (p.mu_I1 - p.mu_B1) + pop.n_o * (p.mu_Io - p.mu_Bo)) / s1
    return d2 - d1


def rpt_mde(pop: PopulationSpec, config: TestConfig) -> float:
    p = pop.params
    load = (
        pop.n1 * (p.variance("I1") + p.variance("B1"))
        + pop.n2 * (p.variance("I2") + p.variance("B2"))
        + pop.n_o * (p.variance("Io") + p.variance("Itheta"))
    )
    return math.sqrt(2.0) * z_gap(config) / pop.n_U * math.sqrt(load)


def sit_mde(pop: PopulationSpec, config: TestConfig) -> float:
    p = pop.params
    s1 = pop.n1 + pop.n_o
    s2 = pop.n2 + pop.n_o
    strategy1 = (
        pop.n1 * p.variance("I1") + pop.n_o * p.variance("Io") + pop.n1 * p.variance("B1") + pop.n_o * p.variance("Bo")
    ) / (s1 * s1)
    strategy2 = (
        pop.n2 * p.variance("B2") + pop.n_o * p.variance("Bo") + pop.n2 * p.variance("I2") + pop.n_o * p.variance("Itheta")
    ) / (s2 * s2)
    return z_gap(config) * math.sqrt(4.0 * (strategy1 + strategy2))


def compare_designs(pop: PopulationSpec, config: TestConfig) -> ComparisonReport:
    """SIT is superior when the gain in difference exceeds the loss in sensitivity."""
    delta_R = rpt_difference(pop)
    delta_S = sit_difference(pop)
    theta_R = rpt_mde(pop, config)
    theta_S = sit_mde(pop, config)
    margin = (delta_S - delta_R) - (theta_S - theta_R)
    return ComparisonReport(delta_R, delta_S, theta_R, theta_S, margin > 0.0, margin)


def special_case_min_n(
    mu_I1: float,
    mu_B1: float,
    mu_I2: float,
    mu_B2: float,
    variances: tuple[float, float, float, float],
    config: TestConfig,
) -> float:
    """Set size n above which SIT beats RPT when n_o = 0 and n1 = n2 = n.

    ``variances`` are (σ²_I1, σ²_B1, σ²_I2, σ²_B2).
    """
    delta = (mu_I2 - mu_B2) - (mu_I1 - mu_B1)
    if not delta > 0:
        raise ValueError(f"strategy 2 must be the more incremental strategy (difference {delta!r} <= 0)")
    if len(variances) != 4 or any(not v >= 0 for v in variances):
        raise ValueError("expected four nonnegative variances")
    return (_SPECIAL_FACTOR * z_gap(config) * math.sqrt(math.fsum(variances)) / delta) ** 2


def conversion_bound_min_n(delta: float, config: TestConfig) -> float:
    """Worst-case special-case bound for conversion rates (all four variances at ¼)."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"conversion-rate difference must lie in (0, 1], got {delta!r}")
    return (_SPECIAL_FACTOR * z_gap(config)) ** 2 / (delta * delta)
