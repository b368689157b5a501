"""Analytic power, minimum detectable effect and minimum sample size.

Power is the plug-in approximation 1 − T_ν(t_{ν,1−α} − θ/√Σψ_g): the
standard error is fixed at its planning value and no noncentral-t correction
is applied. For two-sided tests the critical value uses α/2 and the
(negligible) opposite-tail rejection probability is ignored, which keeps
power, MDE and sample size exact inverses of one another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import TestConfig
from .numerics import normal_quantile, t_cdf, t_quantile

MAX_FIXED_POINT_ITER = 10
MAX_SAMPLE_SIZE = 10**15


@dataclass(frozen=True)
class PlanningGroup:
    """One group of a test plan.

    Either ``n`` (fixed size) or ``ratio`` (relative size coefficient) is set.
    ``weight`` is the group's coefficient in the test statistic; its square
    scales the variance contribution.
    """

    label: str
    variance: float
    n: int | None = None
    ratio: float | None = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.variance >= 0:
            raise ValueError(f"group {self.label}: variance must be nonnegative, got {self.variance!r}")
        if self.ratio is not None and not self.ratio > 0:
            raise ValueError(f"group {self.label}: ratio coefficient must be positive, got {self.ratio!r}")
        if self.n is not None and (int(self.n) != self.n or self.n < 2):
            raise ValueError(f"group {self.label}: size must be an integer >= 2, got {self.n!r}")

    @property
    def weighted_variance(self) -> float:
        return self.weight * self.weight * self.variance


def _fixed(groups: Sequence[PlanningGroup]) -> Sequence[PlanningGroup]:
    if not groups:
        raise ValueError("need at least one planning group")
    for g in groups:
        if g.n is None:
            raise ValueError(f"group {g.label} has no fixed size")
    return groups


def welch_df(variances: Sequence[float], sizes: Sequence[float]) -> float:
    """Welch–Satterthwaite degrees of freedom; infinite when every variance is zero."""
    psis = [v / n for v, n in zip(variances, sizes)]
    total = math.fsum(psis)
    if total == 0.0:
        return math.inf
    return total * total / math.fsum(p * p / (n - 1) for p, n in zip(psis, sizes))


def _plan_terms(groups: Sequence[PlanningGroup]) -> tuple[float, float]:
    """(Σψ_g, ν) for groups with fixed sizes."""
    variances = [g.weighted_variance for g in groups]
    sizes = [g.n for g in groups]
    return math.fsum(v / n for v, n in zip(variances, sizes)), welch_df(variances, sizes)


def quantile_gap(config: TestConfig, nu: float) -> float:
    """t_{ν,1−α} − t_{ν,1−π_min} (normal quantiles when ν is infinite)."""
    if math.isinf(nu):
        return normal_quantile(1.0 - config.critical_level) - normal_quantile(1.0 - config.pi_min)
    return t_quantile(1.0 - config.critical_level, nu) - t_quantile(1.0 - config.pi_min, nu)


def power(theta: float, config: TestConfig, groups: Sequence[PlanningGroup]) -> float:
    """Probability of rejecting H0 when the true stacked difference is ``theta``."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    total, nu = _plan_terms(_fixed(groups))
    if total == 0.0:
        return 1.0
    if math.isinf(nu):
        raise ArithmeticError("degrees of freedom are undefined")
    critical = t_quantile(1.0 - config.critical_level, nu)
    return 1.0 - t_cdf(critical - theta / math.sqrt(total), nu)


def min_detectable_effect(config: TestConfig, groups: Sequence[PlanningGroup]) -> float:
    """Smallest θ the plan detects with power π_min."""
    total, nu = _plan_terms(_fixed(groups))
    if total == 0.0:
        return 0.0
    return quantile_gap(config, nu) * math.sqrt(total)


def _search_smallest(ok, start: int) -> int:
    """Smallest integer n >= 2 with ok(n), for monotone ok, starting near ``start``."""
    n = max(2, start)
    if ok(n):
        hi, step = n, 1
        lo = hi - step
        while lo >= 2 and ok(lo):
            hi, step = lo, step * 2
            lo = hi - step
        if lo < 2:
            if ok(2):
                return 2
            lo = 2
    else:
        lo, step = n, 1
        hi = lo + step
        while not ok(hi):
            lo, step = hi, step * 2
            hi = lo + step
            if hi > MAX_SAMPLE_SIZE:
                raise ArithmeticError("required sample size diverges")
    # Invariant: ok(hi) holds and ok(lo) does not.
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _fixed_point(theta: float, config: TestConfig, load: float, df_at) -> int:
    """Iterate n = gap(ν(n))²·load/θ², starting from normal quantiles."""
    z_gap = quantile_gap(config, math.inf)
    n_real = (z_gap / theta) ** 2 * load
    for _ in range(MAX_FIXED_POINT_ITER):
        n_int = max(2, math.ceil(n_real))
        updated = (quantile_gap(config, df_at(n_int)) / theta) ** 2 * load
        if math.ceil(updated) == n_int or abs(updated - n_real) < 1e-9:
            n_real = updated
            break
        n_real = updated
    return max(2, math.ceil(n_real))


def min_sample_equal(theta: float, config: TestConfig, variances: Sequence[float], weights: Sequence[float] | None = None) -> int:
    """Smallest common group size whose power reaches π_min.

    ``weights`` optionally gives each group's coefficient in the statistic; the
    variances are then scaled by the squared weights.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    if not variances:
        raise ValueError("need at least one variance")
    weights = [1.0] * len(variances) if weights is None else list(weights)
    if len(weights) != len(variances):
        raise ValueError("weights and variances differ in length")
    groups_at = lambda n: [PlanningGroup(f"g{i}", v, n=n, weight=w) for i, (v, w) in enumerate(zip(variances, weights))]
    load = math.fsum(w * w * v for v, w in zip(variances, weights))
    if load == 0.0:
        return 2
    wv = [w * w * v for v, w in zip(variances, weights)]
    start = _fixed_point(theta, config, load, lambda n: welch_df(wv, [n] * len(wv)))
    return _search_smallest(lambda n: power(theta, config, groups_at(n)) >= config.pi_min, start)


def _exposed_size(n_control: int, k1: float, k2: float) -> int:
    # The tiny slack absorbs rounding in k2/k1 so exact multiples are not bumped up.
    return max(2, math.ceil(k2 / k1 * n_control - 1e-9))


def min_sample_ratio(
    theta: float,
    config: TestConfig,
    control_variances: Sequence[float],
    exposed_variances: Sequence[float],
    k1: float,
    k2: float,
) -> tuple[int, int]:
    """Smallest (n_control, n_exposed) with n_exposed = ⌈(k2/k1)·n_control⌉ reaching π_min."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    if not (k1 > 0 and k2 > 0):
        raise ValueError(f"ratio coefficients must be positive, got k1={k1!r}, k2={k2!r}")
    if not control_variances and not exposed_variances:
        raise ValueError("need at least one variance")

    def groups_at(n: int) -> list[PlanningGroup]:
        m = _exposed_size(n, k1, k2)
        return [PlanningGroup(f"control{i}", v, n=n) for i, v in enumerate(control_variances)] + [
            PlanningGroup(f"exposed{i}", v, n=m) for i, v in enumerate(exposed_variances)
        ]

    load = math.fsum(control_variances) + math.fsum(k1 / k2 * v for v in exposed_variances)
    if load == 0.0:
        return 2, _exposed_size(2, k1, k2)
    variances = list(control_variances) + list(exposed_variances)

    def df_at(n: int) -> float:
        m = _exposed_size(n, k1, k2)
        return welch_df(variances, [n] * len(control_variances) + [m] * len(exposed_variances))

    start = _fixed_point(theta, config, load, df_at)
    n = _search_smallest(lambda n: power(theta, config, groups_at(n)) >= config.pi_min, start)
    return n, _exposed_size(n, k1, k2)
