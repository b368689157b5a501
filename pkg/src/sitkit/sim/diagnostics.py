"""Data-quality checks: sample ratio mismatch, covariate balance, incrementality sign."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..model import TestResult
from ..numerics import binomial_sf, chi2_sf_1df, kolmogorov_sf


class Status(str, Enum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


@dataclass(frozen=True)
class Diagnostic:
    name: str
    statistic: float
    p_value: float
    status: Status

    def __post_init__(self) -> None:
        object.__setattr__(self, "status", Status(self.status))


def srm_check(observed: tuple[int, int], expected_ratio: float = 1.0) -> tuple[float, float]:
    """Chi-square goodness of fit of (exposed, control) counts to an exposed:control ratio."""
    exposed, control = observed
    if exposed < 0 or control < 0:
        raise ValueError(f"counts must be nonnegative, got {observed!r}")
    if not expected_ratio > 0:
        raise ValueError(f"expected ratio must be positive, got {expected_ratio!r}")
    total = exposed + control
    if total == 0:
        raise ValueError("sample ratio check needs at least one observation")
    share = expected_ratio / (1.0 + expected_ratio)
    expect_e = total * share
    expect_c = total - expect_e
    chi2 = (exposed - expect_e) ** 2 / expect_e + (control - expect_c) ** 2 / expect_c
    return chi2, chi2_sf_1df(chi2)


def ks_statistic(sample_a: np.ndarray, sample_b: np.ndarray) -> float:
    """Largest gap between the two empirical CDFs."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def covariate_balance_check(sample_E: Sequence[float], sample_C: Sequence[float]) -> tuple[float, float]:
    """Two-sample Kolmogorov–Smirnov test with the asymptotic p-value."""
    a = np.asarray(sample_E, dtype=float)
    b = np.asarray(sample_C, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("covariate balance check needs two nonempty samples")
    d = ks_statistic(a, b)
    scale = math.sqrt(a.size * b.size / (a.size + b.size))
    return d, kolmogorov_sf(scale * d)


def incrementality_sign_check(result: TestResult) -> Status:
    """Fail when a strategy's incrementality interval lies wholly below zero.

    A negative point estimate with an interval that reaches zero only warns.
    """
    if result.per_strategy_increments is None:
        raise ValueError("the test result carries no per-strategy increments")
    status = Status.PASS
    for inc in result.per_strategy_increments:
        if inc.ci_high < 0.0:
            return Status.FAIL
        if inc.estimate < 0.0:
            status = Status.WARN
    return status


# Per-replicate alarm level, and the binomial tail levels that turn an excess of
# alarms across replicates into warn / fail.
ALARM_LEVEL = 0.01
FAIL_LEVEL = 0.001
WARN_LEVEL = 0.05


def aggregate_alarms(name: str, alarms: int, replicates: int, reference_rate: float) -> Diagnostic:
    """Summarise per-replicate alarms against the rate expected when nothing is wrong.

    The statistic is the alarm rate; the p-value is the binomial probability of
    seeing at least that many alarms at ``reference_rate``.
    """
    if replicates <= 0:
        raise ValueError("need at least one replicate")
    tail = binomial_sf(alarms, replicates, reference_rate)
    if tail < FAIL_LEVEL:
        status = Status.FAIL
    elif tail < WARN_LEVEL:
        status = Status.WARN
    else:
        status = Status.PASS
    return Diagnostic(name, alarms / replicates, tail, status)


def bonferroni_min(p_values: Sequence[float]) -> float:
    """Family-wise p-value for "any of these checks fired"."""
    return min(1.0, len(p_values) * min(p_values))
