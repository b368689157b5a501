"""Domain types shared by the analytic and simulation modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence


class Group(str, Enum):
    """Experiment group identifiers.

    E1/C1/E2/C2 are the four stacked-test groups. A1/A2 are the two arms of a
    two-arm A/B test (restricted or full population); A2 receives strategy 2.
    """

    E1 = "E1"
    C1 = "C1"
    E2 = "E2"
    C2 = "C2"
    A1 = "A1"
    A2 = "A2"


# Signs that turn the four group means into D̄ = (E2 − C2) − (E1 − C1).
DEFAULT_WEIGHTS = {Group.E1: -1.0, Group.C1: 1.0, Group.E2: 1.0, Group.C2: -1.0, Group.A1: -1.0, Group.A2: 1.0}


class Sided(str, Enum):
    ONE_SIDED_GREATER = "one_sided_greater"
    TWO_SIDED = "two_sided"


class ResponseMode(str, Enum):
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class GroupSummary:
    """Sample statistics of one experiment group.

    ``weight`` is the coefficient of this group's mean in the test statistic;
    it defaults to the sign the group carries in the stacked difference.
    """

    group_id: Group
    n: int
    mean: float
    variance: float
    weight: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "group_id", Group(self.group_id))
        if self.weight is None:
            object.__setattr__(self, "weight", DEFAULT_WEIGHTS[self.group_id])
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"group {self.group_id.value}: need an integer n >= 2, got {self.n!r}")
        if not self.variance >= 0:
            raise ValueError(f"group {self.group_id.value}: variance must be nonnegative, got {self.variance!r}")
        if not math.isfinite(self.mean):
            raise ValueError(f"group {self.group_id.value}: mean must be finite")

    @property
    def psi(self) -> float:
        """Estimated squared standard error of the group mean, s²/n."""
        return self.variance / self.n

    @classmethod
    def from_sample(cls, group_id: Group | str, values: Sequence[float], weight: float | None = None) -> "GroupSummary":
        n = len(values)
        if n < 2:
            raise ValueError(f"group {group_id}: need at least 2 observations, got {n}")
        mean = math.fsum(values) / n
        variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        return cls(Group(group_id), n, mean, variance, weight)


# Field name -> (mean attribute, variance attribute) for each response distribution.
_SET_FIELDS = {
    "B1": ("mu_B1", "var_B1"),
    "I1": ("mu_I1", "var_I1"),
    "B2": ("mu_B2", "var_B2"),
    "I2": ("mu_I2", "var_I2"),
    "Bo": ("mu_Bo", "var_Bo"),
    "Io": ("mu_Io", "var_Io"),
    "Itheta": ("mu_Itheta", "var_Itheta"),
    "N": ("mu_N", "var_N"),
}

_OPTIONAL_SETS = ("Bo", "Io", "Itheta", "N")


@dataclass(frozen=True)
class SetParameters:
    """Response means and variances of the three qualification sets.

    Set 1 qualifies for strategy 1 only, set 2 for strategy 2 only and the
    overlap set ("o") for both. ``B`` is the base (control) response, ``I`` the
    response under intervention; ``Io`` / ``Itheta`` are the overlap set's
    responses to strategy 1 and strategy 2. ``N`` describes individuals who
    qualify for neither strategy and only matters for full-population tests.

    With ``response_mode="bernoulli"`` every variance is derived as μ(1 − μ)
    and any supplied variance must agree with it.
    """

    mu_B1: float
    mu_I1: float
    mu_B2: float
    mu_I2: float
    mu_Bo: float = 0.0
    mu_Io: float = 0.0
    mu_Itheta: float = 0.0
    var_B1: float | None = None
    var_I1: float | None = None
    var_B2: float | None = None
    var_I2: float | None = None
    var_Bo: float | None = None
    var_Io: float | None = None
    var_Itheta: float | None = None
    mu_N: float = 0.0
    var_N: float | None = None
    response_mode: ResponseMode = ResponseMode.GAUSSIAN

    def __post_init__(self) -> None:
        mode = ResponseMode(self.response_mode)
        object.__setattr__(self, "response_mode", mode)
        for key, (mu_name, var_name) in _SET_FIELDS.items():
            mu = getattr(self, mu_name)
            var = getattr(self, var_name)
            if not math.isfinite(mu):
                raise ValueError(f"{mu_name} must be finite")
            if mode is ResponseMode.BERNOULLI:
                _check_probability(mu_name, mu)
                derived = mu * (1.0 - mu)
                if var is not None and abs(var - derived) > 1e-12:
                    raise ValueError(f"{var_name}={var!r} disagrees with the Bernoulli variance {derived!r}")
                object.__setattr__(self, var_name, derived)
            else:
                if var is None:
                    if key in _OPTIONAL_SETS:
                        continue  # checked against the set sizes by PopulationSpec
                    raise ValueError(f"{var_name} is required in gaussian mode")
                if not var >= 0:
                    raise ValueError(f"{var_name} must be nonnegative, got {var!r}")
                object.__setattr__(self, var_name, float(var))

    def mean(self, key: str) -> float:
        return getattr(self, _SET_FIELDS[key][0])

    def variance(self, key: str) -> float:
        value = getattr(self, _SET_FIELDS[key][1])
        return 0.0 if value is None else value

    def has_variance(self, key: str) -> bool:
        return getattr(self, _SET_FIELDS[key][1]) is not None

    @classmethod
    def bernoulli(cls, **means: float) -> "SetParameters":
        return cls(response_mode=ResponseMode.BERNOULLI, **means)


@dataclass(frozen=True)
class PopulationSpec:
    """Sizes of the qualification sets plus their response parameters.

    ``n_non`` counts individuals who qualify for neither strategy; they are only
    enrolled by the full-population design.
    """

    n1: int
    n2: int
    n_o: int
    params: SetParameters
    n_non: int = 0

    def __post_init__(self) -> None:
        for name in ("n1", "n2", "n_o", "n_non"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n_U < 4:
            raise ValueError(f"n1 + n2 + n_o must be at least 4, got {self.n_U}")
        if self.n1 + self.n_o < 1 or self.n2 + self.n_o < 1:
            raise ValueError("each strategy needs at least one qualifying individual")
        needed = (("Bo", "Io", "Itheta") if self.n_o else ()) + (("N",) if self.n_non else ())
        for key in needed:
            if not self.params.has_variance(key):
                raise ValueError(f"{_SET_FIELDS[key][1]} is required when that set is nonempty")

    @property
    def n_U(self) -> int:
        """Number of individuals qualifying for at least one strategy."""
        return self.n1 + self.n2 + self.n_o


@dataclass(frozen=True)
class TestConfig:
    """Significance level, minimum power and sidedness of the difference test."""

    __test__ = False  # not a pytest class

    alpha: float = 0.05
    pi_min: float = 0.8
    sided: Sided = Sided.ONE_SIDED_GREATER

    def __post_init__(self) -> None:
        object.__setattr__(self, "sided", Sided(self.sided))
        _check_probability("alpha", self.alpha)
        _check_probability("pi_min", self.pi_min)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly inside (0, 1), got {self.alpha!r}")
        if not self.alpha < self.pi_min:
            raise ValueError(f"alpha ({self.alpha}) must be smaller than the minimum power ({self.pi_min})")
        if not self.pi_min < 1.0:
            raise ValueError(f"minimum power must be below 1, got {self.pi_min!r}")

    @property
    def critical_level(self) -> float:
        """Upper-tail probability used for the rejection threshold."""
        return self.alpha if self.sided is Sided.ONE_SIDED_GREATER else self.alpha / 2.0


@dataclass(frozen=True)
class Increment:
    """One strategy's measured incrementality with its confidence interval."""

    estimate: float
    ci_low: float
    ci_high: float
    level: float


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    d_bar: float
    t_stat: float
    nu: float
    p_value: float
    reject_null: bool
    per_strategy_increments: tuple[Increment, Increment] | None = None


def net_benefit(incrementality: float, n_x: int) -> float:
    """Incrementality scaled by the projected audience size of the strategy."""
    if n_x < 0:
        raise ValueError(f"audience size must be nonnegative, got {n_x!r}")
    return incrementality * n_x


def _flag(record: Any, name: str) -> bool:
    if isinstance(record, Mapping):
        return bool(record[name])
    return bool(getattr(record, name))


def pooled_control_split(merged_control: Iterable[Any]) -> tuple[list[Any], list[Any]]:
    """Rebuild the per-strategy control groups from a merged control pool.

    Records need ``qualifies_1`` and ``qualifies_2`` (attributes or mapping
    keys). A record qualifying for both strategies lands in both outputs.
    """
    c1: list[Any] = []
    c2: list[Any] = []
    for record in merged_control:
        q1 = _flag(record, "qualifies_1")
        q2 = _flag(record, "qualifies_2")
        if not (q1 or q2):
            raise ValueError(f"record {record!r} qualifies for neither strategy")
        if q1:
            c1.append(record)
        if q2:
            c2.append(record)
    return c1, c2


def to_dict(obj: Any) -> Any:
    """JSON-ready view of the dataclasses in this module."""
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: to_dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [to_dict(v) for v in obj]
    if isinstance(obj, dict):
        return {str(to_dict(k)): to_dict(v) for k, v in obj.items()}
    return obj
