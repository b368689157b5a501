"""Experiment designs, group allocation, treatment and contamination scenarios."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..model import Group, ResponseMode
from .population import Population, stage_rng

ALLOCATION_STAGE = 1
RESPONSE_STAGE = 2
CONTAMINATION_STAGE = 3


class DesignKind(str, Enum):
    SIT_SEPARATE_CONTROLS = "SIT_separate_controls"
    SIT_MERGED_CONTROL = "SIT_merged_control"
    RPT = "RPT"
    FULL_POPULATION = "full_population"

    @property
    def is_stacked(self) -> bool:
        return self in (DesignKind.SIT_SEPARATE_CONTROLS, DesignKind.SIT_MERGED_CONTROL)


@dataclass(frozen=True)
class DesignMode:
    """Design plus the exposed:control ratio used inside each strategy.

    The ratio only affects the stacked designs; two-arm designs split 1:1.
    """

    kind: DesignKind = DesignKind.SIT_SEPARATE_CONTROLS
    exposed_control_ratio: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DesignKind(self.kind))
        if not self.exposed_control_ratio > 0:
            raise ValueError(f"exposed_control_ratio must be positive, got {self.exposed_control_ratio!r}")


class ContaminationKind(str, Enum):
    NONE = "none"
    CROSS_STRATEGY_EXCLUSION = "cross_strategy_exclusion"
    EXTERNAL_EVENT = "external_event"
    CONTROL_PROXY_MISMATCH = "control_proxy_mismatch"


# Parameters each kind reads, for config validation and serialisation.
SCENARIO_PARAMS = {
    ContaminationKind.NONE: (),
    ContaminationKind.CROSS_STRATEGY_EXCLUSION: ("threshold", "exclusion_probability"),
    ContaminationKind.EXTERNAL_EVENT: ("uplift", "take_up"),
    ContaminationKind.CONTROL_PROXY_MISMATCH: ("over_inclusion", "proxy_mean", "proxy_variance"),
}


@dataclass(frozen=True)
class ContaminationScenario:
    """A data-quality failure injected into the simulated experiment.

    cross_strategy_exclusion
        Individuals routed to strategy 1's exposed group whose covariate
        exceeds ``threshold`` are dropped with ``exclusion_probability``, as
        if strategy 2's qualification barred them. Controls are untouched.
    external_event
        A ``take_up`` fraction of everyone, in every group, responds to an
        outside event instead of the intervention: their response is the base
        response plus ``uplift`` (conversion probability capped at 1).
    control_proxy_mismatch
        Each control group additionally enrols about ``over_inclusion`` times
        its size of individuals who could never have been exposed, with
        response mean ``proxy_mean`` (and ``proxy_variance`` in gaussian mode).
        Only meaningful for stacked designs.
    """

    kind: ContaminationKind = ContaminationKind.NONE
    threshold: float = 0.7
    exclusion_probability: float = 1.0
    uplift: float = 0.0
    take_up: float = 0.0
    over_inclusion: float = 0.0
    proxy_mean: float = 1.0
    proxy_variance: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ContaminationKind(self.kind))
        for name in ("threshold", "exclusion_probability", "take_up", "over_inclusion"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if not self.uplift >= 0:
            raise ValueError(f"uplift must be nonnegative, got {self.uplift!r}")
        if not self.proxy_variance >= 0:
            raise ValueError(f"proxy_variance must be nonnegative, got {self.proxy_variance!r}")

    @classmethod
    def from_params(cls, kind: ContaminationKind | str, params: dict | None = None) -> "ContaminationScenario":
        kind = ContaminationKind(kind)
        params = dict(params or {})
        unknown = set(params) - set(SCENARIO_PARAMS[kind])
        if unknown:
            raise ValueError(f"unknown parameter(s) for {kind.value}: {', '.join(sorted(unknown))}")
        return cls(kind, **{k: float(v) for k, v in params.items()})

    def params(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SCENARIO_PARAMS[self.kind]}

    def check_design(self, mode: DesignMode) -> None:
        if self.kind is ContaminationKind.CONTROL_PROXY_MISMATCH and not mode.kind.is_stacked:
            raise ValueError("control_proxy_mismatch needs a stacked design with control groups")


@dataclass(frozen=True, eq=False)
class Allocation:
    """Boolean membership mask per group.

    In merged-control mode ``merged_control`` marks the shared pool; C1 and C2
    are rebuilt from it by qualification flags, so they overlap.
    """

    mode: DesignMode
    masks: dict[Group, np.ndarray]
    merged_control: np.ndarray | None = None

    def sizes(self) -> dict[Group, int]:
        return {g: int(m.sum()) for g, m in self.masks.items()}


def allocate(population: Population, mode: DesignMode, seed: int | np.random.SeedSequence = 0) -> Allocation:
    """Randomly assign individuals to groups.

    Every design draws the same first uniform per individual, so two designs
    run with the same seed share their randomisation where they overlap.
    """
    rng = stage_rng(seed, ALLOCATION_STAGE)
    size = len(population)
    q1 = population.qualifies_1
    q2 = population.qualifies_2
    r = mode.exposed_control_ratio
    u = rng.random(size)
    kind = mode.kind
    if kind is DesignKind.SIT_SEPARATE_CONTROLS:
        half1 = u < 0.5
        exposed = rng.random(size) < r / (1.0 + r)
        masks = {
            Group.E1: half1 & q1 & exposed,
            Group.C1: half1 & q1 & ~exposed,
            Group.E2: ~half1 & q2 & exposed,
            Group.C2: ~half1 & q2 & ~exposed,
        }
        return Allocation(mode, masks)
    if kind is DesignKind.SIT_MERGED_CONTROL:
        # Control pool share c and exposed paths h each, with h / c = r.
        c = 1.0 / (1.0 + 2.0 * r)
        h = r / (1.0 + 2.0 * r)
        pool = (u < c) & (q1 | q2)
        path1 = (u >= c) & (u < c + h)
        path2 = u >= c + h
        masks = {
            Group.E1: path1 & q1,
            Group.C1: pool & q1,
            Group.E2: path2 & q2,
            Group.C2: pool & q2,
        }
        return Allocation(mode, masks, merged_control=pool)
    arm1 = u < 0.5
    enrolled = (q1 | q2) if kind is DesignKind.RPT else np.ones(size, dtype=bool)
    return Allocation(mode, {Group.A1: arm1 & enrolled, Group.A2: ~arm1 & enrolled})


@dataclass(frozen=True, eq=False)
class GroupData:
    responses: np.ndarray
    covariates: np.ndarray

    def __len__(self) -> int:
        return int(self.responses.size)


# Response key for each set code (index) received by each group.
_BASE = ("N", "B1", "B2", "Bo")
_TREATMENT = {
    Group.E1: ("N", "I1", "B2", "Io"),
    Group.E2: ("N", "B1", "I2", "Itheta"),
    Group.C1: _BASE,
    Group.C2: _BASE,
    Group.A1: ("N", "I1", "B2", "Io"),
    Group.A2: ("N", "B1", "I2", "Itheta"),
}


def apply_treatment_and_measure(
    population: Population,
    allocation: Allocation,
    scenario: ContaminationScenario = ContaminationScenario(),
    response_mode: ResponseMode | str | None = None,
    seed: int | np.random.SeedSequence = 0,
) -> dict[Group, GroupData]:
    """Draw every enrolled individual's response under its group's treatment.

    Responses come from one uniform (bernoulli) or one standard normal
    (gaussian) draw per individual, so runs that differ only in design or in
    contamination share their noise.
    """
    mode = population.response_mode if response_mode is None else ResponseMode(response_mode)
    if mode is not population.response_mode:
        raise ValueError("mixed response modes are not supported")
    scenario.check_design(allocation.mode)
    params = population.spec.params
    size = len(population)
    codes = population.set_code.astype(np.intp)
    noise_rng = stage_rng(seed, RESPONSE_STAGE)
    noise = noise_rng.random(size) if mode is ResponseMode.BERNOULLI else noise_rng.standard_normal(size)
    crng = stage_rng(seed, CONTAMINATION_STAGE)

    masks = dict(allocation.masks)
    if scenario.kind is ContaminationKind.CROSS_STRATEGY_EXCLUSION:
        target = Group.E1 if allocation.mode.kind.is_stacked else Group.A1
        barred = (population.covariate > scenario.threshold) & (crng.random(size) < scenario.exclusion_probability)
        masks[target] = masks[target] & ~barred

    taken_up = None
    if scenario.kind is ContaminationKind.EXTERNAL_EVENT:
        taken_up = crng.random(size) < scenario.take_up

    base_mean = np.array([params.mean(k) for k in _BASE])
    base_sd = np.sqrt([params.variance(k) for k in _BASE])
    out: dict[Group, GroupData] = {}
    for group, mask in masks.items():
        keys = _TREATMENT[group]
        mean = np.array([params.mean(k) for k in keys])[codes[mask]]
        sd = np.sqrt([params.variance(k) for k in keys])[codes[mask]]
        if taken_up is not None:
            hit = taken_up[mask]
            event_mean = base_mean[codes[mask]] + scenario.uplift
            if mode is ResponseMode.BERNOULLI:
                event_mean = np.minimum(event_mean, 1.0)
            mean = np.where(hit, event_mean, mean)
            sd = np.where(hit, base_sd[codes[mask]], sd)
        if mode is ResponseMode.BERNOULLI:
            responses = (noise[mask] < mean).astype(float)
        else:
            responses = mean + sd * noise[mask]
        out[group] = GroupData(responses, population.covariate[mask])

    if scenario.kind is ContaminationKind.CONTROL_PROXY_MISMATCH:
        for group in (Group.C1, Group.C2):
            data = out[group]
            extra = int(crng.binomial(len(data), scenario.over_inclusion)) if len(data) else 0
            if mode is ResponseMode.BERNOULLI:
                proxy = (crng.random(extra) < scenario.proxy_mean).astype(float)
            else:
                proxy = scenario.proxy_mean + np.sqrt(scenario.proxy_variance) * crng.standard_normal(extra)
            # Proxies share the audience's covariate profile.
            proxy_cov = crng.choice(data.covariates, size=extra) if extra else np.empty(0)
            out[group] = GroupData(np.concatenate([data.responses, proxy]), np.concatenate([data.covariates, proxy_cov]))
    return out

