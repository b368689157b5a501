"""Synthetic populations decomposed into qualification sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..model import Group, PopulationSpec, ResponseMode

# Set codes stored per individual.
NON_QUALIFIER = 0
SET_1 = 1  # strategy 1 only
SET_2 = 2  # strategy 2 only
OVERLAP = 3  # both strategies

# Covariate ("churn-risk-like" score in [0, 1]): uniform for set 1 and for
# non-qualifiers, Beta(5, 2) (mean 5/7, mass near 1) for set 2 and the
# overlap, so that a high score goes with strategy-2 qualification.
COVARIATE_BETA = (5.0, 2.0)


def stage_rng(seed: int | np.random.SeedSequence, stage: int) -> np.random.Generator:
    """Independent generator for one pipeline stage.

    Stage streams are SeedSequence children keyed by (…, stage), so each
    stage's draws do not depend on how many draws earlier stages made.
    """
    if isinstance(seed, np.random.SeedSequence):
        seq = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (stage,))
    else:
        seq = np.random.SeedSequence(int(seed), spawn_key=(stage,))
    return np.random.default_rng(seq)


@dataclass(frozen=True)
class Individual:
    id: int
    qualifies_1: bool
    qualifies_2: bool
    covariate: float
    assigned_group: Group | None = None
    response: float | None = None


@dataclass(frozen=True, eq=False)
class Population:
    """Struct-of-arrays population: one entry per individual."""

    spec: PopulationSpec
    response_mode: ResponseMode
    set_code: np.ndarray
    covariate: np.ndarray

    def __len__(self) -> int:
        return int(self.set_code.size)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self))

    @property
    def qualifies_1(self) -> np.ndarray:
        return (self.set_code == SET_1) | (self.set_code == OVERLAP)

    @property
    def qualifies_2(self) -> np.ndarray:
        return (self.set_code == SET_2) | (self.set_code == OVERLAP)

    def records(self) -> Iterator[Individual]:
        q1 = self.qualifies_1
        q2 = self.qualifies_2
        for i in range(len(self)):
            yield Individual(i, bool(q1[i]), bool(q2[i]), float(self.covariate[i]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Population):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.response_mode is other.response_mode
            and np.array_equal(self.set_code, other.set_code)
            and np.array_equal(self.covariate, other.covariate)
        )


def generate_population(
    pop: PopulationSpec,
    response_mode: ResponseMode | str | None = None,
    seed: int | np.random.SeedSequence = 0,
) -> Population:
    """Lay out exactly n1, n2, n_o (and n_non) individuals and draw their covariates.

    Individuals are ordered set 1, set 2, overlap, non-qualifiers. The response
    mode must match the one the set parameters were declared with.
    """
    declared = pop.params.response_mode
    mode = declared if response_mode is None else ResponseMode(response_mode)
    if mode is not declared:
        raise ValueError(f"response mode {mode.value} does not match the {declared.value} set parameters")
    rng = stage_rng(seed, 0)
    set_code = np.concatenate(
        [
            np.full(pop.n1, SET_1, dtype=np.int8),
            np.full(pop.n2, SET_2, dtype=np.int8),
            np.full(pop.n_o, OVERLAP, dtype=np.int8),
            np.full(pop.n_non, NON_QUALIFIER, dtype=np.int8),
        ]
    )
    a, b = COVARIATE_BETA
    covariate = np.concatenate(
        [
            rng.random(pop.n1),
            rng.beta(a, b, pop.n2 + pop.n_o),
            rng.random(pop.n_non),
        ]
    )
    return Population(pop, mode, set_code, covariate)
