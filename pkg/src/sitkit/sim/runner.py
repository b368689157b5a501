"""Replicated simulation of whole experiments and the resulting report."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..model import Group, GroupSummary, PopulationSpec, TestConfig, TestResult, to_dict
from ..numerics import normal_quantile
from ..welch import run_test, run_two_arm_test
from .design import ContaminationScenario, DesignMode, allocate, apply_treatment_and_measure
from .diagnostics import (
    ALARM_LEVEL,
    Diagnostic,
    Status,
    aggregate_alarms,
    bonferroni_min,
    covariate_balance_check,
    incrementality_sign_check,
    srm_check,
)
from .population import generate_population

MIN_REPLICATES = 100

CSV_COLUMNS = ("replicate", "d_bar", "t", "nu", "p_value", "reject", "d1", "d2", "srm_p", "ks_p")


@dataclass(frozen=True)
class ReplicateRow:
    replicate: int
    d_bar: float
    t: float
    nu: float
    p_value: float
    reject: bool
    d1: float | None
    d2: float | None
    srm_p: float
    ks_p: float
    sign_status: Status | None = None

    def csv_fields(self) -> list[str]:
        def fmt(value) -> str:
            if value is None:
                return ""
            if isinstance(value, bool):
                return "1" if value else "0"
            if isinstance(value, float):
                return repr(value)
            return str(value)

        return [fmt(getattr(self, name)) for name in CSV_COLUMNS]


def replicate_seed(master_seed: int, replicate: int) -> np.random.SeedSequence:
    """Seed of replicate ``i``: the SeedSequence of entropy ``master_seed`` and spawn key (i,)."""
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate),))


def _summaries(data, groups: Sequence[Group]) -> list[GroupSummary]:
    out = []
    for g in groups:
        values = data[g].responses
        if values.size < 2:
            raise ValueError(f"group {g.value} received fewer than 2 individuals; enlarge the population")
        out.append(GroupSummary(g, int(values.size), float(values.mean()), float(values.var(ddof=1))))
    return out


def run_replicate(
    pop: PopulationSpec,
    mode: DesignMode,
    scenario: ContaminationScenario,
    config: TestConfig,
    replicate: int,
    master_seed: int,
) -> tuple[ReplicateRow, TestResult]:
    """Generate, allocate, measure, test and diagnose one simulated experiment."""
    seed = replicate_seed(master_seed, replicate)
    population = generate_population(pop, None, seed)
    allocation = allocate(population, mode, seed)
    data = apply_treatment_and_measure(population, allocation, scenario, None, seed)
    ratio = mode.exposed_control_ratio
    if mode.kind.is_stacked:
        e1, c1, e2, c2 = _summaries(data, (Group.E1, Group.C1, Group.E2, Group.C2))
        result = run_test(e1, c1, e2, c2, config)
        pairs = ((Group.E1, Group.C1), (Group.E2, Group.C2))
        srm = [srm_check((len(data[e]), len(data[c])), ratio)[1] for e, c in pairs]
        ks = [covariate_balance_check(data[e].covariates, data[c].covariates)[1] for e, c in pairs]
        d1, d2 = (inc.estimate for inc in result.per_strategy_increments)
        sign = incrementality_sign_check(result)
    else:
        a1, a2 = _summaries(data, (Group.A1, Group.A2))
        result = run_two_arm_test(a1, a2, config)
        srm = [srm_check((len(data[Group.A2]), len(data[Group.A1])), 1.0)[1]]
        ks = [covariate_balance_check(data[Group.A2].covariates, data[Group.A1].covariates)[1]]
        d1 = d2 = None
        sign = None
    row = ReplicateRow(
        replicate,
        result.d_bar,
        result.t_stat,
        result.nu,
        result.p_value,
        result.reject_null,
        d1,
        d2,
        bonferroni_min(srm),
        bonferroni_min(ks),
        sign,
    )
    return row, result


def _run_chunk(args) -> list[ReplicateRow]:
    pop, mode, scenario, config, seed, indices = args
    return [run_replicate(pop, mode, scenario, config, i, seed)[0] for i in indices]


@dataclass
class SimulationReport:
    replicates: int
    seed: int
    design: str
    scenario: str
    alpha: float
    rejection_rate: float
    rejection_ci: tuple[float, float]
    mean_d_bar: float
    mean_d1: float | None
    mean_d2: float | None
    diagnostics: list[Diagnostic]
    rows: list[ReplicateRow] = field(default_factory=list, repr=False, compare=False)

    @property
    def failed(self) -> bool:
        return any(d.status is Status.FAIL for d in self.diagnostics)

    def to_dict(self) -> dict:
        data = to_dict(self)
        data.pop("rows")
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationReport":
        data = dict(data)
        data["rejection_ci"] = tuple(data["rejection_ci"])
        data["diagnostics"] = [Diagnostic(**d) for d in data["diagnostics"]]
        return cls(**data)

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_fields())
        return buf.getvalue()


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    z = normal_quantile(0.5 + level / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def summarise(
    rows: list[ReplicateRow], mode: DesignMode, scenario: ContaminationScenario, config: TestConfig, seed: int
) -> SimulationReport:
    reps = len(rows)
    rejections = sum(r.reject for r in rows)
    diagnostics = [
        aggregate_alarms("sample_ratio", sum(r.srm_p < ALARM_LEVEL for r in rows), reps, ALARM_LEVEL),
        aggregate_alarms("covariate_balance", sum(r.ks_p < ALARM_LEVEL for r in rows), reps, ALARM_LEVEL),
    ]
    stacked = mode.kind.is_stacked
    if stacked:
        # With non-negative true increments an interval lies below zero with
        # probability at most alpha/2 per strategy.
        fails = sum(r.sign_status is Status.FAIL for r in rows)
        diagnostics.append(aggregate_alarms("incrementality_sign", fails, reps, config.alpha))
    return SimulationReport(
        replicates=reps,
        seed=int(seed),
        design=mode.kind.value,
        scenario=scenario.kind.value,
        alpha=config.alpha,
        rejection_rate=rejections / reps,
        rejection_ci=wilson_interval(rejections, reps),
        mean_d_bar=_mean([r.d_bar for r in rows]),
        mean_d1=_mean([r.d1 for r in rows]) if stacked else None,
        mean_d2=_mean([r.d2 for r in rows]) if stacked else None,
        diagnostics=diagnostics,
        rows=rows,
    )


def estimate_power(
    pop: PopulationSpec,
    mode: DesignMode,
    scenario: ContaminationScenario,
    config: TestConfig,
    replicates: int,
    seed: int,
    workers: int = 1,
) -> SimulationReport:
    """Empirical rejection rate and diagnostics over independent replicates.

    Replicate ``i`` is fully determined by ``(seed, i)``, so the report is the
    same for any ``workers`` count and any execution order.
    """
    if replicates < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")
    scenario.check_design(mode)
    if workers <= 1:
        rows = _run_chunk((pop, mode, scenario, config, seed, range(replicates)))
    else:
        chunks = np.array_split(np.arange(replicates), workers * 4)
        jobs = [(pop, mode, scenario, config, seed, [int(i) for i in c]) for c in chunks if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, jobs) for row in part]
    rows.sort(key=lambda r: r.replicate)
    return summarise(rows, mode, scenario, config, seed)


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: SimulationReport, output_dir: Path) -> tuple[Path, Path]:
    output_dir = Path(output_dir)
    json_path = output_dir / "report.json"
    csv_path = output_dir / "replicates.csv"
    atomic_write(json_path, report.to_json() + "\n")
    atomic_write(csv_path, report.csv_text())
    return json_path, csv_path
