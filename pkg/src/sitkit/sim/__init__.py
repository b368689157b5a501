"""Seeded Monte Carlo simulation of stacked and two-arm experiment designs."""

from .design import (
    Allocation,
    ContaminationKind,
    ContaminationScenario,
    DesignKind,
    DesignMode,
    GroupData,
    allocate,
    apply_treatment_and_measure,
)
from .diagnostics import Diagnostic, Status, covariate_balance_check, incrementality_sign_check, srm_check
from .population import Individual, Population, generate_population
from .runner import ReplicateRow, SimulationReport, estimate_power, run_replicate, write_report

__all__ = [
    "Allocation",
    "ContaminationKind",
    "ContaminationScenario",
    "DesignKind",
    "DesignMode",
    "Diagnostic",
    "GroupData",
    "Individual",
    "Population",
    "ReplicateRow",
    "SimulationReport",
    "Status",
    "allocate",
    "apply_treatment_and_measure",
    "covariate_balance_check",
    "estimate_power",
    "generate_population",
    "incrementality_sign_check",
    "run_replicate",
    "srm_check",
    "write_report",
]
