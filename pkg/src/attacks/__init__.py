"""Attacks package: PGD, LM-PGD and threat-model projection."""

from .perturbation import Perturbation, write_trace_csv
from .pgd import attack_loss, generate_for_objective, lm_pgd, pgd, start_point
from .projection import project, threat_violations

__all__ = [
    "Perturbation",
    "attack_loss",
    "generate_for_objective",
    "lm_pgd",
    "pgd",
    "project",
    "start_point",
    "threat_violations",
    "write_trace_csv",
]
