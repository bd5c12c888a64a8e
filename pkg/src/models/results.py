"""Pydantic models for measurements, training history and reports."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from models.config import MarginKind


class MarginScore(BaseModel):
    """One geometric measurement attached to one instance."""

    model_config = ConfigDict(frozen=True)

    kind: MarginKind
    value: float = Field(..., description="LPS is stored integer-valued")
    instance_id: int
    epoch: int | None = None


class EpochRecord(BaseModel):
    """One row of the training log."""

    epoch: int = Field(..., ge=1)
    lr: float
    mean_loss: float
    natural_acc: float = Field(..., ge=0, le=100)
    robust_acc: float = Field(..., ge=0, le=100)
    weight_min: float
    weight_mean: float
    weight_max: float
    weight_std: float
    burn_in: bool
    threat_violations: int = 0


class MethodMetrics(BaseModel):
    """Accuracies (%) of one method, seed-averaged when ``seeds`` > 1."""

    method: str
    nat: float | None = Field(default=None, ge=0, le=100)
    pgd: float | None = Field(default=None, ge=0, le=100)
    cw: float | None = Field(default=None, ge=0, le=100)
    nat_std: float = 0.0
    pgd_std: float = 0.0
    cw_std: float = 0.0
    seeds: int = 1


class ExperimentReport(BaseModel):
    """A metric table (rows = methods, columns = NAT / PGD-k / CW)."""

    name: str
    config: dict[str, Any] = Field(default_factory=dict)
    pgd_steps: int
    methods: list[MethodMetrics] = Field(default_factory=list)
    artifacts: list[str] = Field(default_factory=list)

    @property
    def metric_columns(self) -> list[str]:
        return ["NAT", f"PGD-{self.pgd_steps}", "CW"]


class LpsHistogramRow(BaseModel):
    lps: int = Field(..., ge=0)
    count: int = Field(..., ge=0)
    critical_count: int = Field(..., ge=0)


class BoxplotRow(BaseModel):
    """Five-number summary of PM_nat for one LPS group."""

    lps: int = Field(..., ge=0)
    count: int = Field(..., ge=1)
    whisker_low: float
    q1: float
    median: float
    q3: float
    whisker_high: float
    outliers: list[float] = Field(default_factory=list)


class PathDemoReport(BaseModel):
    """Exemplar where plain PGD stalls while LM-PGD crosses."""

    found: bool
    searched: int
    max_steps: int
    instance_id: int | None = None
    pgd_lps: int | None = None
    lm_pgd_lps: int | None = None
    pgd_pm_adv: float | None = None
    lm_pgd_pm_adv: float | None = None
    pgd_losses: list[float] = Field(default_factory=list)
    lm_pgd_losses: list[float] = Field(default_factory=list)
    message: str = ""
