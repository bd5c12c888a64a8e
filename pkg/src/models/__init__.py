"""Models package: validated configuration and report schemas."""

from .config import (
    AblationMatrix,
    AssignmentKind,
    AttackConfig,
    AttackLoss,
    AttackSuite,
    CsvSchema,
    EvalAttack,
    GenerationStyle,
    LmPgdConfig,
    LrDrop,
    MarginKind,
    ObjectiveConfig,
    ObjectiveKind,
    SyntheticKind,
    SyntheticSpec,
    ThreatModel,
    TrainConfig,
    WeightConfig,
)
from .results import (
    BoxplotRow,
    EpochRecord,
    ExperimentReport,
    LpsHistogramRow,
    MarginScore,
    MethodMetrics,
    PathDemoReport,
)

__all__ = [
    "AblationMatrix",
    "AssignmentKind",
    "AttackConfig",
    "AttackLoss",
    "AttackSuite",
    "BoxplotRow",
    "CsvSchema",
    "EpochRecord",
    "EvalAttack",
    "ExperimentReport",
    "GenerationStyle",
    "LmPgdConfig",
    "LpsHistogramRow",
    "LrDrop",
    "MarginKind",
    "MarginScore",
    "MethodMetrics",
    "ObjectiveConfig",
    "ObjectiveKind",
    "PathDemoReport",
    "SyntheticKind",
    "SyntheticSpec",
    "ThreatModel",
    "TrainConfig",
    "WeightConfig",
]
