"""Pydantic models for experiment configuration.

Every hyperparameter of a run lives here. ``TrainConfig`` round-trips
through a single JSON document whose keys mirror its fields.
"""

from enum import StrEnum
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import CONFIG

CIFAR_EPSILON = 8 / 255
CIFAR_STEP_SIZE = 2 / 255


class AttackLoss(StrEnum):
    """Ascent objective of a PGD attack."""

    CE = "CE"
    CW = "CW"
    KL = "KL"


class GenerationStyle(StrEnum):
    """How training perturbations are generated."""

    AT = "AT"
    TRADES = "TRADES"
    CW = "CW"

    @property
    def attack_loss(self) -> AttackLoss:
        return {
            GenerationStyle.AT: AttackLoss.CE,
            GenerationStyle.TRADES: AttackLoss.KL,
            GenerationStyle.CW: AttackLoss.CW,
        }[self]


class MarginKind(StrEnum):
    PM_NAT = "PM_NAT"
    PM_ADV = "PM_ADV"
    PM_DIF = "PM_DIF"
    MM = "MM"
    LPS = "LPS"


class AssignmentKind(StrEnum):
    SIGMOID = "SIGMOID"
    HINGE = "HINGE"
    STEP = "STEP"


class ObjectiveKind(StrEnum):
    """Training objective; STANDARD is clean training without attacks."""

    STANDARD = "STANDARD"
    AT = "AT"
    TRADES = "TRADES"
    MART = "MART"
    MAIL_AT = "MAIL_AT"
    MAIL_TRADES = "MAIL_TRADES"
    MAIL_MART = "MAIL_MART"

    @property
    def is_reweighted(self) -> bool:
        return self.value.startswith("MAIL_")

    @property
    def is_adversarial(self) -> bool:
        return self is not ObjectiveKind.STANDARD

    @property
    def base(self) -> "ObjectiveKind":
        """The un-reweighted objective (MAIL_AT -> AT)."""
        return ObjectiveKind(self.value.removeprefix("MAIL_"))

    @property
    def generation(self) -> GenerationStyle:
        """Perturbation style used by the matching training algorithm."""
        if self.base is ObjectiveKind.TRADES:
            return GenerationStyle.TRADES
        return GenerationStyle.AT


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ThreatModel(_Frozen):
    """L-infinity ball of radius ``epsilon`` with an optional input box."""

    epsilon: float = Field(
        default=CIFAR_EPSILON,
        ge=0,
        description="L-infinity radius; 0 is the degenerate zero threat",
    )
    clamp_domain: tuple[float, float] | None = Field(
        default=None, description="Optional [lo, hi] box for x + delta"
    )

    @model_validator(mode="after")
    def _check_domain(self) -> Self:
        if self.clamp_domain is not None:
            lo, hi = self.clamp_domain
            if not lo < hi:
                msg = f"clamp_domain needs lo < hi, got {self.clamp_domain}"
                raise ValueError(msg)
        return self


class AttackConfig(_Frozen):
    steps: int = Field(default=10, ge=1, description="T, max iterations")
    step_size: float = Field(default=CIFAR_STEP_SIZE, gt=0)
    loss_kind: AttackLoss = AttackLoss.CE
    rand_init: bool = True
    seed: int = 0


class LmPgdConfig(_Frozen):
    """Momentum and line-search settings for the LM-PGD attack."""

    momentum: float = Field(default=0.8, ge=0, lt=1)
    alpha_min: float = Field(default=4 / 255, ge=0)
    alpha_min_steps: int | None = Field(
        default=15,
        ge=0,
        description="Iterations using alpha_min; the bound is 0 afterwards",
    )
    alpha_max: float = Field(default=6 / 255, ge=0)
    line_search_points: int = Field(
        default=CONFIG.numeric.line_search_points, ge=0
    )
    loss_kind: AttackLoss = AttackLoss.CE

    @model_validator(mode="after")
    def _check_bounds(self) -> Self:
        if self.alpha_min > self.alpha_max:
            msg = (
                f"alpha_min ({self.alpha_min}) must not exceed "
                f"alpha_max ({self.alpha_max})"
            )
            raise ValueError(msg)
        return self

    def alpha_bounds(self, step: int) -> tuple[float, float]:
        """Line-search interval for the 1-based iteration ``step``."""
        lower = self.alpha_min
        if self.alpha_min_steps is not None and step > self.alpha_min_steps:
            lower = 0.0
        return lower, self.alpha_max

    @classmethod
    def momentum_demo(cls) -> "LmPgdConfig":
        return cls(
            momentum=0.8,
            alpha_min=4 / 255,
            alpha_min_steps=15,
            alpha_max=6 / 255,
        )

    @classmethod
    def plain(cls, step_size: float) -> "LmPgdConfig":
        """Momentum-free single-point grid, equivalent to vanilla PGD."""
        return cls(
            momentum=0.0,
            alpha_min=step_size,
            alpha_min_steps=None,
            alpha_max=step_size,
            line_search_points=1,
        )


class WeightConfig(_Frozen):
    assignment: AssignmentKind = AssignmentKind.SIGMOID
    slope: float = Field(default=10.0, ge=0, description="gamma")
    bias: float = Field(default=-0.5, description="beta of the assignment")
    step_alpha: float = Field(default=0.2, ge=0, le=1)
    burn_in_epochs: int = Field(default=74, ge=0)
    margin_kind: MarginKind = MarginKind.PM_ADV

    @model_validator(mode="after")
    def _check_margin(self) -> Self:
        if self.margin_kind is MarginKind.LPS:
            msg = "LPS is a measurement only and cannot drive reweighting"
            raise ValueError(msg)
        return self

    @classmethod
    def for_objective(
        cls, kind: ObjectiveKind, *, burn_in_epochs: int = 74
    ) -> "WeightConfig":
        """Reference slope/bias: 10/-0.5 for AT, 2/0 for TRADES and MART."""
        if kind.base is ObjectiveKind.AT:
            return cls(slope=10.0, bias=-0.5, burn_in_epochs=burn_in_epochs)
        return cls(slope=2.0, bias=0.0, burn_in_epochs=burn_in_epochs)


class ObjectiveConfig(_Frozen):
    kind: ObjectiveKind = ObjectiveKind.MAIL_AT
    tradeoff: float = Field(
        default=5.0, gt=0, description="beta weighting the KL/MKL term"
    )

    @classmethod
    def for_kind(cls, kind: ObjectiveKind) -> "ObjectiveConfig":
        """Reference trade-off: 5 for TRADES, 6 for MART."""
        tradeoff = 6.0 if kind.base is ObjectiveKind.MART else 5.0
        return cls(kind=kind, tradeoff=tradeoff)


class LrDrop(_Frozen):
    epoch: int = Field(ge=1)
    divisor: float = Field(gt=0)


class TrainConfig(_Frozen):
    """All hyperparameters of one training run."""

    epochs: int = Field(default=CONFIG.desk.epochs, ge=1)
    batch_size: int = Field(default=128, ge=1)
    lr: float = Field(default=0.01, gt=0)
    lr_drops: list[LrDrop] = Field(
        default_factory=lambda: [
            LrDrop(epoch=epoch, divisor=10.0)
            for epoch in CONFIG.desk.lr_drop_epochs
        ]
    )
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=3.5e-3, ge=0)
    seed: int = 0
    hidden_layers: tuple[int, ...] = Field(
        default=(16, 16), description="Widths of the ReLU hidden layers"
    )
    threat: ThreatModel = Field(default_factory=ThreatModel)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    weight: WeightConfig = Field(default_factory=WeightConfig)
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    generation: GenerationStyle | None = Field(
        default=None,
        description="Override of the objective-matched perturbation style",
    )

    @property
    def generation_style(self) -> GenerationStyle:
        return self.generation or self.objective.kind.generation

    def lr_at(self, epoch: int) -> float:
        """Piecewise-constant learning rate for the 1-based ``epoch``."""
        lr = self.lr
        for drop in sorted(self.lr_drops, key=lambda d: d.epoch):
            if epoch >= drop.epoch:
                lr /= drop.divisor
        return lr

    def with_objective(self, kind: ObjectiveKind) -> "TrainConfig":
        """Same schedule and weighting retargeted to ``kind``.

        Takes the reference trade-off of ``kind`` and its matching attack
        loss; the weight configuration is kept as it is.
        """
        attack = self.attack.model_copy(
            update={"loss_kind": kind.generation.attack_loss}
        )
        return self.model_copy(
            update={
                "objective": ObjectiveConfig.for_kind(kind),
                "attack": attack,
                "generation": None,
            }
        )

    def with_seed(self, seed: int) -> "TrainConfig":
        """Reseed initialization, batch order and attack starts together."""
        attack = self.attack.model_copy(update={"seed": seed})
        return self.model_copy(update={"seed": seed, "attack": attack})

    @classmethod
    def cifar_defaults(cls, kind: ObjectiveKind) -> "TrainConfig":
        """Full-scale CIFAR-10/ResNet-18 settings."""
        return cls(
            epochs=100,
            batch_size=128,
            lr=0.01,
            lr_drops=[
                LrDrop(epoch=75, divisor=10.0),
                LrDrop(epoch=90, divisor=10.0),
            ],
            momentum=0.9,
            weight_decay=3.5e-3,
            threat=ThreatModel(epsilon=CIFAR_EPSILON, clamp_domain=(0, 1)),
            attack=AttackConfig(
                steps=10,
                step_size=CIFAR_STEP_SIZE,
                loss_kind=kind.generation.attack_loss,
            ),
            weight=WeightConfig.for_objective(kind, burn_in_epochs=74),
            objective=ObjectiveConfig.for_kind(kind),
        )

    @classmethod
    def desk_defaults(
        cls,
        kind: ObjectiveKind,
        *,
        seed: int = 0,
        epsilon: float = 0.15,
        step_size: float = 0.03,
    ) -> "TrainConfig":
        """Two-moons sized run: 30 epochs, burn-in 15, drops at 23/27.

        Every reweighted kind gets the desk sigmoid (slope 2, bias 0);
        ``cifar_defaults`` keeps the per-objective reference values.
        """
        desk = CONFIG.desk
        return cls(
            epochs=desk.epochs,
            batch_size=128,
            lr=desk.lr,
            lr_drops=[
                LrDrop(epoch=epoch, divisor=10.0)
                for epoch in desk.lr_drop_epochs
            ],
            momentum=0.9,
            weight_decay=5e-4,
            seed=seed,
            threat=ThreatModel(epsilon=epsilon),
            attack=AttackConfig(
                steps=10,
                step_size=step_size,
                loss_kind=kind.generation.attack_loss,
                seed=seed,
            ),
            weight=WeightConfig(
                slope=desk.weight_slope,
                bias=desk.weight_bias,
                burn_in_epochs=desk.burn_in_epochs,
            ),
            objective=ObjectiveConfig.for_kind(kind),
        )


class SyntheticKind(StrEnum):
    GAUSSIAN_BLOBS = "GAUSSIAN_BLOBS"
    TWO_MOONS = "TWO_MOONS"
    CONCENTRIC_RINGS = "CONCENTRIC_RINGS"


class SyntheticSpec(_Frozen):
    kind: SyntheticKind = SyntheticKind.TWO_MOONS
    n_per_class: int = Field(default=500, ge=1)
    noise: float = Field(default=0.1, ge=0)
    seed: int = 0
    num_classes: int = Field(default=2, ge=2)
    radius: float = Field(default=2.0, gt=0)

    @model_validator(mode="after")
    def _check_moons(self) -> Self:
        moons = self.kind is SyntheticKind.TWO_MOONS
        if moons and self.num_classes != 2:  # noqa: PLR2004
            msg = "TWO_MOONS always has exactly 2 classes"
            raise ValueError(msg)
        return self


class CsvSchema(_Frozen):
    """Layout of a CSV dataset: features then an integer label per row."""

    num_features: int = Field(ge=1)
    label_position: str = Field(default="last", pattern=r"^(first|last)$")
    has_header: bool | None = Field(
        default=None, description="None detects a non-numeric first row"
    )
    num_classes: int | None = Field(default=None, ge=2)
    domain_box: tuple[float, float] | None = None


class EvalAttack(StrEnum):
    NAT = "NAT"
    PGD = "PGD"
    CW = "CW"


class AttackSuite(_Frozen):
    """White-box evaluation: clean, CE-ascent PGD-k and CW-margin PGD-k."""

    threat: ThreatModel = Field(default_factory=ThreatModel)
    steps: int = Field(default=CONFIG.desk.eval_pgd_steps, ge=1)
    step_size: float = Field(default=CIFAR_STEP_SIZE, gt=0)
    rand_init: bool = True
    seed: int = 0
    attacks: tuple[EvalAttack, ...] = (
        EvalAttack.NAT,
        EvalAttack.PGD,
        EvalAttack.CW,
    )

    def attack_config(self, loss_kind: AttackLoss) -> AttackConfig:
        return AttackConfig(
            steps=self.steps,
            step_size=self.step_size,
            loss_kind=loss_kind,
            rand_init=self.rand_init,
            seed=self.seed,
        )


class AblationMatrix(_Frozen):
    """Axes of the ablation tables; an empty axis skips its table."""

    margin_kinds: tuple[MarginKind, ...] = (MarginKind.MM, MarginKind.PM_ADV)
    assignments: tuple[AssignmentKind, ...] = (
        AssignmentKind.HINGE,
        AssignmentKind.STEP,
        AssignmentKind.SIGMOID,
    )
    generations: tuple[GenerationStyle, ...] = (
        GenerationStyle.AT,
        GenerationStyle.CW,
        GenerationStyle.TRADES,
    )
    generation_objectives: tuple[ObjectiveKind, ...] = (
        ObjectiveKind.MAIL_AT,
        ObjectiveKind.MAIL_TRADES,
    )
    base_objective: ObjectiveKind = ObjectiveKind.MAIL_TRADES
    seeds: tuple[int, ...] = (0,)
