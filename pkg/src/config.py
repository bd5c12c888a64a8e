"""Configuration module for the margin-aware reweighting toolkit.

This module centralizes application-level constants and settings (paths,
logging, numerical tolerances and the desk-scale schedule). Experiment
hyperparameters live in ``models.config`` as validated pydantic models.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


@dataclass
class PathConfig:
    """Configuration for output files and directories."""

    output_dir: Path = Path("runs")

    checkpoint_name: str = "model.ckpt"
    train_log_name: str = "train_log.csv"
    config_name: str = "train_config.json"

    def __post_init__(self) -> None:
        """Override with environment variables if set."""
        self.output_dir = Path(os.getenv("MAIL_OUTPUT_DIR", self.output_dir))


@dataclass
class LoggingConfig:
    """Configuration for the root logger."""

    level: str = "INFO"
    format: str = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

    def __post_init__(self) -> None:
        """Override with environment variables if set."""
        self.level = os.getenv("MAIL_LOG_LEVEL", self.level).upper()


@dataclass
class NumericConfig:
    """Numerical tolerances shared by the network and the attacks."""

    prob_clamp: float = 1e-12
    line_search_points: int = 8
    finite_difference_step: float = 1e-5

    def __post_init__(self) -> None:
        """Override with environment variables if set."""
        env_points = os.getenv(
            "MAIL_LINE_SEARCH_POINTS", self.line_search_points
        )
        self.line_search_points = int(env_points)


@dataclass
class DeskScaleConfig:
    """The 100-epoch reference schedule rescaled to desk-size runs."""

    epochs: int = 30
    burn_in_epochs: int = 15
    lr: float = 1e-3  # losses are summed over the batch
    weight_slope: float = 2.0
    weight_bias: float = 0.0
    lr_drop_epochs: tuple[int, ...] = (23, 27)
    eval_pgd_steps: int = 20
    demo_max_steps: int = 50

    def __post_init__(self) -> None:
        """Override with environment variables if set."""
        env_steps = os.getenv("MAIL_EVAL_PGD_STEPS", self.eval_pgd_steps)
        self.eval_pgd_steps = int(env_steps)


@dataclass
class AppConfig:
    """Main application configuration."""

    paths: PathConfig = field(default_factory=PathConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    numeric: NumericConfig = field(default_factory=NumericConfig)
    desk: DeskScaleConfig = field(default_factory=DeskScaleConfig)


# Global configuration instance
CONFIG = AppConfig()
