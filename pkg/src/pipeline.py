"""Orchestration of datasets, training runs and evaluation artifacts."""

import json
import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from config import CONFIG
from errors import ConfigurationError
from experiments import aggregate, eval_robustness, write_report
from extractors import (
    Dataset,
    generate,
    load_csv,
    load_idx,
    split_train_test,
)
from models.config import (
    AttackSuite,
    CsvSchema,
    ObjectiveKind,
    SyntheticSpec,
    TrainConfig,
)
from models.results import ExperimentReport, MethodMetrics
from training import Trainer, TrainState, restore
from utils.file_operations import read_bytes, write_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DataSource:
    """Where a run's data comes from; synthetic unless a file is given."""

    synthetic: SyntheticSpec
    csv_path: Path | None = None
    csv_schema: CsvSchema | None = None
    idx_images: Path | None = None
    idx_labels: Path | None = None
    test_fraction: float = 0.2
    split_seed: int = 0


def load_dataset(source: DataSource) -> tuple[Dataset, Dataset]:
    """Load or generate the data and split it into train and test."""
    if source.idx_images is not None or source.idx_labels is not None:
        if source.idx_images is None or source.idx_labels is None:
            msg = "IDX input needs both an image file and a label file"
            raise ConfigurationError(msg)
        dataset = load_idx(source.idx_images, source.idx_labels)
    elif source.csv_path is not None:
        if source.csv_schema is None:
            msg = "CSV input needs a schema"
            raise ConfigurationError(msg)
        dataset = load_csv(source.csv_path, source.csv_schema)
    else:
        dataset = generate(source.synthetic)
    train, test = split_train_test(
        dataset, source.split_seed, source.test_fraction
    )
    logger.info(
        "Dataset %s: %d train / %d test rows, %d features, %d classes",
        dataset.name,
        len(train),
        len(test),
        dataset.num_features,
        dataset.num_classes,
    )
    return train, test


def _set_path(tree: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = tree
    for key in parents:
        child = node.get(key)
        if not isinstance(child, dict):
            msg = f"unknown config section {key!r} in {dotted!r}"
            raise ConfigurationError(msg)
        node = child
    if leaf not in node:
        msg = f"unknown config key {dotted!r}"
        raise ConfigurationError(msg)
    node[leaf] = value


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def build_config(
    *,
    config_path: Path | None = None,
    objective: ObjectiveKind | None = None,
    overrides: Sequence[str] = (),
) -> TrainConfig:
    """Desk defaults (or a JSON file), then ``key.sub=value`` overrides.

    Raises:
        ConfigurationError: If the file or an override is invalid.
        LoadError: If ``config_path`` cannot be read.
    """
    try:
        if config_path is not None:
            config = TrainConfig.model_validate_json(read_bytes(config_path))
            if objective is not None:
                config = config.with_objective(objective)
        else:
            config = TrainConfig.desk_defaults(
                objective or ObjectiveKind.MAIL_AT
            )
        if not overrides:
            return config
        tree = config.model_dump(mode="json")
        for item in overrides:
            key, sep, raw = item.partition("=")
            if not sep:
                msg = f"override {item!r} is not of the form key=value"
                raise ConfigurationError(msg)
            _set_path(tree, key.strip(), _parse_value(raw.strip()))
        return TrainConfig.model_validate(tree)
    except ValidationError as err:
        msg = f"invalid training configuration: {err}"
        raise ConfigurationError(msg) from err


def clamp_to_data(config: TrainConfig, dataset: Dataset) -> TrainConfig:
    """Adopt the dataset's domain box when the threat model has none."""
    if dataset.domain_box is None or config.threat.clamp_domain is not None:
        return config
    threat = config.threat.model_copy(
        update={"clamp_domain": dataset.domain_box}
    )
    return config.model_copy(update={"threat": threat})


def eval_suite(
    config: TrainConfig, steps: int | None = None, seed: int = 0
) -> AttackSuite:
    """PGD-k / CW-k evaluation under the training threat model."""
    return AttackSuite(
        threat=config.threat,
        steps=CONFIG.desk.eval_pgd_steps if steps is None else steps,
        step_size=config.attack.step_size,
        seed=seed,
    )


def run_training(
    config: TrainConfig,
    data: tuple[Dataset, Dataset],
    out_dir: Path,
    *,
    resume: bool = False,
    suite: AttackSuite | None = None,
) -> tuple[TrainState, MethodMetrics]:
    """Train one model, writing config, log and checkpoint to ``out_dir``.

    With ``resume`` an existing checkpoint in ``out_dir`` is continued.
    """
    start = time.perf_counter()
    train, test = data
    config = clamp_to_data(config, train)
    suite = suite or eval_suite(config)
    paths = CONFIG.paths
    out_dir.mkdir(parents=True, exist_ok=True)
    write_text(
        out_dir / paths.config_name, config.model_dump_json(indent=4) + "\n"
    )

    checkpoint_path = out_dir / paths.checkpoint_name
    trainer = Trainer(config, snapshot_path=out_dir / "snapshot.ckpt")
    state = None
    if resume and checkpoint_path.exists():
        state = restore(
            checkpoint_path,
            expected_dims=trainer.layer_dims(train),
            expected_config=config,
        )
        logger.info("Resuming from epoch %d", state.epoch)

    state = trainer.fit(
        train,
        state=state,
        checkpoint_path=checkpoint_path,
        log_path=out_dir / paths.train_log_name,
    )
    metrics = eval_robustness(
        state.params, test, suite, method=str(config.objective.kind)
    )
    logger.info(
        "Run finished in %.2f seconds", time.perf_counter() - start
    )
    return state, metrics


def run_seeded_training(
    config: TrainConfig,
    data: tuple[Dataset, Dataset],
    out_dir: Path,
    seeds: Sequence[int],
    *,
    resume: bool = False,
) -> ExperimentReport:
    """``run_training`` once per seed (``seed_<n>/`` subdirectories)."""
    suite = eval_suite(clamp_to_data(config, data[0]))
    rows = []
    for seed in seeds:
        _, metrics = run_training(
            config.with_seed(seed),
            data,
            out_dir / f"seed_{seed}",
            resume=resume,
            suite=suite,
        )
        rows.append(metrics)
    method = str(config.objective.kind)
    report = ExperimentReport(
        name="train",
        config=config.model_dump(mode="json"),
        pgd_steps=suite.steps,
        methods=[aggregate(method, rows)],
    )
    return write_report(report, out_dir)
