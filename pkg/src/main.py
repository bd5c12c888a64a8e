"""Command-line entry point.

Subcommands: train, eval, measure-lps, measure-boxplot, demo-path, ablate,
compare. Every artifact lands under ``--out``. Exit codes: 0 on success,
2 for configuration, input and load errors, 3 for numeric failures.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from pydantic import ValidationError
from rich.logging import RichHandler

from config import CONFIG
from errors import ConfigurationError, InputError, LoadError, NumericError
from experiments import (
    ablation_suite,
    compare,
    eval_robustness,
    lps_histogram,
    path_dependence_demo,
    pm_vs_lps_boxplot,
    print_report,
    write_boxplot_csv,
    write_histogram_csv,
    write_report,
)
from extractors import Dataset
from models.config import (
    AblationMatrix,
    AttackConfig,
    CsvSchema,
    LmPgdConfig,
    ObjectiveKind,
    SyntheticKind,
    SyntheticSpec,
    TrainConfig,
)
from models.results import ExperimentReport
from network import load_params
from pipeline import (
    DataSource,
    build_config,
    clamp_to_data,
    eval_suite,
    load_dataset,
    run_seeded_training,
)
from utils.file_operations import read_bytes, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def setup_logging() -> None:
    handler = RichHandler(
        show_time=False,
        show_level=False,
        show_path=False,
        rich_tracebacks=True,
    )
    logging.basicConfig(
        level=CONFIG.logging.level,
        format=CONFIG.logging.format,
        handlers=[handler],
    )


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument(
        "--data",
        type=SyntheticKind,
        default=SyntheticKind.TWO_MOONS,
        choices=list(SyntheticKind),
    )
    group.add_argument("--n-per-class", type=int, default=500)
    group.add_argument("--noise", type=float, default=0.1)
    group.add_argument("--num-classes", type=int, default=2)
    group.add_argument("--data-seed", type=int, default=0)
    group.add_argument("--csv", type=Path, help="CSV dataset instead")
    group.add_argument("--num-features", type=int, default=2)
    group.add_argument("--idx-images", type=Path)
    group.add_argument("--idx-labels", type=Path)
    group.add_argument("--test-fraction", type=float, default=0.2)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training configuration")
    group.add_argument("--config", type=Path, help="TrainConfig JSON file")
    group.add_argument(
        "--objective", type=ObjectiveKind, choices=list(ObjectiveKind)
    )
    group.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a TrainConfig key, e.g. threat.epsilon=0.1",
    )


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", type=Path, required=True)
    parser.add_argument("--epsilon", type=float, default=0.15)
    parser.add_argument("--step-size", type=float, default=0.03)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mail",
        description="Margin-aware instance reweighting for adversarial "
        "training at desk scale.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out", type=Path, default=CONFIG.paths.output_dir
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser(
        "train", help="train and evaluate", parents=[common]
    )
    _add_data_args(train)
    _add_config_args(train)
    train.add_argument("--seeds", type=int, nargs="+", default=[0])
    train.add_argument("--resume", action="store_true")

    evaluate = commands.add_parser(
        "eval", help="NAT / PGD-k / CW-k", parents=[common]
    )
    _add_data_args(evaluate)
    _add_model_args(evaluate)
    evaluate.add_argument(
        "--pgd-steps", type=int, default=CONFIG.desk.eval_pgd_steps
    )

    for name in ("measure-lps", "measure-boxplot"):
        measure = commands.add_parser(
            name, help="LPS measurements", parents=[common]
        )
        _add_data_args(measure)
        _add_model_args(measure)
        measure.add_argument("--steps", type=int, default=10)

    demo = commands.add_parser(
        "demo-path", help="PGD vs LM-PGD exemplar", parents=[common]
    )
    _add_data_args(demo)
    _add_model_args(demo)
    demo.add_argument(
        "--max-steps", type=int, default=CONFIG.desk.demo_max_steps
    )

    ablate = commands.add_parser(
        "ablate", help="ablation tables", parents=[common]
    )
    _add_data_args(ablate)
    _add_config_args(ablate)
    ablate.add_argument("--matrix", type=Path, help="AblationMatrix JSON")
    ablate.add_argument("--seeds", type=int, nargs="+")

    comparison = commands.add_parser(
        "compare", help="STANDARD/AT/MAIL-AT", parents=[common]
    )
    _add_data_args(comparison)
    _add_config_args(comparison)
    comparison.add_argument("--seeds", type=int, nargs="+", default=[0])
    return parser


def _source(args: argparse.Namespace) -> DataSource:
    schema = (
        CsvSchema(num_features=args.num_features)
        if args.csv is not None
        else None
    )
    return DataSource(
        synthetic=SyntheticSpec(
            kind=args.data,
            n_per_class=args.n_per_class,
            noise=args.noise,
            num_classes=args.num_classes,
            seed=args.data_seed,
        ),
        csv_path=args.csv,
        csv_schema=schema,
        idx_images=args.idx_images,
        idx_labels=args.idx_labels,
        test_fraction=args.test_fraction,
        split_seed=args.data_seed,
    )


def _config(args: argparse.Namespace) -> TrainConfig:
    return build_config(
        config_path=args.config,
        objective=args.objective,
        overrides=args.overrides,
    )


def _model_config(args: argparse.Namespace) -> TrainConfig:
    """Threat model and attack step size for the measurement commands."""
    return TrainConfig.desk_defaults(
        ObjectiveKind.AT, epsilon=args.epsilon, step_size=args.step_size
    )


def _show(report: ExperimentReport, out_dir: Path) -> None:
    print_report(write_report(report, out_dir))


def cmd_train(args: argparse.Namespace) -> None:
    data = load_dataset(_source(args))
    report = run_seeded_training(
        _config(args), data, args.out, args.seeds, resume=args.resume
    )
    print_report(report)


def cmd_eval(args: argparse.Namespace) -> None:
    _, test = load_dataset(_source(args))
    config = clamp_to_data(_model_config(args), test)
    params = load_params(args.checkpoint)
    suite = eval_suite(config, steps=args.pgd_steps)
    row = eval_robustness(params, test, suite, method=args.checkpoint.stem)
    report = ExperimentReport(
        name="eval",
        config=suite.model_dump(mode="json"),
        pgd_steps=suite.steps,
        methods=[row],
    )
    _show(report, args.out)


def _measurement_inputs(
    args: argparse.Namespace,
) -> tuple[Dataset, TrainConfig, AttackConfig]:
    _, test = load_dataset(_source(args))
    config = clamp_to_data(_model_config(args), test)
    attack = AttackConfig(
        steps=args.steps, step_size=args.step_size, rand_init=False
    )
    return test, config, attack


def cmd_measure_lps(args: argparse.Namespace) -> None:
    test, config, attack = _measurement_inputs(args)
    params = load_params(args.checkpoint)
    rows = lps_histogram(params, test, attack, config.threat)
    path = write_histogram_csv(args.out / "lps_histogram.csv", rows)
    logger.info("LPS histogram written to %s", path)


def cmd_measure_boxplot(args: argparse.Namespace) -> None:
    test, config, attack = _measurement_inputs(args)
    params = load_params(args.checkpoint)
    rows = pm_vs_lps_boxplot(params, test, attack, config.threat)
    path = write_boxplot_csv(args.out / "pm_vs_lps_boxplot.csv", rows)
    logger.info("PM-vs-LPS box plot written to %s", path)


def cmd_demo_path(args: argparse.Namespace) -> None:
    _, test = load_dataset(_source(args))
    config = clamp_to_data(_model_config(args), test)
    params = load_params(args.checkpoint)
    report = path_dependence_demo(
        test,
        params,
        config.threat,
        lm_config=LmPgdConfig.momentum_demo(),
        step_size=args.step_size,
        max_steps=args.max_steps,
    )
    path = args.out / "path_demo.json"
    write_json(path, report.model_dump(mode="json"))
    logger.info("Path-dependence report written to %s", path)


def cmd_ablate(args: argparse.Namespace) -> None:
    train, test = load_dataset(_source(args))
    config = clamp_to_data(_config(args), train)
    matrix = (
        AblationMatrix.model_validate_json(read_bytes(args.matrix))
        if args.matrix is not None
        else AblationMatrix()
    )
    if args.seeds:
        matrix = matrix.model_copy(update={"seeds": tuple(args.seeds)})
    for report in ablation_suite(
        matrix, config, train, test, eval_suite(config)
    ):
        _show(report, args.out)


def cmd_compare(args: argparse.Namespace) -> None:
    train, test = load_dataset(_source(args))
    config = clamp_to_data(_config(args), train)
    report = compare(config, train, test, eval_suite(config), args.seeds)
    _show(report, args.out)


COMMANDS: dict[str, Callable[[argparse.Namespace], None]] = {
    "train": cmd_train,
    "eval": cmd_eval,
    "measure-lps": cmd_measure_lps,
    "measure-boxplot": cmd_measure_boxplot,
    "demo-path": cmd_demo_path,
    "ablate": cmd_ablate,
    "compare": cmd_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ConfigurationError, InputError, LoadError, ValidationError):
        logger.exception("%s failed", args.command)
        return EXIT_CONFIG
    except NumericError:
        logger.exception("%s failed with a numeric error", args.command)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
