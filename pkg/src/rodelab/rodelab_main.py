"""Command-line entry point for rodelab.

Commands:
    train           Train on an experiment file, one run per seed.
    eval            Greedy evaluation of a checkpoint.
    transfer        Zero-shot evaluation on an environment with new actions.
    ablate          Train one ablation variant of an experiment.
    sweep           Train once per role interval.
    cluster-report  Cluster a checkpoint's action representations.
    plot            Learning-curve and role-frequency figures from a metrics log.

Exit codes: 0 success, 1 runtime error, 2 configuration or argument error,
3 training aborted on a non-finite loss.
"""

from __future__ import annotations

import argparse
import json
import logging
from collections.abc import Callable, Sequence
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any

from rodelab.config.constants import ROLE_INTERVAL_SWEEP
from rodelab.config.defaults import (
    CHECKPOINT_DIR_NAME,
    CHECKPOINT_FILE_NAME,
    CONFIG_ECHO_FILE_NAME,
    METRICS_FILE_NAME,
)
from rodelab.config.experiment import (
    LOG_LEVELS,
    ExperimentConfig,
    load_experiment,
    resolve_seeds,
    write_experiment,
)
from rodelab.config.records import ConfigError
from rodelab.core.envs.registry import ENVS, env_config_from_dict, make_env
from rodelab.core.plotting.plotting import emit_plots
from rodelab.core.roles.clustering import cluster_report
from rodelab.core.trainer.agent import RodeAgent
from rodelab.core.trainer.config import TrainConfig
from rodelab.core.trainer.learner import NonFiniteLossError
from rodelab.core.trainer.model import (
    EvalResult,
    evaluate,
    evaluation_seed_rng,
    run_training,
    run_transfer,
)
from rodelab.utils.checkpoint import (
    Checkpoint,
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
)
from rodelab.utils.log_setup import configure_logging
from rodelab.utils.metrics import MetricsWriter
from rodelab.version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_NON_FINITE = 3


# ------------------ Helpers ------------------
def _emit(data: dict[str, Any]) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _eval_dict(result: EvalResult) -> dict[str, Any]:
    return asdict(result)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        msg = f"must be a positive integer, got {value}"
        raise argparse.ArgumentTypeError(msg)
    return value


def _env_factory_for(ckpt: Checkpoint, env_name: str | None) -> Callable:
    """Factory for ``env_name``; the checkpoint's own env keeps its overrides."""
    name = env_name or ckpt.env_name
    if name == ckpt.env_name:
        config = env_config_from_dict(name, ckpt.env_config)
    else:
        config = env_config_from_dict(name)
    return lambda seed: make_env(name, config, seed)


def train_runs(
    experiment: ExperimentConfig,
    out_dir: Path,
    configure: Callable[[TrainConfig], TrainConfig] | None = None,
) -> list[Path]:
    """Train every seed of ``experiment`` under ``out_dir/seed_<n>``.

    Returns:
        Final checkpoint paths, one per seed.

    """
    write_experiment(experiment, out_dir / CONFIG_ECHO_FILE_NAME)
    env_config = experiment.env.to_dict()
    finals = []
    for seed in experiment.seeds:
        config = experiment.train_config(seed)
        if configure is not None:
            config = configure(config)
        run_dir = out_dir / f"seed_{seed}"
        ckpt_dir = run_dir / CHECKPOINT_DIR_NAME

        def on_eval(agent: RodeAgent, step: int, ckpt_dir: Path = ckpt_dir) -> None:
            save_checkpoint(
                ckpt_dir / f"step_{step}.h5", agent, experiment.env_name, env_config
            )

        logger.info("Training %s seed %d into %s", experiment.env_name, seed, run_dir)
        with MetricsWriter(run_dir / METRICS_FILE_NAME, fresh=True) as metrics:
            result = run_training(config, experiment.env_factory(), metrics, on_eval)
        final = run_dir / CHECKPOINT_FILE_NAME
        finals.append(
            save_checkpoint(final, result.agent, experiment.env_name, env_config)
        )
    return finals


def _load_for_run(args: argparse.Namespace) -> tuple[ExperimentConfig, Path]:
    experiment = resolve_seeds(load_experiment(Path(args.config)), args.seed)
    if args.log_level is None:
        configure_logging(experiment.logging.log_level)
    out_dir = Path(args.out) if args.out is not None else experiment.out_dir
    return experiment, out_dir


# ------------------ Commands ------------------
def cmd_train(args: argparse.Namespace) -> int:
    """Train every configured seed and write checkpoints and metrics."""
    experiment, out_dir = _load_for_run(args)
    finals = train_runs(experiment, out_dir)
    _emit({"checkpoints": [str(p) for p in finals], "out_dir": str(out_dir)})
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    """Train ablation ``--variant`` of an experiment."""
    experiment, out_dir = _load_for_run(args)
    variant = args.variant.upper()
    finals = train_runs(
        experiment, out_dir / f"variant_{variant}", lambda c: c.with_ablation(variant)
    )
    _emit({"variant": variant, "checkpoints": [str(p) for p in finals]})
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Train once per role interval."""
    experiment, out_dir = _load_for_run(args)
    intervals = tuple(args.intervals) if args.intervals else ROLE_INTERVAL_SWEEP
    outputs = {}
    for c in intervals:
        finals = train_runs(
            experiment,
            out_dir / f"interval_{c}",
            lambda cfg, c=c: replace(cfg, role_interval=c),
        )
        outputs[str(c)] = [str(p) for p in finals]
    _emit({"intervals": outputs})
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Evaluate a checkpoint greedily."""
    ckpt = load_checkpoint(Path(args.ckpt))
    factory = _env_factory_for(ckpt, args.env)
    env_seed, rng = evaluation_seed_rng(args.seed)
    result = evaluate(ckpt.agent, factory(env_seed), args.episodes, rng)
    _emit({"env": args.env or ckpt.env_name, **_eval_dict(result)})
    return EXIT_OK


def cmd_transfer(args: argparse.Namespace) -> int:
    """Map new actions onto trained roles and evaluate without training."""
    ckpt = load_checkpoint(Path(args.ckpt))
    factory = _env_factory_for(ckpt, args.env)
    metrics = MetricsWriter(Path(args.metrics)) if args.metrics else None
    try:
        result = run_transfer(
            ckpt.agent, factory, args.episodes, args.seed, args.repr_steps, metrics
        )
    finally:
        if metrics is not None:
            metrics.close()
    _emit(
        {
            "env": args.env or ckpt.env_name,
            "action_count": result.action_count,
            "roles": result.roleset.to_lists(),
            "evaluation": _eval_dict(result.evaluation),
            "random_baseline": _eval_dict(result.random_baseline),
        }
    )
    return EXIT_OK


def cmd_cluster_report(args: argparse.Namespace) -> int:
    """Print the partition and pairwise distances of a checkpoint's table."""
    ckpt = load_checkpoint(Path(args.ckpt))
    agent = ckpt.agent
    if agent.table is None:
        msg = "Checkpoint has no action representations (variant D)"
        raise ValueError(msg)
    env = make_env(ckpt.env_name, env_config_from_dict(ckpt.env_name, ckpt.env_config))
    k = args.k if args.k is not None else agent.roleset.k
    report = cluster_report(
        agent.table,
        min(k, agent.table.action_count),
        seed=args.seed,
        ground_truth=env.ground_truth_partition,
        roleset=agent.roleset,
    )
    _emit({"env": ckpt.env_name, "k": k, **report.to_dict()})
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    """Render figures and tables from a metrics log."""
    metrics_path = Path(args.metrics)
    if not metrics_path.is_file():
        msg = f"Metrics file not found: {metrics_path}"
        raise FileNotFoundError(msg)
    result = emit_plots(metrics_path, Path(args.out))
    _emit(
        {
            "figures": [str(p) for p in result.figures],
            "tables": {k: str(v) for k, v in result.tables.items()},
            "skipped": result.skipped,
        }
    )
    return EXIT_OK


# ------------------ Parser ------------------
def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every command."""
    parser = argparse.ArgumentParser(
        prog="rodelab", description="Role-based multi-agent reinforcement learning"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--log-level",
        default=None,
        type=str.upper,
        choices=LOG_LEVELS,
        help="overrides logging.log_level of experiment files (default INFO)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def run_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment YAML file")
        p.add_argument("--seed", type=int, default=None, help="override the seed list")
        p.add_argument("--out", default=None, help="output directory")
        return p

    run_parser("train", "train on an experiment file").set_defaults(func=cmd_train)

    p = run_parser("ablate", "train an ablation variant")
    p.add_argument(
        "--variant", required=True, choices=["A", "B", "C", "D"], type=str.upper
    )
    p.set_defaults(func=cmd_ablate)

    p = run_parser("sweep", "train once per role interval")
    p.add_argument("--intervals", type=_positive_int, nargs="+", default=None)
    p.set_defaults(func=cmd_sweep)

    envs = sorted(ENVS)
    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--env", default=None, choices=envs)
    p.add_argument("--episodes", type=_positive_int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("transfer", help="zero-shot transfer to a new environment")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--env", default=None, choices=envs)
    p.add_argument("--episodes", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repr-steps", type=int, default=None)
    p.add_argument("--metrics", default=None, help="append a transfer record here")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("cluster-report", help="cluster a checkpoint's representations")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--k", type=_positive_int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cluster_report)

    p = sub.add_parser("plot", help="figures from a metrics log")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_CONFIG
    configure_logging(args.log_level or "INFO")
    try:
        return args.func(args)
    except (ConfigError, CheckpointError, FileNotFoundError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_CONFIG
    except NonFiniteLossError as e:
        logger.error("Training aborted: %s", e)  # noqa: TRY400
        return EXIT_NON_FINITE
    except (ValueError, RuntimeError, OSError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
