"""Two-phase training, evaluation, ablations and transfer."""

from rodelab.core.trainer.agent import RodeAgent
from rodelab.core.trainer.config import AblationConfig, TrainConfig
from rodelab.core.trainer.learner import HierarchyLearner, NonFiniteLossError
from rodelab.core.trainer.model import (
    EvalResult,
    Trainer,
    TrainingResult,
    TransferResult,
    evaluate,
    evaluate_random_policy,
    run_ablation,
    run_interval_sweep,
    run_training,
    run_transfer,
)

__all__ = [
    "AblationConfig",
    "EvalResult",
    "HierarchyLearner",
    "NonFiniteLossError",
    "RodeAgent",
    "TrainConfig",
    "Trainer",
    "TrainingResult",
    "TransferResult",
    "evaluate",
    "evaluate_random_policy",
    "run_ablation",
    "run_interval_sweep",
    "run_training",
    "run_transfer",
]
