from .losses import (
    LossBundle,
    RandomWeightConfig,
    TaskBatch,
    cross_entropy,
    dirichlet_pdf,
    mean_loss,
    sample_task_weights,
    total_loss,
    uncertainty_loss,
)
from .net import MtlNet, TASK_NAMES
from .train import TrainConfig, TrainData, cosine_lr, train

__all__ = [
    "LossBundle",
    "RandomWeightConfig",
    "TaskBatch",
    "cross_entropy",
    "dirichlet_pdf",
    "mean_loss",
    "sample_task_weights",
    "total_loss",
    "uncertainty_loss",
    "MtlNet",
    "TASK_NAMES",
    "TrainConfig",
    "TrainData",
    "cosine_lr",
    "train",
]
