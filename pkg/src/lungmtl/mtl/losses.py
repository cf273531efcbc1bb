"""Multitask losses: Dirichlet random-weighted, mean, and uncertainty forms.

Task weights are drawn from a flat Dirichlet (all-ones concentration) by
normalising i.i.d. unit exponentials, which is exact for that
concentration. Averaging n draws concentrates the weights around 1/K, so
large n degenerates the random-weighted loss towards the plain mean loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InputError

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class RandomWeightConfig:
    n_tasks: int
    n_draws: int = 2

    def __post_init__(self):
        if self.n_tasks < 2:
            raise ConfigError(f"need at least 2 tasks, got {self.n_tasks}")
        if self.n_draws < 1:
            raise ConfigError(f"need at least 1 draw, got {self.n_draws}")


def sample_task_weights(cfg: RandomWeightConfig, rng: np.random.Generator) -> np.ndarray:
    """Average of n flat-Dirichlet draws; components sum to one."""
    draws = rng.exponential(1.0, size=(cfg.n_draws, cfg.n_tasks))
    draws /= draws.sum(axis=1, keepdims=True)
    return draws.mean(axis=0)


def dirichlet_pdf(weights: np.ndarray, alpha: np.ndarray) -> float:
    """Density of the Dirichlet distribution at an interior simplex point."""
    p = np.asarray(weights, dtype=np.float64)
    a = np.asarray(alpha, dtype=np.float64)
    if p.shape != a.shape or p.ndim != 1 or len(p) < 2:
        raise InputError("weights and alpha must be 1D vectors of equal length >= 2")
    if (a <= 0).any():
        raise InputError("alpha components must be positive")
    if abs(p.sum() - 1.0) > 1e-9 or (p <= 0).any():
        raise InputError("point must lie in the interior of the probability simplex")
    log_norm = math.lgamma(float(a.sum())) - sum(math.lgamma(float(x)) for x in a)
    return float(np.exp(log_norm + ((a - 1.0) * np.log(p)).sum()))


def cross_entropy(y_hat: np.ndarray, y: np.ndarray) -> float:
    """-sum y_i log(y_hat_i) with the log argument clamped at 1e-12."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise InputError(f"prediction shape {y_hat.shape} differs from target {y.shape}")
    return float(-(y * np.log(np.maximum(y_hat, LOG_CLAMP))).sum(axis=-1).mean())


@dataclass(frozen=True)
class TaskBatch:
    """Per-task predicted probabilities and one-hot targets for a mini-batch."""

    predictions: tuple[np.ndarray, ...]
    targets: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.predictions) != len(self.targets) or not self.predictions:
            raise InputError("need matching, non-empty prediction/target tuples")
        for j, (p, t) in enumerate(zip(self.predictions, self.targets)):
            p = np.asarray(p, dtype=np.float64)
            t = np.asarray(t, dtype=np.float64)
            if p.shape != t.shape or p.ndim != 2:
                raise InputError(f"task {j}: predictions and targets must be (batch, classes)")
            if (p < -1e-9).any() or (p > 1 + 1e-9).any():
                raise InputError(f"task {j}: probabilities outside [0, 1]")
            if np.abs(p.sum(axis=1) - 1.0).max() > 1e-6:
                raise InputError(f"task {j}: probability rows must sum to 1")
            if not np.array_equal(t.sum(axis=1), np.ones(len(t))) or not np.isin(t, (0.0, 1.0)).all():
                raise InputError(f"task {j}: targets must be one-hot")

    @property
    def n_tasks(self) -> int:
        return len(self.predictions)

    def task_losses(self) -> np.ndarray:
        """Batch-averaged cross-entropy per task."""
        return np.array([
            cross_entropy(p, t) for p, t in zip(self.predictions, self.targets)
        ])

    def clamp_events(self) -> int:
        """Predicted probabilities that hit the log clamp on a target class."""
        n = 0
        for p, t in zip(self.predictions, self.targets):
            n += int(((np.asarray(p) < LOG_CLAMP) & (np.asarray(t) > 0)).sum())
        return n


@dataclass(frozen=True)
class LossBundle:
    task_losses: np.ndarray
    total: float
    clamp_events: int = 0


def total_loss(batch: TaskBatch, weights: np.ndarray) -> float:
    """Weighted sum of per-task cross-entropies for fixed simplex weights."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (batch.n_tasks,):
        raise InputError(
            f"{len(w)} weights provided for {batch.n_tasks} tasks"
        )
    if abs(w.sum() - 1.0) > 1e-6 or (w < 0).any():
        raise InputError("weights must be non-negative and sum to 1")
    return float((w * batch.task_losses()).sum())


def mean_loss(batch: TaskBatch) -> float:
    return float(batch.task_losses().mean())


def uncertainty_loss(batch: TaskBatch, log_variances: np.ndarray) -> float:
    """Kendall-style weighting: sum_j exp(-s_j) L_j + s_j."""
    s = np.asarray(log_variances, dtype=np.float64)
    if s.shape != (batch.n_tasks,):
        raise InputError(f"{len(s)} log-variances provided for {batch.n_tasks} tasks")
    if not np.isfinite(s).all():
        raise InputError("log-variance parameters must be finite")
    losses = batch.task_losses()
    return float((np.exp(-s) * losses + s).sum())
