"""Shared-trunk feed-forward multitask network with manual backprop.

Four fully connected ReLU layers (256, 128, 64, 32) feed one softmax head
per task (2, 2 and 3 classes). The backward pass returns the exact
gradient of the weighted total loss for fixed task weights; in uncertainty
mode the per-task log-variance parameters receive their own gradients.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, InputError, NumericError
from .losses import LOG_CLAMP, TaskBatch

TRUNK_WIDTHS = (256, 128, 64, 32)
TASK_NAMES = ("covid_ct", "covid_nat", "severity")
TASK_CLASSES = (2, 2, 3)
LOSS_MODES = ("random_weighted", "mean", "uncertainty")


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise InputError(f"labels outside [0, {n_classes})")
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class MtlNet:
    def __init__(self, n_inputs: int, trunk_widths=TRUNK_WIDTHS, task_classes=TASK_CLASSES):
        if n_inputs < 1:
            raise ConfigError(f"need at least one input feature, got {n_inputs}")
        self.n_inputs = int(n_inputs)
        self.trunk_widths = tuple(int(w) for w in trunk_widths)
        self.task_classes = tuple(int(c) for c in task_classes)
        self.trunk: list[tuple[np.ndarray, np.ndarray]] = []
        fan_in = self.n_inputs
        for width in self.trunk_widths:
            self.trunk.append((np.zeros((fan_in, width)), np.zeros(width)))
            fan_in = width
        self.heads = [
            (np.zeros((fan_in, c)), np.zeros(c)) for c in self.task_classes
        ]
        self.log_variances = np.zeros(len(self.task_classes))

    @property
    def n_tasks(self) -> int:
        return len(self.task_classes)

    def he_init(self, rng: np.random.Generator) -> None:
        """He-normal weights (std sqrt(2 / fan_in)), zero biases."""
        for i, (w, b) in enumerate(self.trunk):
            self.trunk[i] = (rng.normal(0.0, np.sqrt(2.0 / w.shape[0]), w.shape), np.zeros_like(b))
        for i, (w, b) in enumerate(self.heads):
            self.heads[i] = (rng.normal(0.0, np.sqrt(2.0 / w.shape[0]), w.shape), np.zeros_like(b))
        self.log_variances = np.zeros(self.n_tasks)

    # -- parameter plumbing ------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in self.trunk + self.heads:
            out.extend([w, b])
        out.append(self.log_variances)
        return out

    def set_parameters(self, params: list[np.ndarray]) -> None:
        it = iter(params)
        self.trunk = [(next(it), next(it)) for _ in self.trunk]
        self.heads = [(next(it), next(it)) for _ in self.heads]
        self.log_variances = next(it)

    def flat_parameters(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat_parameters(self, flat: np.ndarray) -> None:
        params = []
        offset = 0
        for p in self.parameters():
            params.append(np.asarray(flat[offset:offset + p.size], dtype=np.float64).reshape(p.shape).copy())
            offset += p.size
        self.set_parameters(params)

    # -- forward / backward ------------------------------------------------

    def forward(self, inputs: np.ndarray, return_cache: bool = False):
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise InputError(
                f"inputs must be (batch, {self.n_inputs}), got {x.shape}"
            )
        activations = [x]
        pre = []
        for li, (w, b) in enumerate(self.trunk):
            z = activations[-1] @ w + b
            if not np.isfinite(z).all():
                raise NumericError(f"non-finite activation in trunk layer {li}")
            pre.append(z)
            activations.append(np.maximum(z, 0.0))
        probs = []
        for hi, (w, b) in enumerate(self.heads):
            z = activations[-1] @ w + b
            if not np.isfinite(z).all():
                raise NumericError(f"non-finite activation in head {hi}")
            probs.append(softmax(z))
        probs = tuple(probs)
        if return_cache:
            return probs, (activations, pre)
        return probs

    def task_batch(self, inputs: np.ndarray, labels: tuple[np.ndarray, ...]) -> TaskBatch:
        probs = self.forward(inputs)
        targets = tuple(one_hot(l, c) for l, c in zip(labels, self.task_classes))
        return TaskBatch(predictions=probs, targets=targets)

    def loss_value(self, inputs: np.ndarray, labels, mode: str,
                   weights: np.ndarray | None = None) -> float:
        """Scalar loss used by training and by finite-difference checks."""
        batch = self.task_batch(inputs, labels)
        coeff, extra = self._coefficients(mode, weights)
        return float((coeff * batch.task_losses()).sum() + extra)

    def _coefficients(self, mode: str, weights: np.ndarray | None) -> tuple[np.ndarray, float]:
        if mode == "random_weighted":
            if weights is None:
                raise InputError("random_weighted mode needs sampled task weights")
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != (self.n_tasks,):
                raise InputError(f"{w.shape} weights for {self.n_tasks} tasks")
            return w, 0.0
        if mode == "mean":
            return np.full(self.n_tasks, 1.0 / self.n_tasks), 0.0
        if mode == "uncertainty":
            return np.exp(-self.log_variances), float(self.log_variances.sum())
        raise ConfigError(f"unknown loss mode {mode!r}; expected one of {LOSS_MODES}")

    def backward(self, inputs: np.ndarray, labels, mode: str,
                 weights: np.ndarray | None = None) -> tuple[list[np.ndarray], float]:
        """Exact gradients of the scalar loss in parameter order.

        Sampled weights are treated as constants; no gradient flows through
        the weight sampler.
        """
        x = np.asarray(inputs, dtype=np.float64)
        n = len(x)
        probs, (activations, pre) = self.forward(x, return_cache=True)
        targets = [one_hot(l, c) for l, c in zip(labels, self.task_classes)]
        coeff, extra = self._coefficients(mode, weights)

        top = activations[-1]
        delta_top = np.zeros_like(top)
        head_grads = []
        task_losses = np.empty(self.n_tasks)
        for j, ((w, b), p, t) in enumerate(zip(self.heads, probs, targets)):
            task_losses[j] = float(-(t * np.log(np.maximum(p, LOG_CLAMP))).sum(axis=1).mean())
            dz = coeff[j] * (p - t) / n
            head_grads.extend([top.T @ dz, dz.sum(axis=0)])
            delta_top += dz @ w.T

        trunk_grads = []
        delta = delta_top
        for li in range(len(self.trunk) - 1, -1, -1):
            w, b = self.trunk[li]
            dz = delta * (pre[li] > 0)
            trunk_grads.append(dz.sum(axis=0))
            trunk_grads.append(activations[li].T @ dz)
            delta = dz @ w.T
        trunk_grads.reverse()

        if mode == "uncertainty":
            s_grad = -np.exp(-self.log_variances) * task_losses + 1.0
        else:
            s_grad = np.zeros(self.n_tasks)

        grads = trunk_grads + head_grads + [s_grad]
        loss = float((coeff * task_losses).sum() + extra)
        return grads, loss
