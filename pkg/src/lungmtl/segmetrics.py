"""Voxel-overlap metrics between predicted and ground-truth masks.

Zero-denominator policy: Dice of two empty masks is 1.0 (perfect
agreement), precision with no predicted positives is NaN, and MCC with
any zero factor under the root is 0.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .volume import Mask3D


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise InputError(f"confusion count {name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(pred: Mask3D, truth: Mask3D) -> ConfusionCounts:
    if pred.dims != truth.dims:
        raise InputError(f"mask dims differ: pred {pred.dims} vs truth {truth.dims}")
    p = pred.voxels.astype(bool)
    t = truth.voxels.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def dice(c: ConfusionCounts) -> float:
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0
    return 2 * c.tp / denom


def jaccard(c: ConfusionCounts) -> float:
    d = dice(c)
    return d / (2.0 - d)


def precision(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp
    if denom == 0:
        return math.nan
    return c.tp / denom


def mcc(c: ConfusionCounts) -> float:
    factors = (
        (c.tp + c.fn),
        (c.tp + c.fp),
        (c.tn + c.fp),
        (c.tn + c.fn),
    )
    if any(f == 0 for f in factors):
        return 0.0
    num = c.tp * c.tn - c.fp * c.fn
    # factors can overflow float64 precision for large volumes; compute the
    # root in log space and apply the sign separately
    log_denom = 0.5 * sum(math.log(f) for f in factors)
    if num == 0:
        return 0.0
    return math.copysign(math.exp(math.log(abs(num)) - log_denom), num)


def all_metrics(c: ConfusionCounts) -> dict[str, float]:
    return {
        "dice": dice(c),
        "jaccard": jaccard(c),
        "mcc": mcc(c),
        "precision": precision(c),
    }
