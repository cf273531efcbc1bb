"""First-order intensity statistics over masked voxels."""

from __future__ import annotations

import numpy as np

from ..errors import InputError

FIRST_ORDER_NAMES = (
    "Mean", "Median", "Minimum", "Maximum", "Range", "Percentile10",
    "Percentile90", "InterquartileRange", "Energy", "RootMeanSquared",
    "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
    "StandardDeviation", "Variance", "Skewness", "Kurtosis", "Entropy",
    "Uniformity",
)

_EPS = np.spacing(1.0)


def first_order_features(voxels: np.ndarray, mask: np.ndarray, bins: int = 32) -> dict[str, float]:
    m = np.asarray(mask).astype(bool)
    if not m.any():
        raise InputError("cannot compute first-order statistics on an empty mask")
    v = np.asarray(voxels, dtype=np.float64)[m]
    mean = float(v.mean())
    sd = float(v.std())             # population standard deviation
    p10, p25, p75, p90 = np.percentile(v, [10, 25, 75, 90])
    robust = v[(v >= p10) & (v <= p90)]
    if sd > 0:
        centred = (v - mean) / sd
        skew = float((centred**3).mean())
        kurt = float((centred**4).mean())   # plain (non-excess) kurtosis
    else:
        skew = 0.0
        kurt = 0.0
    hist, _ = np.histogram(v, bins=bins)
    p = hist / hist.sum()
    return {
        "Mean": mean,
        "Median": float(np.median(v)),
        "Minimum": float(v.min()),
        "Maximum": float(v.max()),
        "Range": float(v.max() - v.min()),
        "Percentile10": float(p10),
        "Percentile90": float(p90),
        "InterquartileRange": float(p75 - p25),
        "Energy": float((v**2).sum()),
        "RootMeanSquared": float(np.sqrt((v**2).mean())),
        "MeanAbsoluteDeviation": float(np.abs(v - mean).mean()),
        "RobustMeanAbsoluteDeviation": float(np.abs(robust - robust.mean()).mean()) if robust.size else 0.0,
        "StandardDeviation": sd,
        "Variance": float(v.var()),
        "Skewness": skew,
        "Kurtosis": kurt,
        "Entropy": float(-(p * np.log2(p + _EPS)).sum()),
        "Uniformity": float((p**2).sum()),
    }
