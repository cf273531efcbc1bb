"""One-level separable decimated 3D wavelet decomposition with coif1 filters.

The transform is periodized: each axis is zero-padded to even length where
necessary and filtered circularly, so the eight sub-bands carry exactly
the input energy (the filter bank is orthonormal and padding contributes
none). Sub-band labels give the per-axis filter choice in (z, y, x) order,
'L' for low-pass and 'H' for high-pass.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from ..errors import InputError
from ..volume import Volume3D

# coif1 analysis low-pass filter; the high-pass filter follows from the
# quadrature-mirror relation g[k] = (-1)^k h[L-1-k]
COIF1_DEC_LO = np.array(
    [
        -0.015655728135465555,
        -0.07273261951285,
        0.3848648468648578,
        0.8525720202116004,
        0.33789766245780922,
        -0.07273261951285,
    ]
)
COIF1_DEC_HI = (COIF1_DEC_LO[::-1] * np.array([1.0, -1.0] * 3)).copy()

FILTER_LENGTH = len(COIF1_DEC_LO)
SUBBAND_LABELS = tuple("".join(c) for c in product("LH", repeat=3))


def _dwt_axis(arr: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodized single-level DWT along one axis; returns (low, high)."""
    x = np.moveaxis(arr, axis, -1)
    n = x.shape[-1]
    if n % 2:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, 1)]
        x = np.pad(x, pad)
        n += 1
    k = np.arange(n // 2)[:, None]
    m = np.arange(FILTER_LENGTH)[None, :]
    idx = (2 * k + m) % n
    windows = x[..., idx]
    low = windows @ COIF1_DEC_LO
    high = windows @ COIF1_DEC_HI
    return np.moveaxis(low, -1, axis), np.moveaxis(high, -1, axis)


def dwt3(voxels: np.ndarray) -> dict[str, np.ndarray]:
    """Eight sub-band arrays keyed by LLL..HHH, dims ceil(n/2) per axis."""
    arr = np.asarray(voxels, dtype=np.float64)
    if arr.ndim != 3:
        raise InputError(f"expected a 3D array, got shape {arr.shape}")
    for axis, n in enumerate(arr.shape):
        if n < FILTER_LENGTH:
            raise InputError(
                f"axis {axis} has {n} voxels but the coif1 filter needs at least "
                f"{FILTER_LENGTH}; pad or crop the volume before decomposing"
            )
    bands = {"": arr}
    for axis in range(3):
        next_bands = {}
        for label, data in bands.items():
            low, high = _dwt_axis(data, axis)
            next_bands[label + "L"] = low
            next_bands[label + "H"] = high
        bands = next_bands
    return bands


def wavelet_decompose(vol: Volume3D) -> dict[str, Volume3D]:
    """Decompose a volume; sub-band spacing doubles along every axis."""
    bands = dwt3(vol.voxels)
    spacing = tuple(2.0 * s for s in vol.spacing_mm)
    return {
        label: Volume3D(data.astype(np.float32), spacing, "arbitrary")
        for label, data in bands.items()
    }
