"""Per-case feature extraction over the published manifest.

The masked volume is cropped to the mask bounding box. Original-volume
features combine first-order statistics with GLCM/GLRLM/GLSZM matrices of
the discretized masked voxels. The cropped (unmasked) intensities are then
wavelet-decomposed; each sub-band is discretized under the same scheme
against a 2x-downsampled mask and contributes the GLCM and trimmed GLRLM
features. Features whose statistic is undefined carry NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, InputError
from ..volume import Mask3D, Volume3D
from .firstorder import FIRST_ORDER_NAMES, first_order_features
from .manifest import manifest_names, subband_glrlm_names
from .matrices import (
    GLCM_FEATURE_NAMES,
    GLRLM_FEATURE_NAMES,
    GLSZM_FEATURE_NAMES,
    UNIQUE_DIRECTIONS_3D,
    discretize,
    glcm_features,
    glcm_matrix,
    glrlm_features,
    glrlm_matrix,
    glszm_features,
)
from .wavelet import FILTER_LENGTH, SUBBAND_LABELS, dwt3


@dataclass(frozen=True)
class TextureConfig:
    bins: int = 32
    distance: int = 1
    directions: tuple = UNIQUE_DIRECTIONS_3D
    symmetric: bool = True

    def __post_init__(self):
        if self.bins < 2:
            raise ConfigError(f"bins must be >= 2, got {self.bins}")
        if self.distance < 1:
            raise ConfigError(f"distance must be >= 1, got {self.distance}")
        if not self.directions:
            raise ConfigError("direction set must be non-empty")
        if self.symmetric:
            seen = set()
            for d in self.directions:
                if tuple(-c for c in d) in seen:
                    raise ConfigError(f"antipodal duplicate direction {d} under symmetry")
                seen.add(tuple(d))


@dataclass(frozen=True)
class FeatureVector:
    case_id: str
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.names) != len(set(self.names)):
            raise InputError("feature names must be unique")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.names),):
            raise InputError("feature values must align with names")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def crop_to_mask(vol: Volume3D, mask: Mask3D, min_extent: int = FILTER_LENGTH) -> tuple[np.ndarray, np.ndarray]:
    """Bounding-box crop, widened where needed to the wavelet minimum."""
    m = mask.voxels.astype(bool)
    if not m.any():
        raise InputError("mask is empty; nothing to extract")
    idx = np.nonzero(m)
    lo = [int(i.min()) for i in idx]
    hi = [int(i.max()) + 1 for i in idx]
    for a in range(3):
        short = min_extent - (hi[a] - lo[a])
        if short > 0:
            lo[a] = max(0, lo[a] - (short + 1) // 2)
            hi[a] = min(mask.dims[a], lo[a] + max(min_extent, hi[a] - lo[a]))
            lo[a] = max(0, hi[a] - max(min_extent, hi[a] - lo[a]))
        if hi[a] - lo[a] < min_extent:
            raise InputError(
                f"axis {a} of the volume is too short for wavelet decomposition "
                f"({mask.dims[a]} < {min_extent})"
            )
    sl = tuple(slice(l, h) for l, h in zip(lo, hi))
    return vol.voxels[sl].astype(np.float64), m[sl]


def downsample_mask(mask: np.ndarray) -> np.ndarray:
    """Any-voxel 2x block reduction matching decimated sub-band dims."""
    m = np.asarray(mask).astype(bool)
    pads = [(0, d % 2) for d in m.shape]
    m = np.pad(m, pads)
    return (
        m.reshape(m.shape[0] // 2, 2, m.shape[1] // 2, 2, m.shape[2] // 2, 2)
        .any(axis=(1, 3, 5))
    )


def _texture_block(voxels: np.ndarray, mask: np.ndarray, cfg: TextureConfig,
                   families: tuple[str, ...]) -> dict[str, dict[str, float]]:
    labeled = discretize(voxels, mask, cfg.bins)
    n_masked = int(mask.sum())
    out: dict[str, dict[str, float]] = {}
    if "glcm" in families:
        p = glcm_matrix(labeled, cfg.distance, cfg.directions, n_levels=cfg.bins)
        out["glcm"] = glcm_features(p)
    if "glrlm" in families:
        r = glrlm_matrix(labeled, cfg.directions, n_levels=cfg.bins)
        out["glrlm"] = glrlm_features(r, n_masked)
    if "glszm" in families:
        out["glszm"] = glszm_features(labeled, n_masked, n_levels=cfg.bins)
    return out


def extract_all(vol: Volume3D, mask: Mask3D, cfg: TextureConfig | None = None,
                case_id: str = "case") -> FeatureVector:
    """Full manifest-ordered feature vector for one segmented case."""
    if cfg is None:
        cfg = TextureConfig()
    if vol.dims != mask.dims:
        raise InputError(f"volume dims {vol.dims} differ from mask dims {mask.dims}")
    voxels, m = crop_to_mask(vol, mask)

    values: dict[str, float] = {}
    for name, value in first_order_features(voxels, m, bins=cfg.bins).items():
        values[f"firstorder_{name}"] = value
    blocks = _texture_block(voxels, m, cfg, ("glcm", "glrlm", "glszm"))
    for family in ("glcm", "glrlm", "glszm"):
        for name, value in blocks[family].items():
            values[f"{family}_{name}"] = value

    bands = dwt3(voxels)
    band_mask = downsample_mask(m)
    if not band_mask.any():
        raise InputError("mask too small: empty after sub-band downsampling")
    for band in SUBBAND_LABELS:
        sub = _texture_block(bands[band], band_mask, cfg, ("glcm", "glrlm"))
        for name, value in sub["glcm"].items():
            values[f"{band}_glcm_{name}"] = value
        wanted = set(subband_glrlm_names(band))
        for name, value in sub["glrlm"].items():
            if name in wanted:
                values[f"{band}_glrlm_{name}"] = value

    names = manifest_names()
    missing = [n for n in names if n not in values]
    if missing:
        raise InputError(f"extraction did not produce manifest features: {missing[:5]}")
    return FeatureVector(case_id=case_id, names=names,
                         values=np.array([values[n] for n in names]))
