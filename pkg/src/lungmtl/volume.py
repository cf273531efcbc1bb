"""Canonical 3D volume and mask types with isotropic resampling and file I/O.

Volumes are float32 scalar grids in z-major order with physical voxel
spacing in millimetres. The on-disk format is a raw little-endian payload
(`.f32vol` for volumes, `.u8vol` for masks) next to a JSON sidecar holding
dims, spacing and the unit tag, so round-trips are bit-exact and the
payload stays language-neutral.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import InputError

VOLUME_SUFFIX = ".f32vol"
MASK_SUFFIX = ".u8vol"


@dataclass(frozen=True)
class Volume3D:
    """Immutable 3D scalar grid with physical spacing.

    voxels has shape (nz, ny, nx), dtype float32. spacing_mm is (sz, sy, sx).
    unit is "HU" for CT volumes and "arbitrary" for derived grids such as
    wavelet sub-bands.
    """

    voxels: np.ndarray
    spacing_mm: tuple[float, float, float]
    unit: str = "HU"

    def __post_init__(self):
        vox = np.asarray(self.voxels, dtype=np.float32)
        if vox.ndim != 3 or vox.size == 0:
            raise InputError(f"volume must be a non-empty 3D grid, got shape {vox.shape}")
        if np.isnan(vox).any():
            raise InputError("volume contains NaN voxels")
        spacing = tuple(float(s) for s in self.spacing_mm)
        if len(spacing) != 3 or any(s <= 0 for s in spacing):
            raise InputError(f"spacing components must be positive, got {spacing}")
        if self.unit not in ("HU", "arbitrary"):
            raise InputError(f"unknown unit tag {self.unit!r}")
        object.__setattr__(self, "voxels", vox)
        object.__setattr__(self, "spacing_mm", spacing)
        vox.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.voxels.shape)


@dataclass(frozen=True)
class Mask3D:
    """Binary volume paired to a Volume3D; values restricted to {0, 1}."""

    voxels: np.ndarray
    spacing_mm: tuple[float, float, float]

    def __post_init__(self):
        vox = np.asarray(self.voxels)
        if vox.ndim != 3 or vox.size == 0:
            raise InputError(f"mask must be a non-empty 3D grid, got shape {vox.shape}")
        if not np.isin(vox, (0, 1)).all():
            raise InputError("mask values must be 0 or 1")
        spacing = tuple(float(s) for s in self.spacing_mm)
        if any(s <= 0 for s in spacing):
            raise InputError(f"spacing components must be positive, got {spacing}")
        vox = vox.astype(np.uint8)
        object.__setattr__(self, "voxels", vox)
        object.__setattr__(self, "spacing_mm", spacing)
        vox.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.voxels.shape)

    def count(self) -> int:
        return int(self.voxels.sum())


def _target_dims(dims, spacing, target: float) -> tuple[int, int, int]:
    axis_names = ("z", "y", "x")
    out = []
    for name, n, s in zip(axis_names, dims, spacing):
        m = int(round(n * s / target))
        if m < 1:
            raise InputError(
                f"resampling to {target} mm collapses axis {name} "
                f"({n} voxels at {s} mm) to zero size"
            )
        out.append(m)
    return tuple(out)


def _resample_grid(voxels: np.ndarray, dims_in, spacing, target: float, dims_out, order: int) -> np.ndarray:
    # Voxel centres sit at (i + 0.5) * spacing; output centres are mapped back
    # into input index space and sampled with edge clamping so border values
    # never extrapolate outside the observed range.
    coords = []
    for n_out, n_in, s in zip(dims_out, dims_in, spacing):
        centres = (np.arange(n_out) + 0.5) * target
        coords.append(centres / s - 0.5)
    grid = np.meshgrid(*coords, indexing="ij")
    return map_coordinates(voxels, grid, order=order, mode="nearest")


def resample_isotropic(vol: Volume3D, target_spacing_mm: float) -> Volume3D:
    """Trilinear resampling onto an isotropic grid of the given spacing."""
    if target_spacing_mm <= 0:
        raise InputError(f"target spacing must be positive, got {target_spacing_mm}")
    t = float(target_spacing_mm)
    dims_out = _target_dims(vol.dims, vol.spacing_mm, t)
    if dims_out == vol.dims and all(abs(s - t) < 1e-12 for s in vol.spacing_mm):
        return Volume3D(vol.voxels, (t, t, t), vol.unit)
    out = _resample_grid(vol.voxels.astype(np.float64), vol.dims, vol.spacing_mm, t, dims_out, order=1)
    return Volume3D(out.astype(np.float32), (t, t, t), vol.unit)


def resample_mask_isotropic(mask: Mask3D, target_spacing_mm: float) -> Mask3D:
    """Nearest-neighbour resampling; preserves binarity."""
    if target_spacing_mm <= 0:
        raise InputError(f"target spacing must be positive, got {target_spacing_mm}")
    t = float(target_spacing_mm)
    dims_out = _target_dims(mask.dims, mask.spacing_mm, t)
    if dims_out == mask.dims:
        return Mask3D(mask.voxels, (t, t, t))
    out = _resample_grid(mask.voxels, mask.dims, mask.spacing_mm, t, dims_out, order=0)
    return Mask3D(out.astype(np.uint8), (t, t, t))


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def _read_sidecar(path: Path) -> dict:
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise InputError(f"missing sidecar {sidecar}")
    try:
        with open(sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"unreadable sidecar {sidecar}: {exc}") from exc
    for key in ("dims", "spacing_mm", "unit"):
        if key not in meta:
            raise InputError(f"sidecar {sidecar} missing key {key!r}")
    dims = meta["dims"]
    spacing = meta["spacing_mm"]
    if len(dims) != 3 or any(int(d) <= 0 for d in dims):
        raise InputError(f"sidecar {sidecar} has invalid dims {dims}")
    if len(spacing) != 3 or any(float(s) <= 0 for s in spacing):
        raise InputError(f"sidecar {sidecar} has invalid spacing {spacing}")
    return meta


def write_volume(vol: Volume3D, path: str | Path) -> Path:
    path = Path(path)
    if path.suffix != VOLUME_SUFFIX:
        path = path.with_suffix(VOLUME_SUFFIX)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(vol.voxels, dtype="<f4")
    path.write_bytes(payload.tobytes())
    meta = {"dims": list(vol.dims), "spacing_mm": list(vol.spacing_mm), "unit": vol.unit}
    with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")
    return path


def read_volume(path: str | Path) -> Volume3D:
    path = Path(path)
    meta = _read_sidecar(path)
    if meta["unit"] == "mask":
        raise InputError(f"{path} is a mask; use read_mask")
    dims = tuple(int(d) for d in meta["dims"])
    raw = path.read_bytes()
    expected = dims[0] * dims[1] * dims[2] * 4
    if len(raw) != expected:
        raise InputError(
            f"{path}: payload is {len(raw)} bytes but sidecar dims {dims} require {expected}"
        )
    vox = np.frombuffer(raw, dtype="<f4").reshape(dims)
    return Volume3D(vox, tuple(float(s) for s in meta["spacing_mm"]), meta["unit"])


def write_mask(mask: Mask3D, path: str | Path) -> Path:
    path = Path(path)
    if path.suffix != MASK_SUFFIX:
        path = path.with_suffix(MASK_SUFFIX)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(mask.voxels, dtype=np.uint8).tobytes())
    meta = {"dims": list(mask.dims), "spacing_mm": list(mask.spacing_mm), "unit": "mask"}
    with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")
    return path


def read_mask(path: str | Path) -> Mask3D:
    path = Path(path)
    meta = _read_sidecar(path)
    if meta["unit"] != "mask":
        raise InputError(f"{path} sidecar unit is {meta['unit']!r}, expected 'mask'")
    dims = tuple(int(d) for d in meta["dims"])
    raw = path.read_bytes()
    expected = dims[0] * dims[1] * dims[2]
    if len(raw) != expected:
        raise InputError(
            f"{path}: payload is {len(raw)} bytes but sidecar dims {dims} require {expected}"
        )
    vox = np.frombuffer(raw, dtype=np.uint8).reshape(dims)
    return Mask3D(vox, tuple(float(s) for s in meta["spacing_mm"]))
