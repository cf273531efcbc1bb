"""Classical lung segmentation and its contour-based refinement.

The classical pass binarises below an HU threshold, drops everything
connected to the volume border (ambient air) and keeps at most the two
largest 3D components. Thresholding under-segments bright in-lung regions
(white lung / GGO), so the refinement pass re-derives each slice mask by
closing the component, extracting an inflated outer contour as a snake
seed, evolving the snake to the lung boundary, and filling its interior.

Conventions: 8-connected foreground and 4-connected background in 2D,
26-connected components in 3D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path as MplPath
from scipy import ndimage
from skimage.measure import find_contours

from .errors import InputError
from .snake import Contour2D, SnakeParams, active_contour, edge_field
from .volume import Mask3D, Volume3D

LUNG_THRESHOLD_HU = -320.0
CLOSING_RADIUS_PX = 10
SEED_INFLATION_PX = 3
SEED_SPACING_PX = 2.0
MIN_COMPONENT_AREA_FRACTION = 0.005
CENTRAL_WIDTH_FRACTION = 0.8

_STRUCT_2D_8 = np.ones((3, 3), dtype=bool)
_STRUCT_3D_26 = np.ones((3, 3, 3), dtype=bool)


def disc_element(radius: int) -> np.ndarray:
    """Euclidean disc of the given pixel radius."""
    if radius < 0:
        raise InputError(f"radius must be non-negative, got {radius}")
    if radius == 0:
        return np.ones((1, 1), dtype=bool)
    span = np.arange(-radius, radius + 1)
    di, dj = np.meshgrid(span, span, indexing="ij")
    return (di**2 + dj**2) <= radius**2


def morpho_close(mask_slice: np.ndarray, radius: int) -> np.ndarray:
    """Dilation then erosion with a disc; padded so the border acts neutral."""
    m = np.asarray(mask_slice).astype(bool)
    if m.ndim != 2:
        raise InputError(f"expected a 2D slice, got shape {m.shape}")
    if radius == 0 or not m.any():
        return m.astype(np.uint8)
    se = disc_element(radius)
    padded = np.pad(m, radius)
    closed = ndimage.binary_erosion(ndimage.binary_dilation(padded, structure=se), structure=se)
    return closed[radius:-radius, radius:-radius].astype(np.uint8)


def fill_holes(mask_slice: np.ndarray) -> np.ndarray:
    """Set to 1 every background region not connected to the slice border."""
    m = np.asarray(mask_slice).astype(bool)
    if m.ndim != 2:
        raise InputError(f"expected a 2D slice, got shape {m.shape}")
    # default 4-connected background matches the topological pairing
    return ndimage.binary_fill_holes(m).astype(np.uint8)


@dataclass(frozen=True)
class Region:
    label: int
    area: int
    bbox: tuple[int, int, int, int] | tuple[int, int, int, int, int, int]
    centroid: tuple[float, ...]


def connected_components(mask: np.ndarray) -> tuple[np.ndarray, list[Region]]:
    """Label foreground components (8-connected in 2D, 26-connected in 3D)."""
    m = np.asarray(mask).astype(bool)
    if m.ndim == 2:
        structure = _STRUCT_2D_8
    elif m.ndim == 3:
        structure = _STRUCT_3D_26
    else:
        raise InputError(f"expected a 2D or 3D mask, got shape {m.shape}")
    labeled, n = ndimage.label(m, structure=structure)
    regions = []
    if n:
        areas = ndimage.sum_labels(m, labeled, index=range(1, n + 1))
        centroids = ndimage.center_of_mass(m, labeled, index=range(1, n + 1))
        slices = ndimage.find_objects(labeled)
        for i, (area, centroid, sl) in enumerate(zip(areas, centroids, slices), start=1):
            bbox = tuple(int(s.start) for s in sl) + tuple(int(s.stop) for s in sl)
            regions.append(Region(label=i, area=int(area), bbox=bbox,
                                  centroid=tuple(float(c) for c in centroid)))
    return labeled, regions


def classical_lung_mask(vol: Volume3D) -> Mask3D:
    """Threshold + border-connected removal + two largest 3D components."""
    binary = vol.voxels < LUNG_THRESHOLD_HU
    labeled, n = ndimage.label(binary, structure=_STRUCT_3D_26)
    if n == 0:
        return Mask3D(np.zeros(vol.dims, dtype=np.uint8), vol.spacing_mm)

    border_labels = set()
    for axis in range(3):
        for idx in (0, -1):
            face = np.take(labeled, idx, axis=axis)
            border_labels.update(np.unique(face[face > 0]).tolist())

    keep = [lab for lab in range(1, n + 1) if lab not in border_labels]
    if not keep:
        return Mask3D(np.zeros(vol.dims, dtype=np.uint8), vol.spacing_mm)
    areas = ndimage.sum_labels(binary, labeled, index=keep)
    order = np.argsort(-np.asarray(areas), kind="stable")
    selected = [keep[i] for i in order[:2]]
    out = np.isin(labeled, selected)
    return Mask3D(out.astype(np.uint8), vol.spacing_mm)


def select_lung_components(labeled: np.ndarray, regions: list[Region]) -> list[Region]:
    """Per-slice lung candidates: big enough and horizontally central."""
    h, w = labeled.shape
    min_area = MIN_COMPONENT_AREA_FRACTION * h * w
    margin = (1.0 - CENTRAL_WIDTH_FRACTION) / 2.0 * w
    out = []
    for region in regions:
        if region.area < min_area:
            continue
        if not (margin <= region.centroid[1] <= w - 1 - margin):
            continue
        out.append(region)
    return out


def outer_contour(mask_slice: np.ndarray) -> Contour2D | None:
    """Largest closed iso-contour of a binary slice, or None if degenerate."""
    padded = np.pad(np.asarray(mask_slice, dtype=float), 1)
    contours = [c for c in find_contours(padded, 0.5) if len(c) >= 4]
    if not contours:
        return None
    best = max(contours, key=lambda c: 0.5 * abs(
        np.dot(c[:, 0], np.roll(c[:, 1], -1)) - np.dot(c[:, 1], np.roll(c[:, 0], -1))))
    pts = best[:-1] if np.allclose(best[0], best[-1]) else best
    if len(pts) < 3:
        return None
    return Contour2D(pts - 1.0)


def inflated_seed(component: np.ndarray, inflation_px: int = SEED_INFLATION_PX) -> Contour2D | None:
    """Outer contour of the component dilated outward by a few pixels."""
    pad = inflation_px + 1
    padded = np.pad(component.astype(bool), pad)
    dilated = ndimage.binary_dilation(padded, structure=disc_element(inflation_px))
    contour = outer_contour(dilated)
    if contour is None:
        return None
    shifted = contour.points - pad
    return Contour2D(shifted).resample(SEED_SPACING_PX)


def rasterize_contour(contour: Contour2D, shape: tuple[int, int]) -> np.ndarray:
    """Fill the closed contour's interior on a pixel grid."""
    h, w = shape
    pts = contour.points
    r0 = max(int(np.floor(pts[:, 0].min())), 0)
    r1 = min(int(np.ceil(pts[:, 0].max())) + 1, h)
    c0 = max(int(np.floor(pts[:, 1].min())), 0)
    c1 = min(int(np.ceil(pts[:, 1].max())) + 1, w)
    out = np.zeros(shape, dtype=np.uint8)
    if r1 <= r0 or c1 <= c0:
        return out
    rr, cc = np.meshgrid(np.arange(r0, r1), np.arange(c0, c1), indexing="ij")
    path = MplPath(np.vstack([pts, pts[:1]]))
    inside = path.contains_points(np.column_stack([rr.ravel(), cc.ravel()]), radius=0.0)
    out[r0:r1, c0:c1] = inside.reshape(rr.shape)
    return out


@dataclass
class RefineReport:
    """Per-case record of slice-level snake behaviour."""

    slices_processed: int = 0
    components_refined: int = 0
    warnings: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "slices_processed": self.slices_processed,
            "components_refined": self.components_refined,
            "warnings": self.warnings,
        }


def refine_mask(
    vol: Volume3D,
    initial: Mask3D,
    params: SnakeParams | None = None,
    closing_radius: int = CLOSING_RADIUS_PX,
) -> tuple[Mask3D, RefineReport]:
    """Slice-wise contour refinement of an initial lung mask.

    Each refined slice component is the filled snake interior united with
    the initial component, so refinement never loses initial coverage. A
    snake that fails to converge falls back to the closed component and is
    recorded as a warning.
    """
    if vol.dims != initial.dims:
        raise InputError(f"volume dims {vol.dims} differ from mask dims {initial.dims}")
    if params is None:
        params = SnakeParams()

    report = RefineReport()
    out = np.zeros(initial.dims, dtype=np.uint8)
    for z in range(initial.dims[0]):
        init_slice = initial.voxels[z]
        if not init_slice.any():
            continue
        report.slices_processed += 1
        labeled, regions = connected_components(init_slice)
        lungs = select_lung_components(labeled, regions)
        field2d = edge_field(vol.voxels[z]) if lungs else None
        slice_mask = np.zeros_like(init_slice)
        for region in lungs:
            component = (labeled == region.label).astype(np.uint8)
            closed = morpho_close(component, closing_radius)
            seed = inflated_seed(closed)
            if seed is None:
                slice_mask |= closed | component
                continue
            result = active_contour(vol.voxels[z], seed, params, field=field2d)
            if result.converged:
                refined = fill_holes(rasterize_contour(result.contour, init_slice.shape))
                slice_mask |= refined | component
                report.components_refined += 1
            else:
                report.warnings.append(
                    {"slice": z, "component": region.label, "reason": "snake did not converge"}
                )
                slice_mask |= closed | component
        out[z] = slice_mask
    return Mask3D(out, initial.spacing_mm), report
