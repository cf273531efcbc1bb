"""Synthetic chest-CT phantom cohorts with exact ground truth.

A phantom is a body ellipsoid (+40 HU) in air (-1000 HU) containing two
lung ellipsoids (-800 HU), optionally seeded with brighter GGO-like blobs
clipped to the lungs. Gaussian noise plus a low-frequency bias field keep
texture statistics non-degenerate. The truth mask is the union of the lung
ellipsoids; GGO voxels inside a lung stay part of lung truth.

Labels follow a burden rule on b = GGO voxels / lung voxels:
b = 0 -> control; 0 < b <= severe_threshold -> mild/regular, CT-positive,
NAT-positive with a configurable probability (models NAT false negatives);
b > severe_threshold -> severe, CT- and NAT-positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom

from .errors import ConfigError, InputError
from .volume import Mask3D, Volume3D, write_mask, write_volume

SEVERITY_NAMES = ("control", "mild", "severe")


@dataclass(frozen=True)
class Ellipsoid:
    """Centre and semi-axes in physical millimetres, (z, y, x) order."""

    center_mm: tuple[float, float, float]
    radii_mm: tuple[float, float, float]


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple[int, int, int]
    spacing_mm: tuple[float, float, float]
    body: Ellipsoid
    lungs: tuple[Ellipsoid, Ellipsoid]
    body_hu: float = 40.0
    lung_hu: float = -800.0
    air_hu: float = -1000.0
    noise_sd_hu: float = 20.0
    bias_amplitude_hu: float = 15.0
    ggo_hu_range: tuple[float, float] = (-300.0, -100.0)
    edge_adjacent_ggo: bool = True
    # per-class target burden ranges and blob radii (mm); control is blob-free
    mild_burden_range: tuple[float, float] = (0.02, 0.05)
    severe_burden_range: tuple[float, float] = (0.10, 0.16)
    mild_blob_radius_mm: tuple[float, float] = (2.5, 4.0)
    severe_blob_radius_mm: tuple[float, float] = (4.0, 7.0)
    severe_burden_threshold: float = 0.08
    nat_positive_prob_mild: float = 0.85
    max_blobs: int = 80

    def __post_init__(self):
        if any(d < 4 for d in self.dims):
            raise ConfigError(f"phantom dims too small: {self.dims}")
        if not (self.air_hu < self.lung_hu < self.ggo_hu_range[0] <= self.ggo_hu_range[1] < self.body_hu):
            raise ConfigError("HU ordering must be air < lung < GGO < body")
        for lung in self.lungs:
            for c, r, bc, br in zip(
                lung.center_mm, lung.radii_mm, self.body.center_mm, self.body.radii_mm
            ):
                if abs(c - bc) + r > br + 1e-9:
                    raise ConfigError("lung ellipsoid does not fit inside the body")
        if not 0.0 < self.severe_burden_threshold < 1.0:
            raise ConfigError("severe burden threshold must lie in (0, 1)")


def default_spec(
    dims: tuple[int, int, int] = (36, 72, 72),
    spacing_mm: tuple[float, float, float] = (1.0, 1.0, 1.0),
    edge_adjacent_ggo: bool = True,
    noise_sd_hu: float = 20.0,
) -> PhantomSpec:
    """Geometry scaled to the volume extent, blob radii scaled to lung size."""
    extent = tuple(d * s for d, s in zip(dims, spacing_mm))
    centre = tuple(e / 2 for e in extent)
    # generous soft-tissue margin between lung surface and body surface so
    # the two edges stay well separated at segmentation resolution
    body = Ellipsoid(center_mm=centre, radii_mm=(extent[0] * 0.46, extent[1] * 0.46, extent[2] * 0.47))
    lung_radii = (extent[0] * 0.30, extent[1] * 0.24, extent[2] * 0.14)
    lungs = (
        Ellipsoid(center_mm=(centre[0], centre[1], extent[2] * 0.30), radii_mm=lung_radii),
        Ellipsoid(center_mm=(centre[0], centre[1], extent[2] * 0.70), radii_mm=lung_radii),
    )
    r_min = min(lung_radii)
    return PhantomSpec(
        dims=tuple(int(d) for d in dims),
        spacing_mm=tuple(float(s) for s in spacing_mm),
        body=body,
        lungs=lungs,
        edge_adjacent_ggo=edge_adjacent_ggo,
        noise_sd_hu=noise_sd_hu,
        mild_blob_radius_mm=(0.22 * r_min, 0.34 * r_min),
        severe_blob_radius_mm=(0.34 * r_min, 0.55 * r_min),
    )


def _coordinate_grids(spec: PhantomSpec) -> list[np.ndarray]:
    axes = [
        (np.arange(n, dtype=np.float64) + 0.5) * s
        for n, s in zip(spec.dims, spec.spacing_mm)
    ]
    return np.meshgrid(*axes, indexing="ij", sparse=True)


def _inside_ellipsoid(grids, ell: Ellipsoid) -> np.ndarray:
    q = sum(((g - c) / r) ** 2 for g, c, r in zip(grids, ell.center_mm, ell.radii_mm))
    return q <= 1.0


def _bias_field(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    coarse = rng.standard_normal((3, 3, 3))
    factors = [d / 3 for d in spec.dims]
    fine = zoom(coarse, factors, order=1, mode="nearest")
    fine = fine[: spec.dims[0], : spec.dims[1], : spec.dims[2]]
    return spec.bias_amplitude_hu * fine


def _sample_blob_center(
    lung: Ellipsoid, rng: np.random.Generator, on_surface: bool
) -> tuple[float, float, float]:
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v) + 1e-12
    if not on_surface:
        v *= 0.7 * rng.uniform() ** (1 / 3)
    return tuple(c + r * vi for c, r, vi in zip(lung.center_mm, lung.radii_mm, v))


@dataclass(frozen=True)
class CaseLabels:
    case_id: str
    covid_ct: int
    covid_nat: int
    severity: int
    ggo_burden: float
    seed: int


def generate_case(
    spec: PhantomSpec,
    rng: np.random.Generator,
    severity: int = 0,
    case_id: str = "case",
    seed: int = 0,
) -> tuple[Volume3D, Mask3D, CaseLabels]:
    """Build one phantom targeting the given severity class (0, 1 or 2)."""
    if severity not in (0, 1, 2):
        raise InputError(f"severity class must be 0, 1 or 2, got {severity}")
    grids = _coordinate_grids(spec)
    body = _inside_ellipsoid(grids, spec.body)
    lung_mask = np.zeros(spec.dims, dtype=bool)
    for lung in spec.lungs:
        lung_mask |= _inside_ellipsoid(grids, lung)
    lung_mask &= body

    vol = np.full(spec.dims, spec.air_hu, dtype=np.float64)
    vol[body] = spec.body_hu
    vol[lung_mask] = spec.lung_hu

    lung_total = int(lung_mask.sum())
    if lung_total == 0:
        raise ConfigError("lung ellipsoids produced no voxels at this resolution")

    ggo_mask = np.zeros(spec.dims, dtype=bool)
    if severity > 0:
        if severity == 1:
            burden_range = spec.mild_burden_range
            radius_range = spec.mild_blob_radius_mm
        else:
            burden_range = spec.severe_burden_range
            radius_range = spec.severe_blob_radius_mm
        target = rng.uniform(*burden_range)
        first = True
        for _ in range(spec.max_blobs):
            if ggo_mask.sum() / lung_total >= target:
                break
            lung = spec.lungs[int(rng.integers(0, len(spec.lungs)))]
            on_surface = spec.edge_adjacent_ggo and first
            centre = _sample_blob_center(lung, rng, on_surface)
            radius = rng.uniform(*radius_range)
            blob = sum(((g - c) / radius) ** 2 for g, c in zip(grids, centre)) <= 1.0
            blob &= lung_mask
            if blob.any():
                hu = rng.uniform(*spec.ggo_hu_range)
                vol[blob & ~ggo_mask] = hu
                ggo_mask |= blob
                first = False

    burden = float(ggo_mask.sum()) / lung_total
    vol += _bias_field(spec, rng)
    vol += rng.normal(0.0, spec.noise_sd_hu, size=spec.dims)

    if burden <= 0:
        labels = CaseLabels(case_id, 0, 0, 0, burden, seed)
    elif burden <= spec.severe_burden_threshold:
        nat = int(rng.uniform() < spec.nat_positive_prob_mild)
        labels = CaseLabels(case_id, 1, nat, 1, burden, seed)
    else:
        labels = CaseLabels(case_id, 1, 1, 2, burden, seed)

    volume = Volume3D(vol.astype(np.float32), spec.spacing_mm, "HU")
    truth = Mask3D(lung_mask.astype(np.uint8), spec.spacing_mm)
    return volume, truth, labels


def allocate_classes(n_cases: int, class_mix: tuple[float, float, float]) -> list[int]:
    """Largest-remainder allocation of n_cases to the three severity classes."""
    if n_cases <= 0:
        raise InputError(f"cohort size must be positive, got {n_cases}")
    mix = np.asarray(class_mix, dtype=float)
    if mix.shape != (3,) or (mix < 0).any() or abs(mix.sum() - 1.0) > 1e-9:
        raise ConfigError(f"class mix must be three non-negative shares summing to 1, got {class_mix}")
    raw = mix * n_cases
    counts = np.floor(raw).astype(int)
    rem = n_cases - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    for i in range(rem):
        counts[order[i]] += 1
    out: list[int] = []
    for cls, cnt in enumerate(counts):
        out.extend([cls] * int(cnt))
    return out


def stratified_split(
    strata: list[int], train_fraction: float, rng: np.random.Generator
) -> list[str]:
    """Per-case 'train'/'test' assignment, stratified on the given labels.

    Totals hit round(train_fraction * n) exactly; within each stratum the
    train share deviates from the global fraction by at most one case.
    """
    n = len(strata)
    if n == 0:
        raise InputError("cannot split an empty cohort")
    values = sorted(set(strata))
    groups = {v: [i for i, s in enumerate(strata) if s == v] for v in values}
    if min(len(g) for g in groups.values()) < 2:
        raise InputError("a stratum has fewer than 2 cases; cannot stratify")
    target_total = int(round(train_fraction * n))
    raw = {v: train_fraction * len(g) for v, g in groups.items()}
    take = {v: int(np.floor(r)) for v, r in raw.items()}
    rem = target_total - sum(take.values())
    for v in sorted(values, key=lambda v: raw[v] - take[v], reverse=True)[: max(rem, 0)]:
        take[v] += 1
    assignment = ["test"] * n
    for v in values:
        idx = np.array(groups[v])
        rng.shuffle(idx)
        for i in idx[: take[v]]:
            assignment[int(i)] = "train"
    return assignment


def case_seed(master_seed: int, index: int) -> int:
    """Stable per-case seed derivation."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1)[0])


def generate_cohort(
    spec: PhantomSpec,
    n_cases: int,
    class_mix: tuple[float, float, float],
    master_seed: int,
    out_dir: str | Path,
    train_fraction: float = 0.7,
) -> list[CaseLabels]:
    """Generate and persist a cohort: volumes, truth masks, labels, split."""
    classes = allocate_classes(n_cases, class_mix)
    out_dir = Path(out_dir)
    (out_dir / "volumes").mkdir(parents=True, exist_ok=True)
    (out_dir / "truth").mkdir(parents=True, exist_ok=True)

    labels: list[CaseLabels] = []
    for idx, severity in enumerate(classes):
        cid = f"case_{idx:04d}"
        seed = case_seed(master_seed, idx)
        rng = np.random.default_rng(seed)
        vol, truth, lab = generate_case(spec, rng, severity=severity, case_id=cid, seed=seed)
        write_volume(vol, out_dir / "volumes" / cid)
        write_mask(truth, out_dir / "truth" / cid)
        labels.append(lab)

    split_rng = np.random.default_rng(case_seed(master_seed, len(classes) + 1))
    split = stratified_split([l.covid_nat for l in labels], train_fraction, split_rng)

    with open(out_dir / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["case_id", "covid_ct", "covid_nat", "severity", "ggo_burden", "seed"])
        for lab in labels:
            w.writerow([lab.case_id, lab.covid_ct, lab.covid_nat, lab.severity,
                        repr(lab.ggo_burden), lab.seed])
    with open(out_dir / "splits.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["case_id", "split"])
        for lab, s in zip(labels, split):
            w.writerow([lab.case_id, s])
    return labels


def read_labels(path: str | Path) -> list[CaseLabels]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"labels file not found: {path}")
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                CaseLabels(
                    case_id=row["case_id"],
                    covid_ct=int(row["covid_ct"]),
                    covid_nat=int(row["covid_nat"]),
                    severity=int(row["severity"]),
                    ggo_burden=float(row["ggo_burden"]),
                    seed=int(row["seed"]),
                )
            )
    if not out:
        raise InputError(f"labels file is empty: {path}")
    return out


def read_splits(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"splits file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["case_id"]: row["split"] for row in csv.DictReader(fh)}
