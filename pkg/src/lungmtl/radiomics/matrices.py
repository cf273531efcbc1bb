"""Gray-level texture matrices (GLCM, GLRLM, GLSZM) and their features.

All features follow the standard IBSI-style definitions computed on
discretized gray levels 1..Ng. GLCM counts are accumulated symmetrically
over every configured 3D direction into a single matrix normalized to sum
one. GLRLM runs are collected per direction and the matrices averaged.
GLSZM zones are 26-connected equal-level components.

Degenerate statistics (zero marginal variance, single-entry matrices)
yield NaN, the documented undefined sentinel.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import InputError

# the 13 unique direction offsets (z, y, x) at unit distance: one of each
# antipodal pair
UNIQUE_DIRECTIONS_3D = (
    (0, 0, 1),
    (0, 1, 0),
    (1, 0, 0),
    (0, 1, 1),
    (0, 1, -1),
    (1, 0, 1),
    (1, 0, -1),
    (1, 1, 0),
    (1, -1, 0),
    (1, 1, 1),
    (1, 1, -1),
    (1, -1, 1),
    (1, -1, -1),
)

_EPS = np.spacing(1.0)
_STRUCT_26 = np.ones((3, 3, 3), dtype=bool)


def discretize(voxels: np.ndarray, mask: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width binning of masked values into levels 1..bins; 0 outside.

    A constant masked region maps entirely to level 1.
    """
    if bins < 2:
        raise InputError(f"need at least 2 bins, got {bins}")
    m = np.asarray(mask).astype(bool)
    if not m.any():
        raise InputError("cannot discretize an empty mask")
    v = np.asarray(voxels, dtype=np.float64)
    if v.shape != m.shape:
        raise InputError(f"volume shape {v.shape} differs from mask shape {m.shape}")
    out = np.zeros(v.shape, dtype=np.int32)
    vals = v[m]
    lo = vals.min()
    hi = vals.max()
    if hi <= lo:
        out[m] = 1
        return out
    levels = np.floor((vals - lo) / (hi - lo) * bins).astype(np.int32) + 1
    np.clip(levels, 1, bins, out=levels)
    out[m] = levels
    return out


# ---------------------------------------------------------------------------
# GLCM


def glcm_matrix(labeled: np.ndarray, distance: int, directions=UNIQUE_DIRECTIONS_3D,
                n_levels: int | None = None) -> np.ndarray:
    """Symmetric co-occurrence probabilities accumulated over directions."""
    lab = np.asarray(labeled, dtype=np.int64)
    if lab.ndim != 3:
        raise InputError(f"expected a labeled 3D array, got shape {lab.shape}")
    ng = int(n_levels if n_levels is not None else lab.max())
    if ng < 1:
        raise InputError("labeled volume has no in-mask voxels")
    counts = np.zeros((ng, ng), dtype=np.float64)
    shape = lab.shape
    for direction in directions:
        dz, dy, dx = (int(d) * distance for d in direction)
        src = [slice(max(0, -o), min(s, s - o)) for o, s in zip((dz, dy, dx), shape)]
        dst = [slice(max(0, o), min(s, s + o)) for o, s in zip((dz, dy, dx), shape)]
        a = lab[tuple(src)].ravel()
        b = lab[tuple(dst)].ravel()
        valid = (a > 0) & (b > 0)
        if not valid.any():
            continue
        pair = (a[valid] - 1) * ng + (b[valid] - 1)
        binc = np.bincount(pair, minlength=ng * ng).reshape(ng, ng)
        counts += binc
        counts += binc.T
    total = counts.sum()
    if total <= 0:
        raise InputError("no co-occurring in-mask voxel pairs at this distance")
    return counts / total


def glcm_features(p: np.ndarray) -> dict[str, float]:
    ng = p.shape[0]
    i, j = np.meshgrid(np.arange(1, ng + 1, dtype=np.float64),
                       np.arange(1, ng + 1, dtype=np.float64), indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    ux = float((p * i).sum())
    uy = float((p * j).sum())
    sigx = float(np.sqrt((p * (i - ux) ** 2).sum()))
    sigy = float(np.sqrt((p * (j - uy) ** 2).sum()))

    k_sum = np.arange(2, 2 * ng + 1, dtype=np.float64)
    p_sum = np.array([p[(i + j) == k].sum() for k in k_sum])
    k_diff = np.arange(0, ng, dtype=np.float64)
    p_diff = np.array([p[np.abs(i - j) == k].sum() for k in k_diff])

    hx = float(-(px * np.log2(px + _EPS)).sum())
    hy = float(-(py * np.log2(py + _EPS)).sum())
    hxy = float(-(p * np.log2(p + _EPS)).sum())
    pxpy = px[:, None] * py[None, :]
    hxy1 = float(-(p * np.log2(pxpy + _EPS)).sum())
    hxy2 = float(-(pxpy * np.log2(pxpy + _EPS)).sum())

    diff_avg = float((k_diff * p_diff).sum())
    sum_avg = float((k_sum * p_sum).sum())

    feats = {
        "Autocorrelation": float((p * i * j).sum()),
        "JointAverage": ux,
        "ClusterProminence": float((p * (i + j - ux - uy) ** 4).sum()),
        "ClusterShade": float((p * (i + j - ux - uy) ** 3).sum()),
        "ClusterTendency": float((p * (i + j - ux - uy) ** 2).sum()),
        "Contrast": float((p * (i - j) ** 2).sum()),
        "DifferenceAverage": diff_avg,
        "DifferenceEntropy": float(-(p_diff * np.log2(p_diff + _EPS)).sum()),
        "DifferenceVariance": float((p_diff * (k_diff - diff_avg) ** 2).sum()),
        "JointEnergy": float((p**2).sum()),
        "JointEntropy": hxy,
        "Id": float((p / (1.0 + np.abs(i - j))).sum()),
        "Idm": float((p / (1.0 + (i - j) ** 2)).sum()),
        "Idmn": float((p / (1.0 + (i - j) ** 2 / ng**2)).sum()),
        "Idn": float((p / (1.0 + np.abs(i - j) / ng)).sum()),
        "InverseVariance": float((p[i != j] / (i - j)[i != j] ** 2).sum()),
        "MaximumProbability": float(p.max()),
        "SumAverage": sum_avg,
        "SumEntropy": float(-(p_sum * np.log2(p_sum + _EPS)).sum()),
        "SumVariance": float((p_sum * (k_sum - sum_avg) ** 2).sum()),
        "SumSquares": float((p * (i - ux) ** 2).sum()),
    }

    if sigx > 0 and sigy > 0:
        feats["Correlation"] = float((p * (i - ux) * (j - uy)).sum() / (sigx * sigy))
    else:
        feats["Correlation"] = float("nan")
    denom = max(hx, hy)
    if denom > 0:
        feats["Imc1"] = (hxy - hxy1) / denom
        feats["Imc2"] = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - hxy)))))
    else:
        feats["Imc1"] = float("nan")
        feats["Imc2"] = float("nan")
    return feats


GLCM_FEATURE_NAMES = (
    "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency",
    "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy",
    "DifferenceVariance", "Id", "Idm", "Idmn", "Idn", "Imc1", "Imc2",
    "InverseVariance", "JointAverage", "JointEnergy", "JointEntropy",
    "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares", "SumVariance",
)


# ---------------------------------------------------------------------------
# GLRLM


def _runs_along(lab: np.ndarray, direction, coords=None) -> tuple[np.ndarray, np.ndarray]:
    """(levels, lengths) of all maximal constant runs along one direction.

    Each voxel's line is identified by the cross product of its position
    with the direction vector (constant along the line); within a line the
    projection onto the direction orders the voxels. Runs break where the
    line, the level, or mask membership changes; out-of-mask voxels
    (level 0) separate runs.
    """
    dz, dy, dx = direction
    if coords is None:
        coords = np.indices(lab.shape).reshape(3, -1)
    z, y, x = coords
    t = dz * z + dy * y + dx * x
    u = y * dx - x * dy
    v = z * dx - x * dz
    w = z * dy - y * dz
    order = np.lexsort((t, u, v, w))
    levels = lab.ravel()[order]
    su, sv, sw = u[order], v[order], w[order]
    boundary = np.empty(levels.size, dtype=bool)
    boundary[0] = True
    boundary[1:] = (
        (levels[1:] != levels[:-1])
        | (su[1:] != su[:-1])
        | (sv[1:] != sv[:-1])
        | (sw[1:] != sw[:-1])
    )
    starts = np.flatnonzero(boundary)
    run_levels = levels[starts]
    run_lengths = np.diff(np.append(starts, levels.size))
    keep = run_levels > 0
    return run_levels[keep], run_lengths[keep]


def glrlm_matrix(labeled: np.ndarray, directions=UNIQUE_DIRECTIONS_3D,
                 n_levels: int | None = None) -> np.ndarray:
    """Run-length counts averaged over directions; shape (Ng, max_length)."""
    lab = np.asarray(labeled, dtype=np.int64)
    if lab.ndim != 3:
        raise InputError(f"expected a labeled 3D array, got shape {lab.shape}")
    ng = int(n_levels if n_levels is not None else lab.max())
    if ng < 1:
        raise InputError("labeled volume has no in-mask voxels")
    coords = np.indices(lab.shape).reshape(3, -1)
    per_direction = []
    max_len = 1
    for direction in directions:
        levels, lengths = _runs_along(lab, direction, coords)
        per_direction.append((levels, lengths))
        if lengths.size:
            max_len = max(max_len, int(lengths.max()))
    out = np.zeros((ng, max_len), dtype=np.float64)
    for levels, lengths in per_direction:
        if levels.size:
            np.add.at(out, (levels - 1, lengths - 1), 1.0)
    return out / len(directions)


def _rlm_style_features(matrix: np.ndarray, n_masked: int, prefix_names: dict) -> dict[str, float]:
    """Shared run-length / size-zone feature formulas.

    matrix rows are gray levels 1..Ng, columns are run lengths (or zone
    sizes) 1..Jmax, entries are counts. prefix_names maps the generic
    formula key to the family's feature name.
    """
    total = matrix.sum()
    if total <= 0:
        return {name: float("nan") for name in prefix_names.values()}
    ng, jmax = matrix.shape
    i = np.arange(1, ng + 1, dtype=np.float64)[:, None]
    j = np.arange(1, jmax + 1, dtype=np.float64)[None, :]
    p = matrix / total
    r_i = matrix.sum(axis=1)
    l_j = matrix.sum(axis=0)
    mu_i = float((p * i).sum())
    mu_j = float((p * j).sum())
    values = {
        "short": float((matrix / j**2).sum() / total),
        "long": float((matrix * j**2).sum() / total),
        "gln": float((r_i**2).sum() / total),
        "glnn": float((r_i**2).sum() / total**2),
        "rln": float((l_j**2).sum() / total),
        "rlnn": float((l_j**2).sum() / total**2),
        "percentage": float(total / n_masked) if n_masked else float("nan"),
        "gl_var": float((p * (i - mu_i) ** 2).sum()),
        "len_var": float((p * (j - mu_j) ** 2).sum()),
        "entropy": float(-(p * np.log2(p + _EPS)).sum()),
        "low_gl": float((matrix / i**2).sum() / total),
        "high_gl": float((matrix * i**2).sum() / total),
        "short_low": float((matrix / (i**2 * j**2)).sum() / total),
        "short_high": float((matrix * i**2 / j**2).sum() / total),
        "long_low": float((matrix * j**2 / i**2).sum() / total),
        "long_high": float((matrix * (i * j) ** 2).sum() / total),
    }
    return {name: values[key] for key, name in prefix_names.items()}


GLRLM_FEATURE_NAMES = (
    "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
    "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis", "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
)

_GLRLM_KEYS = {
    "short": "ShortRunEmphasis",
    "long": "LongRunEmphasis",
    "gln": "GrayLevelNonUniformity",
    "glnn": "GrayLevelNonUniformityNormalized",
    "rln": "RunLengthNonUniformity",
    "rlnn": "RunLengthNonUniformityNormalized",
    "percentage": "RunPercentage",
    "gl_var": "GrayLevelVariance",
    "len_var": "RunVariance",
    "entropy": "RunEntropy",
    "low_gl": "LowGrayLevelRunEmphasis",
    "high_gl": "HighGrayLevelRunEmphasis",
    "short_low": "ShortRunLowGrayLevelEmphasis",
    "short_high": "ShortRunHighGrayLevelEmphasis",
    "long_low": "LongRunLowGrayLevelEmphasis",
    "long_high": "LongRunHighGrayLevelEmphasis",
}


def glrlm_features(matrix: np.ndarray, n_masked: int) -> dict[str, float]:
    return _rlm_style_features(matrix, n_masked, _GLRLM_KEYS)


# ---------------------------------------------------------------------------
# GLSZM


def glszm_zones(labeled: np.ndarray, n_levels: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(levels, sizes, counts) of 26-connected equal-level zones."""
    lab = np.asarray(labeled, dtype=np.int64)
    if lab.ndim != 3:
        raise InputError(f"expected a labeled 3D array, got shape {lab.shape}")
    ng = int(n_levels if n_levels is not None else lab.max())
    if ng < 1:
        raise InputError("labeled volume has no in-mask voxels")
    levels = []
    sizes = []
    counts = []
    for g in range(1, ng + 1):
        zones, n = ndimage.label(lab == g, structure=_STRUCT_26)
        if n == 0:
            continue
        zone_sizes = np.bincount(zones.ravel())[1:]
        uniq, cnt = np.unique(zone_sizes, return_counts=True)
        levels.extend([g] * len(uniq))
        sizes.extend(uniq.tolist())
        counts.extend(cnt.tolist())
    return np.asarray(levels), np.asarray(sizes), np.asarray(counts)


def glszm_matrix(labeled: np.ndarray, n_levels: int | None = None) -> np.ndarray:
    """Dense zone matrix; columns 1..max zone size (small inputs only)."""
    lab = np.asarray(labeled, dtype=np.int64)
    ng = int(n_levels if n_levels is not None else lab.max())
    levels, sizes, counts = glszm_zones(lab, ng)
    max_size = int(sizes.max()) if sizes.size else 1
    out = np.zeros((ng, max_size), dtype=np.float64)
    for g, s, c in zip(levels, sizes, counts):
        out[g - 1, s - 1] = c
    return out


GLSZM_FEATURE_NAMES = (
    "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance",
    "ZoneVariance", "ZoneEntropy", "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis", "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
)

_GLSZM_KEYS = {
    "short": "SmallAreaEmphasis",
    "long": "LargeAreaEmphasis",
    "gln": "GrayLevelNonUniformity",
    "glnn": "GrayLevelNonUniformityNormalized",
    "rln": "SizeZoneNonUniformity",
    "rlnn": "SizeZoneNonUniformityNormalized",
    "percentage": "ZonePercentage",
    "gl_var": "GrayLevelVariance",
    "len_var": "ZoneVariance",
    "entropy": "ZoneEntropy",
    "low_gl": "LowGrayLevelZoneEmphasis",
    "high_gl": "HighGrayLevelZoneEmphasis",
    "short_low": "SmallAreaLowGrayLevelEmphasis",
    "short_high": "SmallAreaHighGrayLevelEmphasis",
    "long_low": "LargeAreaLowGrayLevelEmphasis",
    "long_high": "LargeAreaHighGrayLevelEmphasis",
}


def glszm_features(labeled: np.ndarray, n_masked: int, n_levels: int | None = None) -> dict[str, float]:
    """Zone features computed from the compact (level, size, count) form."""
    levels, sizes, counts = glszm_zones(labeled, n_levels)
    total = float(counts.sum()) if counts.size else 0.0
    names = _GLSZM_KEYS
    if total <= 0:
        return {name: float("nan") for name in names.values()}
    i = levels.astype(np.float64)
    j = sizes.astype(np.float64)
    c = counts.astype(np.float64)
    p = c / total
    mu_i = float((p * i).sum())
    mu_j = float((p * j).sum())
    r = {}
    for g in np.unique(levels):
        r[g] = c[levels == g].sum()
    r_sq = float(sum(v**2 for v in r.values()))
    l = {}
    for s in np.unique(sizes):
        l[s] = c[sizes == s].sum()
    l_sq = float(sum(v**2 for v in l.values()))
    values = {
        "short": float((c / j**2).sum() / total),
        "long": float((c * j**2).sum() / total),
        "gln": r_sq / total,
        "glnn": r_sq / total**2,
        "rln": l_sq / total,
        "rlnn": l_sq / total**2,
        "percentage": float(total / n_masked) if n_masked else float("nan"),
        "gl_var": float((p * (i - mu_i) ** 2).sum()),
        "len_var": float((p * (j - mu_j) ** 2).sum()),
        "entropy": float(-(p * np.log2(p + _EPS)).sum()),
        "low_gl": float((c / i**2).sum() / total),
        "high_gl": float((c * i**2).sum() / total),
        "short_low": float((c / (i**2 * j**2)).sum() / total),
        "short_high": float((c * i**2 / j**2).sum() / total),
        "long_low": float((c * j**2 / i**2).sum() / total),
        "long_high": float((c * (i * j) ** 2).sum() / total),
    }
    return {name: values[key] for key, name in names.items()}
