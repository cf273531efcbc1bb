"""The published feature manifest: names, ordering, and report aliases.

Composition (375 features total, checked at import):
- original volume: 18 first-order + 24 GLCM + 16 GLRLM + 16 GLSZM = 74
- per wavelet sub-band: the full 24 GLCM features, plus a GLRLM subset
  trimmed progressively with the number of high-pass axes (16 for LLL,
  15 for one-H bands, 13 for two-H bands, 9 for HHH), totalling 301.

The trim drops normalized-redundant and joint-emphasis run features from
the noisiest bands first; every externally reported feature name survives
the trim. Report tables historically abbreviate some names (a `glm`
prefix, missing sub-band qualifiers); `table_alias_map` resolves those
spellings onto manifest names.
"""

from __future__ import annotations

from .firstorder import FIRST_ORDER_NAMES
from .matrices import GLCM_FEATURE_NAMES, GLRLM_FEATURE_NAMES, GLSZM_FEATURE_NAMES
from .wavelet import SUBBAND_LABELS

EXPECTED_TOTAL = 375

_GLRLM_DROPS_BY_DETAIL = {
    0: (),
    1: ("GrayLevelNonUniformityNormalized",),
    2: ("GrayLevelNonUniformityNormalized", "RunLengthNonUniformityNormalized",
        "RunPercentage"),
    3: ("GrayLevelNonUniformityNormalized", "RunLengthNonUniformityNormalized",
        "RunPercentage", "ShortRunLowGrayLevelEmphasis",
        "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
        "LongRunHighGrayLevelEmphasis"),
}


def subband_glrlm_names(label: str) -> tuple[str, ...]:
    drops = set(_GLRLM_DROPS_BY_DETAIL[label.count("H")])
    return tuple(n for n in GLRLM_FEATURE_NAMES if n not in drops)


def manifest_entries() -> list[dict]:
    """Ordered feature descriptors: name, family, subband, formula id."""
    entries = []
    for name in FIRST_ORDER_NAMES:
        entries.append({"name": f"firstorder_{name}", "family": "firstorder",
                        "subband": None, "formula": f"firstorder.{name}"})
    for name in GLCM_FEATURE_NAMES:
        entries.append({"name": f"glcm_{name}", "family": "glcm",
                        "subband": None, "formula": f"glcm.{name}"})
    for name in GLRLM_FEATURE_NAMES:
        entries.append({"name": f"glrlm_{name}", "family": "glrlm",
                        "subband": None, "formula": f"glrlm.{name}"})
    for name in GLSZM_FEATURE_NAMES:
        entries.append({"name": f"glszm_{name}", "family": "glszm",
                        "subband": None, "formula": f"glszm.{name}"})
    for band in SUBBAND_LABELS:
        for name in GLCM_FEATURE_NAMES:
            entries.append({"name": f"{band}_glcm_{name}", "family": "glcm",
                            "subband": band, "formula": f"glcm.{name}"})
        for name in subband_glrlm_names(band):
            entries.append({"name": f"{band}_glrlm_{name}", "family": "glrlm",
                            "subband": band, "formula": f"glrlm.{name}"})
    return entries


def manifest_names() -> tuple[str, ...]:
    return tuple(e["name"] for e in manifest_entries())


# Published report-table spellings -> manifest names. Bare intensity names
# are first-order features, bare matrix names belong to the original
# volume, and a bare GrayLevelVariance refers to the run-length family.
TABLE_FEATURE_SPELLINGS = {
    "HLL_glm_ClusterProminence": "HLL_glcm_ClusterProminence",
    "LHL_glm_Idmn": "LHL_glcm_Idmn",
    "Maximum": "firstorder_Maximum",
    "Energy": "firstorder_Energy",
    "LLL_glm_Imc1": "LLL_glcm_Imc1",
    "HLL_glm_Correlation": "HLL_glcm_Correlation",
    "LLH_glm_Correlation": "LLH_glcm_Correlation",
    "LHH_glm_ClusterShade": "LHH_glcm_ClusterShade",
    "LongRunLowGrayLevelEmphasis": "HLH_glrlm_LongRunLowGrayLevelEmphasis",
    "HLH_glm_ClusterShade": "HLH_glcm_ClusterShade",
    "Idn": "glcm_Idn",
    "LLH_glm_ClusterShade": "LLH_glcm_ClusterShade",
    "LargeAreaHighGrayLevelEmphasis": "glszm_LargeAreaHighGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis": "LHH_glrlm_ShortRunHighGrayLevelEmphasis",
    "Idmn": "glcm_Idmn",
    "GrayLevelVariance": "glrlm_GrayLevelVariance",
    "HHH_glm_ClusterShade": "HHH_glcm_ClusterShade",
    "LLL_glm_Imc2": "LLL_glcm_Imc2",
    "LLL_glrmlm_RunEntropy": "LLL_glrlm_RunEntropy",
    "LLH_glm_ClusterProminence": "LLH_glcm_ClusterProminence",
    "DifferenceVariance": "HLL_glcm_DifferenceVariance",
    "Imc2": "glcm_Imc2",
    "LLL_glm_Correlation": "LLL_glcm_Correlation",
    "Imc1": "glcm_Imc1",
}


def table_alias_map() -> dict[str, str]:
    return dict(TABLE_FEATURE_SPELLINGS)


def _check_manifest():
    names = manifest_names()
    if len(names) != len(set(names)):
        raise AssertionError("manifest names are not unique")
    if len(names) != EXPECTED_TOTAL:
        raise AssertionError(
            f"manifest lists {len(names)} features, expected {EXPECTED_TOTAL}"
        )
    missing = [t for t, name in TABLE_FEATURE_SPELLINGS.items() if name not in names]
    if missing:
        raise AssertionError(f"alias targets missing from manifest: {missing}")


_check_manifest()
