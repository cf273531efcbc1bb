from .extract import FeatureVector, TextureConfig, extract_all
from .manifest import manifest_entries, manifest_names, table_alias_map
from .wavelet import SUBBAND_LABELS, wavelet_decompose

__all__ = [
    "FeatureVector",
    "TextureConfig",
    "extract_all",
    "manifest_entries",
    "manifest_names",
    "table_alias_map",
    "SUBBAND_LABELS",
    "wavelet_decompose",
]
