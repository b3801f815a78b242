"""Chaos-driven bit-flip watermarking for grayscale images.

The package couples three pieces: asynchronous Boolean network iteration
driven by keyed chaotic strategies, host codecs that expose carrier bits in
the spatial, wavelet and block-DCT domains with exact recovery, and an
evaluation bench (attacks, ROC calibration, robustness curves).
"""

__version__ = "0.1.0"

from .boolnet import BooleanMap, async_step, iterate
from .scheme import DetectionResult, EmbedConfig, detect, embed, expected_mark, extract_lscs

__all__ = [
    "__version__",
    "BooleanMap",
    "async_step",
    "iterate",
    "EmbedConfig",
    "DetectionResult",
    "embed",
    "detect",
    "expected_mark",
    "extract_lscs",
]
