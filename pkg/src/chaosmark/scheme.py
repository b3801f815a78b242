"""Embedding and non-blind detection.

The mark is not the message itself: the host's carrier bits are iterated by
an asynchronous Boolean map whose update order comes from the keyed chaotic
strategy seeded with the message.  The final configuration replaces the
carriers.  Detection recomputes that expected configuration from the
original host and compares it with the carriers extracted from the suspect
image; the original is required, which is what makes the scheme non-blind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolnet import BooleanMap, iterate
from .codec import DCT_DEFAULT_STEP, make_codec
from .strategies import CiisParams, ciis_strategy

__all__ = [
    "EmbedConfig",
    "DetectionResult",
    "DEFAULT_THRESHOLDS",
    "default_threshold",
    "expected_mark",
    "embed",
    "extract_lscs",
    "detect",
]

DOMAINS = ("spatial", "dwt", "dct")
MODES = ("neg", "fqq")

# Operating points found by the threshold sweep, one per embedding variant.
DEFAULT_THRESHOLDS = {
    ("dwt", "fqq"): 45.0,
    ("dwt", "neg"): 46.0,
    ("dct", "fqq"): 44.0,
    ("dct", "neg"): 44.0,
    ("spatial", "fqq"): 45.0,
    ("spatial", "neg"): 45.0,
}


@dataclass(frozen=True)
class EmbedConfig:
    """Everything embedding and detection must agree on, except the host.

    ``significance`` overrides the domain's default carrier thresholds
    (m, M); None keeps pixel LSBs for the spatial domain and the -1 weight
    class for the transform domains.
    """

    domain: str
    mode: str
    key: float
    alpha: float = 0.4117
    precision: int = 64
    iteration_multiplier: int = 4
    significance: tuple | None = None
    dct_step: int = DCT_DEFAULT_STEP
    dwt_steps: tuple = ((("HL2", 4), ("LH2", 4), ("HH2", 2)))

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.iteration_multiplier < 0:
            raise ValueError("iteration multiplier must be >= 0")
        if self.significance is not None and self.significance[0] >= self.significance[1]:
            raise ValueError("significance thresholds need m < M")

    def codec(self):
        return make_codec(
            self.domain,
            dct_step=self.dct_step,
            dwt_steps=dict(self.dwt_steps),
            significance=self.significance,
        )

    def boolean_map(self, n):
        if self.mode == "neg":
            return BooleanMap.negation(n)
        return BooleanMap.fqq(n)


def default_threshold(config):
    return DEFAULT_THRESHOLDS[(config.domain, config.mode)]


def _as_message(message_bits):
    bits = tuple(int(b) for b in message_bits)
    if not bits:
        raise ValueError("message must contain at least one bit")
    return bits


def expected_mark(host, message_bits, config):
    """The carrier configuration a marked copy of this host must show.

    Extracts the host's carrier bits, instantiates the mode at that length,
    generates the keyed strategy (message folds into the seed) and iterates
    4 * lm steps by default.  Deterministic in (host, message, key).
    """
    message = _as_message(message_bits)
    codec = config.codec()
    phi = codec.lsc_bits(host)
    lm = int(phi.size)
    if lm < 1:
        raise ValueError("host decomposition yields no carrier bits")
    q = config.iteration_multiplier * lm
    if q == 0:
        return phi.copy()
    params = CiisParams(
        key=config.key,
        message=message,
        alpha=config.alpha,
        precision=config.precision,
    )
    strategy = ciis_strategy(params, lm, q)
    f = config.boolean_map(lm)
    mark = iterate(f, strategy, phi.tolist())
    return np.array(mark, dtype=np.uint8)


def embed(host, message_bits, config):
    """Marked copy of the host: carrier bits replaced by the expected mark."""
    host = np.asarray(host)
    mark = expected_mark(host, message_bits, config)
    codec = config.codec()
    return codec.embed_lsc_bits(host, mark)


def extract_lscs(suspect, config):
    """Carrier bits of any image under this configuration (read-only)."""
    return config.codec().lsc_bits(suspect)


@dataclass(frozen=True)
class DetectionResult:
    difference_rate: float  # percentage of differing carrier bits
    threshold: float
    watermarked: bool
    lsc_count: int


def detect(host, message_bits, suspect, config, threshold=None):
    """Compare the expected mark of (host, message) with the suspect's carriers.

    The verdict is strict: a difference rate equal to the threshold does not
    count as watermarked.
    """
    host = np.asarray(host)
    suspect = np.asarray(suspect)
    if host.shape != suspect.shape:
        raise ValueError(
            f"suspect dimensions {suspect.shape} differ from host {host.shape}"
        )
    if threshold is None:
        threshold = default_threshold(config)
    mark = expected_mark(host, message_bits, config)
    observed = extract_lscs(suspect, config)
    lm = mark.size
    differences = int(np.count_nonzero(mark != observed))
    rate = 100.0 * differences / lm
    return DetectionResult(
        difference_rate=rate,
        threshold=float(threshold),
        watermarked=bool(rate < threshold),
        lsc_count=lm,
    )
