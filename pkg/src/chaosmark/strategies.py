"""Strategy generators driving the asynchronous iterations.

Two adapters are provided.  The content-independent one (``ciis_strategy``)
derives an index sequence from a secret key and the message bits through a
piecewise linear chaotic map; it never reads the host, which is what makes
the embedding key-driven.  The content-dependent one (``cids_strategy``)
exists only as a counterexample for the uniformity experiments and is not
used on any embedding path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "CiisParams",
    "CidsParams",
    "pwlcm_step",
    "ciis_seed",
    "ciis_strategy",
    "cids_strategy",
    "uniform_source",
    "ciis_source",
    "cids_source",
    "KeyMaterial",
    "read_key_file",
    "write_key_file",
    "generate_key_material",
]

_TINY = 2.0 ** -53  # escape value for the absorbing fixed point at 0


def pwlcm_step(t, alpha):
    """One step of the piecewise linear chaotic map on [0, 1].

    Branches are evaluated in a fixed order so runs are reproducible:
    the symmetry half [0.5, 1] folds onto [0, 0.5] first.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"map input must lie in [0, 1], got {t}")
    if t > 0.5:
        t = 1.0 - t
    if t <= alpha:
        return t / alpha
    return (t - alpha) / (0.5 - alpha)


def ciis_seed(key, message_bits, precision=64):
    """Initial map state: fractional bits of the key xor folded message bits.

    The message is folded into a ``precision``-bit fraction by xor of
    consecutive chunks (first bit of each chunk is the most significant
    fractional bit, short tails are zero-padded).
    """
    if not 0.0 < key < 1.0:
        raise ValueError(f"key must lie in (0, 1), got {key}")
    if precision < 32:
        raise ValueError("precision must be >= 32")
    bits = [int(b) for b in message_bits]
    if not bits:
        raise ValueError("message must contain at least one bit")
    scale = 1 << precision
    key_frac = int(key * scale)  # exact: scaling a float by a power of two
    fold = 0
    for pos, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError("message bits must be 0 or 1")
        if b:
            fold ^= 1 << (precision - 1 - (pos % precision))
    return (key_frac ^ fold) / scale


@dataclass(frozen=True)
class CiisParams:
    """Key material for the content-independent strategy generator."""

    key: float
    message: tuple = field(default=())
    alpha: float = 0.4117
    precision: int = 64

    def __post_init__(self):
        if not 0.0 < self.key < 1.0:
            raise ValueError("key must lie in (0, 1)")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")


def ciis_strategy(params, n, q):
    """Generate q strategy terms in 1..n from (key, message, alpha).

    Term t is ``floor(n * k_t) + 1`` where ``k_0`` is the folded seed and
    ``k_{t+1}`` steps the chaotic map.  The only clamp needed is the map
    value 1.0, which would index n + 1.  A map state of exactly 0 is
    absorbing, so it is nudged to the smallest positive double.
    """
    if n < 1:
        raise ValueError("strategy range must be >= 1")
    if q < 1:
        raise ValueError("strategy length must be >= 1")
    k = ciis_seed(params.key, params.message, params.precision)
    alpha = params.alpha
    terms = []
    append = terms.append
    for _ in range(q):
        append(min(int(n * k) + 1, n))
        k = pwlcm_step(k, alpha)
        if k == 0.0:
            log.debug("chaotic map hit the absorbing point, perturbing")
            k = _TINY
    return tuple(terms)


@dataclass(frozen=True)
class CidsParams:
    """Parameters of the content-dependent strategy: bound l and bits X.

    ``bits`` is 1-based in spirit: ``bits[0]`` is X^1.  There is no X^0, so
    the t = 0 term always takes the else-branch value 1.
    """

    l: int
    bits: tuple = field(default=())

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("bound l must be >= 1")
        if len(self.bits) < self.l:
            raise ValueError("bit sequence shorter than bound l")


def cids_strategy(params, n):
    """Terms S^0..S^l: S^t = t when X^t = 1 (else 1), requiring l <= n."""
    if params.l > n:
        raise ValueError(f"bound l={params.l} exceeds index range n={n}")
    terms = [1]
    for t in range(1, params.l + 1):
        terms.append(t if int(params.bits[t - 1]) == 1 else 1)
    return tuple(terms)


# ---------------------------------------------------------------------------
# Strategy sources for the empirical uniformity harness.  A source is a
# callable (rng, x0) -> index sequence; x0 is the trial's start configuration
# so content-dependent generators can see it.

def uniform_source(q):
    """Independent uniform terms, the reference stego-secure generator."""

    def source(rng, x0):
        return rng.integers(1, len(x0) + 1, size=q)

    return source


def ciis_source(q, alpha=0.4117, message_len=64):
    """Fresh chaotic-map strategy per trial with a random key and message."""

    def source(rng, x0):
        key = float(rng.uniform(2.0 ** -16, 1.0 - 2.0 ** -16))
        message = tuple(int(b) for b in rng.integers(0, 2, size=message_len))
        return ciis_strategy(CiisParams(key=key, message=message, alpha=alpha), len(x0), q)

    return source


def cids_source():
    """Content-dependent strategy built from the trial's own start state."""

    def source(rng, x0):
        return cids_strategy(CidsParams(l=len(x0), bits=tuple(x0)), len(x0))

    return source


# ---------------------------------------------------------------------------
# Key files.  Embedding and detection share secrets through a small
# key = value text file; per-image keys override the default key.

@dataclass
class KeyMaterial:
    default_key: float
    alpha: float = 0.4117
    precision: int = 64
    mode: str = "fqq"
    domain: str = "dwt"
    image_keys: dict = field(default_factory=dict)

    def key_for(self, image_id=None):
        if image_id is not None and image_id in self.image_keys:
            return self.image_keys[image_id]
        return self.default_key


def write_key_file(path, material):
    lines = ["# chaosmark key file"]
    lines.append(f"K = {material.default_key!r}")
    lines.append(f"alpha = {material.alpha!r}")
    lines.append(f"precision = {material.precision}")
    lines.append(f"mode = {material.mode}")
    lines.append(f"domain = {material.domain}")
    for image_id in sorted(material.image_keys):
        lines.append(f"K.{image_id} = {material.image_keys[image_id]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_key_file(path):
    values = {}
    image_keys = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed key file line: {line!r}")
            name, _, value = line.partition("=")
            name = name.strip()
            value = value.strip()
            if name.startswith("K."):
                image_keys[name[2:]] = float(value)
            else:
                values[name] = value
    if "K" not in values:
        raise ValueError("key file misses the default key K")
    return KeyMaterial(
        default_key=float(values["K"]),
        alpha=float(values.get("alpha", 0.4117)),
        precision=int(values.get("precision", 64)),
        mode=values.get("mode", "fqq"),
        domain=values.get("domain", "dwt"),
        image_keys=image_keys,
    )


def generate_key_material(seed, image_ids=(), mode="fqq", domain="dwt"):
    """Deterministic key material: one fresh key per image id."""
    rng = np.random.default_rng(seed)
    default_key = float(rng.uniform(0.05, 0.95))
    alpha = float(rng.uniform(0.30, 0.45))
    image_keys = {str(i): float(rng.uniform(0.05, 0.95)) for i in image_ids}
    return KeyMaterial(
        default_key=default_key,
        alpha=alpha,
        mode=mode,
        domain=domain,
        image_keys=image_keys,
    )
