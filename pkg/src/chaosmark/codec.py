"""Host decomposition into significant / carrier / passive bit planes.

Every domain exposes the same picture: the host is turned into an ordered
stream of quantized integer coefficients, a significance weight is attached
to each bit slot of that stream, and two thresholds (m, M) split the slots
into most-significant, least-significant (the embedding carriers) and
passive groups.  Replacing the carrier bits and recomposing must restore an
8-bit image whose re-decomposition returns exactly the carrier bits that
were written; each codec achieves that differently:

* spatial  -- the stream is the pixels themselves, carriers are pixel LSBs;
* dwt      -- integer lifting wavelet coefficients, a bijection on integer
  images, quantized per subband by power-of-two steps; carriers are the
  three low bits of every second-level detail coefficient;
* dct      -- per 8x8 block, three mid-diagonal coefficients quantized with
  a coarse step; the encoder reconstructs candidate pixels and verifies the
  decoder's exact computation, nudging the targets until every block reads
  back correctly.
"""

from __future__ import annotations

import logging

import numpy as np

from . import dct, dwt
from .util import atomic_write_bytes, round_half_away

log = logging.getLogger(__name__)

__all__ = [
    "SPATIAL_SIGNIFICANCE",
    "TRANSFORM_SIGNIFICANCE",
    "DWT_DEFAULT_STEPS",
    "DCT_DEFAULT_STEP",
    "DCT_CARRIER_DIAGS",
    "spatial_weight",
    "dct_weight",
    "DecomposedMedia",
    "SpatialCodec",
    "DwtCodec",
    "DctCodec",
    "make_codec",
    "dump_coefficients",
]

# Default thresholds: pixel-bit weights run 1..8 so (1.5, 7.5) isolates pixel
# LSBs; transform weights take values -1/0/1 and (-0.5, 0.5) isolates the -1
# carrier slots.
SPATIAL_SIGNIFICANCE = (1.5, 7.5)
TRANSFORM_SIGNIFICANCE = (-0.5, 0.5)

DWT_DEFAULT_STEPS = {"HL2": 4, "LH2": 4, "HH2": 2}
DCT_DEFAULT_STEP = 8
DCT_CARRIER_DIAGS = (4, 5, 6)  # 1-based diagonal indices, i.e. (3,1),(2,2),(1,3)

_DWT_STREAM_ORDER = ("LL3", "HL3", "LH3", "HH3", "HL2", "LH2", "HH2", "HL1", "LH1", "HH1")
_DWT_LEVELS = 3

_FIXUP_JITTERS = (
    0.0, 0.25, -0.25, 0.125, -0.125, 0.375, -0.375,
    0.0625, -0.0625, 0.1875, -0.1875, 0.3125, -0.3125, 0.4375, -0.4375,
)


def spatial_weight(k):
    """Pixel-bit significance, 8 bits per pixel MSB first: w = 8 - (k mod 8)."""
    return 8 - (np.asarray(k) % 8)


def dct_weight(k):
    """Blockwise coefficient significance over 1-based diagonal indices."""
    km = np.asarray(k) % 64
    out = np.zeros_like(km, dtype=np.int8)
    out = np.where((km >= 1) & (km <= 3), 1, out)
    out = np.where((km >= 4) & (km <= 6), -1, out)
    return out


def _check_shape(shape, multiple):
    h, w = shape
    if h < 64 or w < 64:
        raise ValueError(f"hosts must be at least 64x64, got {h}x{w}")
    if h % multiple or w % multiple:
        raise ValueError(f"dimensions {h}x{w} not divisible by {multiple}")


class DecomposedMedia:
    """Index vectors plus bit payloads of a decomposed host.

    ``stream`` is the quantized coefficient stream; the bit space has
    ``slots_per_entry`` slots per stream entry, most significant first, and
    the weight array classifies every slot.  ``with_lsc_bits`` returns a
    copy whose carrier bits are replaced; only that mutation path exists.
    """

    def __init__(self, codec, shape, stream, sidecar, m, M):
        self._codec = codec
        self.domain = codec.domain
        self.shape = shape
        self.stream = stream
        self.sidecar = sidecar
        self.m = m
        self.M = M
        self._weights = None

    @property
    def slots_per_entry(self):
        return self._codec.slots_per_entry

    @property
    def bit_count(self):
        return self.stream.size * self.slots_per_entry

    def bit_weights(self):
        if self._weights is None:
            self._weights = self._codec.bit_weights(self.shape)
        return self._weights

    @property
    def msc_indices(self):
        return np.flatnonzero(self.bit_weights() >= self.M)

    @property
    def lsc_indices(self):
        return np.flatnonzero(self.bit_weights() <= self.m)

    @property
    def passive_indices(self):
        w = self.bit_weights()
        return np.flatnonzero((w > self.m) & (w < self.M))

    def _extract(self, indices):
        slots = self.slots_per_entry
        entry = indices // slots
        bit = slots - 1 - (indices % slots)
        return ((self.stream[entry] >> bit) & 1).astype(np.uint8)

    @property
    def phi_msc(self):
        return self._extract(self.msc_indices)

    @property
    def phi_lsc(self):
        return self._extract(self.lsc_indices)

    @property
    def phi_passive(self):
        return self._extract(self.passive_indices)

    def with_lsc_bits(self, bits):
        bits = np.asarray(bits, dtype=np.int64).ravel()
        indices = self.lsc_indices
        if bits.size != indices.size:
            raise ValueError(f"expected {indices.size} carrier bits, got {bits.size}")
        slots = self.slots_per_entry
        entry = indices // slots
        bit = slots - 1 - (indices % slots)
        # several carrier slots can share one stream entry, so masks and
        # values accumulate per entry before a single write
        mask = np.zeros_like(self.stream)
        value = np.zeros_like(self.stream)
        np.bitwise_or.at(mask, entry, np.int64(1) << bit)
        np.bitwise_or.at(value, entry, bits << bit)
        stream = (self.stream & ~mask) | value
        return DecomposedMedia(self._codec, self.shape, stream, self.sidecar, self.m, self.M)


class SpatialCodec:
    """Pixels are the stream; embedding rewrites pixel LSBs directly.

    Non-default significance thresholds fall back to the generic
    decompose/scatter/recompose path, which is exact in this domain for any
    carrier bit selection.
    """

    domain = "spatial"
    slots_per_entry = 8

    def __init__(self, significance=None):
        self.significance = SPATIAL_SIGNIFICANCE if significance is None else tuple(significance)

    def _default_significance(self):
        return self.significance == SPATIAL_SIGNIFICANCE

    def _check(self, img):
        _check_shape(img.shape, 2)

    def lsc_count(self, shape):
        _check_shape(shape, 2)
        if self._default_significance():
            return shape[0] * shape[1]
        weights = self.bit_weights(shape)
        return int(np.count_nonzero(weights <= self.significance[0]))

    def bit_weights(self, shape):
        nbits = shape[0] * shape[1] * 8
        return spatial_weight(np.arange(nbits)).astype(np.int8)

    def lsc_bits(self, img):
        self._check(img)
        if not self._default_significance():
            return self.decompose(img).phi_lsc
        return (np.asarray(img).ravel() & 1).astype(np.uint8)

    def embed_lsc_bits(self, img, bits):
        self._check(img)
        img = np.asarray(img)
        if not self._default_significance():
            return self.recompose(self.decompose(img).with_lsc_bits(bits))
        bits = np.asarray(bits, dtype=np.uint8).reshape(img.shape)
        return ((img & 0xFE) | bits).astype(np.uint8)

    def decompose(self, img, m=None, M=None):
        self._check(img)
        m = self.significance[0] if m is None else m
        M = self.significance[1] if M is None else M
        if m >= M:
            raise ValueError("significance thresholds need m < M")
        stream = np.asarray(img, dtype=np.int64).ravel()
        media = DecomposedMedia(self, np.asarray(img).shape, stream, {}, m, M)
        if media.lsc_indices.size == 0:
            raise ValueError("significance thresholds leave no carrier bits")
        return media

    def recompose(self, media):
        img = media.stream.reshape(media.shape)
        return img.astype(np.uint8)


class DwtCodec:
    """Second-level wavelet detail coefficients carry three bits each.

    Coefficients come from the integer lifting transform, so modified
    subbands invert back to an integer image with zero reconstruction
    error.  Second-level subbands are quantized by power-of-two steps
    (remainders kept aside); everything else keeps step 1.
    """

    domain = "dwt"
    slots_per_entry = 32

    def __init__(self, steps=None, significance=None):
        self.steps = dict(DWT_DEFAULT_STEPS if steps is None else steps)
        for name, step in self.steps.items():
            if step < 1 or step & (step - 1):
                raise ValueError(f"{name} step must be a power of two, got {step}")
        self.significance = (
            TRANSFORM_SIGNIFICANCE if significance is None else tuple(significance)
        )

    def _default_significance(self):
        return self.significance == TRANSFORM_SIGNIFICANCE

    def _check(self, img):
        _check_shape(np.asarray(img).shape, 1 << _DWT_LEVELS)

    def _shift(self, name):
        return self.steps.get(name, 1).bit_length() - 1

    def _band_shapes(self, shape):
        h, w = shape
        shapes = {}
        for name in _DWT_STREAM_ORDER:
            level = int(name[2:])
            shapes[name] = (h >> level, w >> level)
        return shapes

    def lsc_count(self, shape):
        _check_shape(shape, 1 << _DWT_LEVELS)
        if not self._default_significance():
            weights = self.bit_weights(shape)
            return int(np.count_nonzero(weights <= self.significance[0]))
        h, w = shape
        return 3 * 3 * (h >> 2) * (w >> 2)

    def bit_weights(self, shape):
        shapes = self._band_shapes(shape)
        parts = []
        for name in _DWT_STREAM_ORDER:
            count = shapes[name][0] * shapes[name][1] * self.slots_per_entry
            if name.endswith("1") and not name.startswith("LL"):
                parts.append(np.zeros(count, dtype=np.int8))
            elif name.endswith("2") and not name.startswith("LL"):
                block = np.ones(count, dtype=np.int8)
                view = block.reshape(-1, self.slots_per_entry)
                view[:, -3:] = -1
                parts.append(block)
            else:
                parts.append(np.ones(count, dtype=np.int8))
        return np.concatenate(parts)

    def lsc_bits(self, img):
        self._check(img)
        if not self._default_significance():
            return self.decompose(img).phi_lsc
        bands = dwt.lifting_forward(np.asarray(img, dtype=np.int64), _DWT_LEVELS)
        parts = []
        for name in ("HL2", "LH2", "HH2"):
            q = bands[name].ravel() >> self._shift(name)
            parts.append(
                np.stack([(q >> 2) & 1, (q >> 1) & 1, q & 1], axis=1).ravel()
            )
        return np.concatenate(parts).astype(np.uint8)

    def embed_lsc_bits(self, img, bits):
        self._check(img)
        if not self._default_significance():
            return self.recompose(self.decompose(img).with_lsc_bits(bits))
        bands = dwt.lifting_forward(np.asarray(img, dtype=np.int64), _DWT_LEVELS)
        bits = np.asarray(bits, dtype=np.int64).ravel()
        offset = 0
        for name in ("HL2", "LH2", "HH2"):
            band = bands[name]
            count = band.size
            chunk = bits[offset : offset + 3 * count].reshape(count, 3)
            offset += 3 * count
            shift = self._shift(name)
            mask = np.int64(self.steps.get(name, 1) - 1)
            v = band.ravel()
            q = v >> shift
            q = (q & ~np.int64(7)) | (chunk[:, 0] << 2) | (chunk[:, 1] << 1) | chunk[:, 2]
            bands[name] = ((q << shift) | (v & mask)).reshape(band.shape)
        return self._to_image(bands)

    def _to_image(self, bands):
        pixels = dwt.lifting_inverse(bands)
        clipped = np.count_nonzero((pixels < 0) | (pixels > 255))
        if clipped:
            log.warning(
                "%d pixels clipped during wavelet recomposition; "
                "carrier recovery may be imperfect near saturation",
                clipped,
            )
        return np.clip(pixels, 0, 255).astype(np.uint8)

    def decompose(self, img, m=None, M=None):
        self._check(img)
        m = self.significance[0] if m is None else m
        M = self.significance[1] if M is None else M
        if m >= M:
            raise ValueError("significance thresholds need m < M")
        bands = dwt.lifting_forward(np.asarray(img, dtype=np.int64), _DWT_LEVELS)
        parts = []
        remainders = {}
        for name in _DWT_STREAM_ORDER:
            v = bands[name].ravel()
            shift = self._shift(name)
            if shift:
                remainders[name] = (v & np.int64(self.steps[name] - 1)).copy()
                parts.append(v >> shift)
            else:
                parts.append(v.copy())
        stream = np.concatenate(parts)
        if np.any(np.abs(stream) >= 2 ** 31):
            raise ValueError("coefficient exceeds 32-bit range")
        sidecar = {"remainders": remainders, "band_shapes": self._band_shapes(np.asarray(img).shape)}
        media = DecomposedMedia(self, np.asarray(img).shape, stream, sidecar, m, M)
        if media.lsc_indices.size == 0:
            raise ValueError("significance thresholds leave no carrier bits")
        return media

    def recompose(self, media):
        shapes = media.sidecar["band_shapes"]
        remainders = media.sidecar["remainders"]
        bands = {}
        offset = 0
        for name in _DWT_STREAM_ORDER:
            count = shapes[name][0] * shapes[name][1]
            q = media.stream[offset : offset + count]
            offset += count
            shift = self._shift(name)
            if shift:
                v = (q << shift) | remainders[name]
            else:
                v = q
            bands[name] = v.reshape(shapes[name])
        return self._to_image(bands)


class DctCodec:
    """Three mid-frequency DCT coefficients per 8x8 block carry one bit each.

    Carriers are quantized by a coarse step; their parity is the payload.
    The encoder writes candidate pixels and then runs the decoder's own
    computation, retrying with dithered targets until every block verifies,
    so unattacked extraction is exact by verification.
    """

    domain = "dct"
    slots_per_entry = 1

    def __init__(self, step=DCT_DEFAULT_STEP, significance=None):
        if step < 1:
            raise ValueError("carrier quantization step must be >= 1")
        self.step = float(step)
        significance = TRANSFORM_SIGNIFICANCE if significance is None else tuple(significance)
        if significance != TRANSFORM_SIGNIFICANCE:
            raise ValueError("the DCT codec only supports significance (-0.5, 0.5)")
        self.significance = significance
        pos = [dct.diag_position(d) for d in DCT_CARRIER_DIAGS]
        self._rows = np.array([p[0] for p in pos])
        self._cols = np.array([p[1] for p in pos])

    def _check(self, img):
        _check_shape(np.asarray(img).shape, dct.BLOCK)

    def lsc_count(self, shape):
        _check_shape(shape, dct.BLOCK)
        return 3 * (shape[0] // 8) * (shape[1] // 8)

    def bit_weights(self, shape):
        nblocks = (shape[0] // 8) * (shape[1] // 8)
        k = np.arange(1, 64 * nblocks + 1)
        return dct_weight(k)

    def _carrier_values(self, img):
        coeffs = dct.dct2_blocks(dct.blocks_of(np.asarray(img, dtype=np.float64)))
        return coeffs, coeffs[:, self._rows, self._cols]

    def lsc_bits(self, img):
        self._check(img)
        _, values = self._carrier_values(img)
        q = round_half_away(values / self.step).astype(np.int64)
        return (q & 1).astype(np.uint8).ravel()

    def embed_lsc_bits(self, img, bits):
        self._check(img)
        img = np.asarray(img)
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, 3)
        coeffs, values = self._carrier_values(img)
        q = round_half_away(values / self.step)
        frac = values / self.step - q
        move = np.where(frac >= 0.0, 1.0, -1.0)
        targets = np.where((q.astype(np.int64) & 1) == bits, q, q + move)
        changed = np.flatnonzero(np.any(targets != q, axis=1))
        out = img.copy()
        if changed.size == 0:
            return out
        solved = self._realize(coeffs[changed], targets[changed], bits[changed])
        h, w = img.shape
        bw = w // dct.BLOCK
        for local, block_index in enumerate(changed):
            r = (block_index // bw) * dct.BLOCK
            c = (block_index % bw) * dct.BLOCK
            out[r : r + dct.BLOCK, c : c + dct.BLOCK] = solved[local]
        return out

    def _realize(self, coeffs, targets, bits):
        """Pixel blocks whose re-quantized carriers have the wanted parity."""
        count = coeffs.shape[0]
        solved = np.empty((count, dct.BLOCK, dct.BLOCK), dtype=np.uint8)
        pending = np.arange(count)
        for jitter in _FIXUP_JITTERS:
            work = coeffs[pending].copy()
            work[:, self._rows, self._cols] = (targets[pending] + jitter) * self.step
            zb = round_half_away(dct.idct2_blocks(work))
            np.clip(zb, 0, 255, out=zb)
            check = dct.dct2_blocks(zb)[:, self._rows, self._cols]
            qq = round_half_away(check / self.step).astype(np.int64)
            ok = np.all((qq & 1) == bits[pending], axis=1)
            solved[pending[ok]] = zb[ok].astype(np.uint8)
            pending = pending[~ok]
            if pending.size == 0:
                break
        if pending.size:
            # near-saturated blocks can refuse to verify once clipping bites
            log.warning("%d blocks did not verify after dithering", pending.size)
            work = coeffs[pending].copy()
            work[:, self._rows, self._cols] = targets[pending] * self.step
            zb = round_half_away(dct.idct2_blocks(work))
            np.clip(zb, 0, 255, out=zb)
            solved[pending] = zb.astype(np.uint8)
        return solved

    def decompose(self, img, m=None, M=None):
        self._check(img)
        m = self.significance[0] if m is None else m
        M = self.significance[1] if M is None else M
        if (m, M) != TRANSFORM_SIGNIFICANCE:
            raise ValueError("the DCT codec only supports significance (-0.5, 0.5)")
        coeffs, _ = self._carrier_values(img)
        q = round_half_away(coeffs).astype(np.int64)
        qc = round_half_away(coeffs / self.step).astype(np.int64)
        q[:, self._rows, self._cols] = qc[:, self._rows, self._cols]
        # serialize each block along the southwest/northeast diagonal order
        stream = np.empty((q.shape[0], 64), dtype=np.int64)
        for i, (r, c) in enumerate(dct.DIAG_POSITIONS):
            stream[:, i] = q[:, r, c]
        sidecar = {"image": np.asarray(img).astype(np.uint8).copy()}
        media = DecomposedMedia(self, np.asarray(img).shape, stream.ravel(), sidecar, m, M)
        if media.lsc_indices.size == 0:
            raise ValueError("significance thresholds leave no carrier bits")
        return media

    def recompose(self, media):
        original = media.sidecar["image"]
        base = self.decompose(original)
        same = media.stream == base.stream
        non_carrier = np.ones(media.stream.size, dtype=bool)
        non_carrier[media.lsc_indices] = False
        if not np.all(same[non_carrier]):
            raise ValueError("only carrier (LSC) bits can be rewritten in the DCT domain")
        if np.all(same):
            return original.copy()
        bits = media.phi_lsc
        return self.embed_lsc_bits(original, bits)


def make_codec(domain, dct_step=DCT_DEFAULT_STEP, dwt_steps=None, significance=None):
    if domain == "spatial":
        return SpatialCodec(significance=significance)
    if domain == "dwt":
        return DwtCodec(steps=dwt_steps, significance=significance)
    if domain == "dct":
        return DctCodec(step=dct_step, significance=significance)
    raise ValueError(f"unknown embedding domain {domain!r}")


def dump_coefficients(media, path):
    """Debug dump of the quantized stream, little-endian 32-bit signed."""
    if np.any(np.abs(media.stream) >= 2 ** 31):
        raise ValueError("stream exceeds 32-bit range")
    atomic_write_bytes(path, media.stream.astype("<i4").tobytes())
