"""Image attacks for robustness runs, plus MSE/PSNR fidelity metrics.

All attacks keep dimensions and the 0..255 range so attacked images feed
straight back into detection.  Identity parameters (crop 0, contrast 1,
sharpen 0, rotation 0) are bit-exact no-ops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dct, dwt
from .util import round_half_away

__all__ = [
    "AttackSpec",
    "parse_attack_spec",
    "apply_attack",
    "crop",
    "jpeg_like",
    "wavelet_quant",
    "contrast",
    "sharpen",
    "rotate_pair",
    "mse",
    "psnr",
    "JPEG_LUMINANCE_TABLE",
]

JPEG_LUMINANCE_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)

# Wavelet codec proxy: quantization step per subband in orthonormal float
# units, scaled by the ratio parameter and snapped to a power of two in the
# integer lifting domain.  Finest details go first, the mark-carrying second
# level is quantized most gently, and the coarse end takes the remaining
# budget, which is what makes this proxy bite low frequencies the way the
# block-DCT carriers feel most.
WAVELET_QUANT_WEIGHTS = {
    "HL1": 1.0, "LH1": 1.0, "HH1": 1.0,
    "HL2": 0.25, "LH2": 0.25, "HH2": 0.25,
    "HL3": 1.5, "LH3": 1.5, "HH3": 1.5,
    "LL3": 1.5,
}


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    param: float

    def label(self):
        param = int(self.param) if self.param == int(self.param) else self.param
        return f"{self.kind}:{param}"


_VALIDATORS = {
    "crop": lambda p: 0.0 <= p < 100.0,
    "jpeg": lambda p: 1.0 <= p <= 100.0,
    "j2k": lambda p: p >= 1.0,
    "contrast": lambda p: p > 0.0,
    "sharpen": lambda p: p >= 0.0,
    "rot": lambda p: 0.0 <= p <= 45.0,
}


def parse_attack_spec(text):
    """Parse CLI-style specs such as ``crop:36`` or ``contrast:0.8``."""
    name, sep, value = text.strip().partition(":")
    name = name.strip().lower()
    if not sep or name not in _VALIDATORS:
        raise ValueError(f"unknown attack spec {text!r}")
    param = float(value)
    if not _VALIDATORS[name](param):
        raise ValueError(f"parameter out of range in attack spec {text!r}")
    return AttackSpec(kind=name, param=param)


def apply_attack(img, spec):
    if spec.kind == "crop":
        return crop(img, spec.param)
    if spec.kind == "jpeg":
        return jpeg_like(img, int(spec.param))
    if spec.kind == "j2k":
        return wavelet_quant(img, spec.param)
    if spec.kind == "contrast":
        return contrast(img, spec.param)
    if spec.kind == "sharpen":
        return sharpen(img, spec.param)
    if spec.kind == "rot":
        return rotate_pair(img, spec.param)
    raise ValueError(f"unknown attack kind {spec.kind!r}")


def crop(img, pct):
    """Replace a centered square covering pct percent of the area by mid-gray."""
    if not 0.0 <= pct < 100.0:
        raise ValueError("crop percentage must lie in [0, 100)")
    img = np.asarray(img)
    if pct == 0.0:
        return img.copy()
    h, w = img.shape
    side = int(math.floor(math.sqrt(pct / 100.0 * h * w)))
    out = img.copy()
    r0 = (h - side) // 2
    c0 = (w - side) // 2
    out[r0 : r0 + side, c0 : c0 + side] = 128
    return out


def _quality_scale(quality):
    if quality < 50:
        return 5000.0 / quality
    return 200.0 - 2.0 * quality


def jpeg_like(img, quality):
    """Blockwise DCT quantization with the standard luminance table.

    The table scales with the usual libjpeg quality rule; no entropy coding
    since only the quantization loss matters here.
    """
    if not 1 <= quality <= 100:
        raise ValueError("quality must lie in 1..100")
    img = np.asarray(img)
    scale = _quality_scale(quality)
    table = np.clip(np.floor((JPEG_LUMINANCE_TABLE * scale + 50.0) / 100.0), 1, 255)
    coeffs = dct.dct2_blocks(dct.blocks_of(img.astype(np.float64)))
    quantized = round_half_away(coeffs / table) * table
    blocks = round_half_away(dct.idct2_blocks(quantized))
    out = dct.blocks_to_image(blocks, img.shape)
    return np.clip(out, 0, 255).astype(np.uint8)


def _lifting_step(name, ratio):
    target = ratio * WAVELET_QUANT_WEIGHTS[name] * dwt.lifting_scale(name)
    if target <= 1.0:
        return 1
    return 1 << int(round(math.log2(target)))


def wavelet_quant(img, ratio):
    """Wavelet codec proxy: deadzone-quantize lifting subbands, reconstruct.

    The whole pipeline stays in integers, so a step of 1 leaves a subband
    untouched and gentle ratios are true no-ops on protected bands.
    """
    if ratio < 1.0:
        raise ValueError("quantization ratio must be >= 1")
    img = np.asarray(img)
    bands = dwt.lifting_forward(img.astype(np.int64), 3)
    out = {}
    for name, band in bands.items():
        step = _lifting_step(name, ratio)
        if step == 1:
            out[name] = band
            continue
        q = np.sign(band) * (np.abs(band) // step)  # deadzone: truncate toward zero
        recon = np.sign(q) * (np.abs(q) * step + step // 2)
        out[name] = recon.astype(np.int64)
    pixels = dwt.lifting_inverse(out)
    return np.clip(pixels, 0, 255).astype(np.uint8)


def contrast(img, strength):
    """Scale intensities around mid-gray: out = 128 + strength * (in - 128)."""
    if strength <= 0.0:
        raise ValueError("contrast strength must be positive")
    img = np.asarray(img)
    if strength == 1.0:
        return img.copy()
    out = 128.0 + strength * (img.astype(np.float64) - 128.0)
    return np.clip(round_half_away(out), 0, 255).astype(np.uint8)


_GAUSS3 = np.array([1.0, 2.0, 1.0]) / 4.0


def _gauss3x3(img):
    padded = np.pad(img, 1, mode="edge")
    rows = (
        padded[:, :-2] * _GAUSS3[0]
        + padded[:, 1:-1] * _GAUSS3[1]
        + padded[:, 2:] * _GAUSS3[2]
    )
    return (
        rows[:-2] * _GAUSS3[0]
        + rows[1:-1] * _GAUSS3[1]
        + rows[2:] * _GAUSS3[2]
    )


def sharpen(img, strength):
    """Unsharp mask: out = in + strength * (in - gauss3x3(in))."""
    if strength < 0.0:
        raise ValueError("sharpen strength must be >= 0")
    img = np.asarray(img)
    if strength == 0.0:
        return img.copy()
    smooth = _gauss3x3(img.astype(np.float64))
    out = img.astype(np.float64) + strength * (img.astype(np.float64) - smooth)
    return np.clip(round_half_away(out), 0, 255).astype(np.uint8)


def _rotate_once(img, theta_deg):
    """Bilinear rotation about the image center, out-of-frame filled mid-gray."""
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = math.radians(theta_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    # inverse map: source coordinates that land on each output pixel
    dy, dx = yy - cy, xx - cx
    sy = cy + dy * cos_t - dx * sin_t
    sx = cx + dy * sin_t + dx * cos_t
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    fy, fx = sy - y0, sx - x0
    valid = (sy >= 0) & (sy <= h - 1) & (sx >= 0) & (sx <= w - 1)
    y0c = np.clip(y0, 0, h - 2)
    x0c = np.clip(x0, 0, w - 2)
    src = img.astype(np.float64)
    top = src[y0c, x0c] * (1 - fx) + src[y0c, x0c + 1] * fx
    bottom = src[y0c + 1, x0c] * (1 - fx) + src[y0c + 1, x0c + 1] * fx
    sampled = top * (1 - fy) + bottom * fy
    out = np.where(valid, sampled, 128.0)
    return np.clip(round_half_away(out), 0, 255).astype(np.uint8)


def rotate_pair(img, theta):
    """Two opposite rotations of angle theta about the center, in sequence."""
    if not 0.0 <= theta <= 45.0:
        raise ValueError("rotation angle must lie in [0, 45]")
    img = np.asarray(img)
    if theta == 0.0:
        return img.copy()
    return _rotate_once(_rotate_once(img, theta), -theta)


def mse(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a, b):
    """Peak signal-to-noise ratio in dB; identical images report +inf."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / err)
