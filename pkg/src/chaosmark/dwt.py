"""Two-dimensional Daubechies-4 wavelet transforms.

Two variants live here.  ``dwt2``/``idwt2`` use the orthonormal 4-tap filter
pair with periodic extension: perfect reconstruction and energy preservation
up to float rounding, which is what the lossy compression proxy and the
analysis tooling want.  ``lifting_forward``/``lifting_inverse`` are the
integer-to-integer lifting factorization of the same wavelet: every lifting
update is rounded, so the transform is an exact bijection on integer arrays.
That bijection is what makes bit embedding in coefficients survive the trip
through an 8-bit image without any reconstruction error.

Subbands are keyed "LL<levels>", "HL<k>", "LH<k>", "HH<k>".  The integer
subbands are scaled relative to the orthonormal ones; ``lifting_scale``
reports the per-subband factor.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dwt2",
    "idwt2",
    "lifting_forward",
    "lifting_inverse",
    "lifting_scale",
    "subband_names",
]

_SQRT3 = np.sqrt(3.0)
_H = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (4.0 * np.sqrt(2.0))
_G = np.array([_H[3], -_H[2], _H[1], -_H[0]])

# lifting channel gains: integer outputs approximate float / K
_KS = (_SQRT3 - 1.0) / np.sqrt(2.0)  # scaling channel
_KD = (_SQRT3 + 1.0) / np.sqrt(2.0)  # detail channel
_C1 = _SQRT3 / 4.0
_C2 = (_SQRT3 - 2.0) / 4.0


def subband_names(levels):
    names = [f"LL{levels}"]
    for level in range(levels, 0, -1):
        names.extend([f"HL{level}", f"LH{level}", f"HH{level}"])
    return names


def _check_dims(shape, levels):
    h, w = shape
    div = 1 << levels
    if h % div or w % div:
        raise ValueError(f"dimensions {h}x{w} not divisible by 2^{levels}")


# ---------------------------------------------------------------------------
# Orthonormal float transform (periodic extension).

def _afb(x):
    """Analysis along the last axis: returns (approx, detail), half length."""
    n = x.shape[-1]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(4)[None, :]) % n
    win = x[..., idx]  # (..., n/2, 4)
    return win @ _H, win @ _G


def _sfb(a, d):
    """Synthesis along the last axis, transpose of :func:`_afb`."""
    n = 2 * a.shape[-1]
    out = np.zeros(a.shape[:-1] + (n,), dtype=np.float64)
    base = 2 * np.arange(a.shape[-1])
    for k in range(4):
        idx = (base + k) % n
        out[..., idx] += a * _H[k] + d * _G[k]
    return out


def dwt2(img, levels=3):
    """Multi-level 2-D transform; returns a dict of float subbands."""
    img = np.asarray(img, dtype=np.float64)
    _check_dims(img.shape, levels)
    bands = {}
    ll = img
    for level in range(1, levels + 1):
        la, ld = _afb(ll)  # rows
        aa, ad = _afb(la.T)  # columns of the row-approx
        da, dd = _afb(ld.T)
        ll = aa.T
        bands[f"HL{level}"] = da.T
        bands[f"LH{level}"] = ad.T
        bands[f"HH{level}"] = dd.T
    bands[f"LL{levels}"] = ll
    return bands


def idwt2(bands):
    """Inverse of :func:`dwt2`."""
    levels = max(int(k[2:]) for k in bands if k.startswith("LL"))
    ll = np.asarray(bands[f"LL{levels}"], dtype=np.float64)
    for level in range(levels, 0, -1):
        hl = np.asarray(bands[f"HL{level}"], dtype=np.float64)
        lh = np.asarray(bands[f"LH{level}"], dtype=np.float64)
        hh = np.asarray(bands[f"HH{level}"], dtype=np.float64)
        la = _sfb(ll.T, lh.T).T
        ld = _sfb(hl.T, hh.T).T
        ll = _sfb(la, ld)
    return ll


# ---------------------------------------------------------------------------
# Integer lifting transform.  Every step adds a rounded function of the
# complementary channel, so each step (and the whole transform) is invertible
# on integer inputs regardless of the rounding.

def _round(x):
    return np.floor(x + 0.5).astype(np.int64)


def _lift_fwd(v):
    s = v[..., 0::2].astype(np.int64)
    d = v[..., 1::2].astype(np.int64)
    s = s + _round(_SQRT3 * d)
    d = d - _round(_C1 * s + _C2 * np.roll(s, 1, axis=-1))
    s = s - np.roll(d, -1, axis=-1)
    return s, d


def _lift_inv(s, d):
    s = s + np.roll(d, -1, axis=-1)
    d = d + _round(_C1 * s + _C2 * np.roll(s, 1, axis=-1))
    s = s - _round(_SQRT3 * d)
    n = 2 * s.shape[-1]
    out = np.empty(s.shape[:-1] + (n,), dtype=np.int64)
    out[..., 0::2] = s
    out[..., 1::2] = d
    return out


def lifting_forward(img, levels=3):
    """Integer subbands of an integer image; exact inverse via lifting_inverse."""
    img = np.asarray(img)
    if not np.issubdtype(img.dtype, np.integer):
        raise TypeError("lifting transform expects integer samples")
    _check_dims(img.shape, levels)
    bands = {}
    ll = img.astype(np.int64)
    for level in range(1, levels + 1):
        la, ld = _lift_fwd(ll)  # rows
        aa, ad = _lift_fwd(la.swapaxes(-1, -2))
        da, dd = _lift_fwd(ld.swapaxes(-1, -2))
        ll = aa.swapaxes(-1, -2)
        bands[f"HL{level}"] = da.swapaxes(-1, -2)
        bands[f"LH{level}"] = ad.swapaxes(-1, -2)
        bands[f"HH{level}"] = dd.swapaxes(-1, -2)
    bands[f"LL{levels}"] = ll
    return bands


def lifting_inverse(bands):
    """Exact integer inverse of :func:`lifting_forward`."""
    levels = max(int(k[2:]) for k in bands if k.startswith("LL"))
    ll = np.asarray(bands[f"LL{levels}"], dtype=np.int64)
    for level in range(levels, 0, -1):
        hl = np.asarray(bands[f"HL{level}"], dtype=np.int64)
        lh = np.asarray(bands[f"LH{level}"], dtype=np.int64)
        hh = np.asarray(bands[f"HH{level}"], dtype=np.int64)
        la = _lift_inv(ll.swapaxes(-1, -2), lh.swapaxes(-1, -2)).swapaxes(-1, -2)
        ld = _lift_inv(hl.swapaxes(-1, -2), hh.swapaxes(-1, -2)).swapaxes(-1, -2)
        ll = _lift_inv(la, ld)
    return ll


def lifting_scale(name):
    """Approximate ratio integer/orthonormal for a subband name.

    Each scaling stage multiplies the integer value by 1/Ks, each detail
    stage by 1/Kd, accumulated over the level hierarchy.
    """
    level = int(name[2:])
    kind = name[:2]
    scale = (1.0 / _KS) ** (2 * (level - 1))  # LL path down to this level
    stage = {
        "LL": (1.0 / _KS) ** 2,
        "HL": (1.0 / _KS) * (1.0 / _KD),
        "LH": (1.0 / _KS) * (1.0 / _KD),
        "HH": (1.0 / _KD) ** 2,
    }[kind]
    return scale * stage
