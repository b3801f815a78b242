"""Orthonormal 8x8 blocked DCT-II with diagonal coefficient ordering."""

from __future__ import annotations

import numpy as np

__all__ = [
    "BLOCK",
    "DIAG_POSITIONS",
    "blocks_of",
    "blocks_to_image",
    "dct2_blocks",
    "idct2_blocks",
    "diag_position",
]

BLOCK = 8

_k = np.arange(BLOCK)
_BASIS = np.cos((2 * _k[None, :] + 1) * _k[:, None] * np.pi / (2 * BLOCK)) * 0.5
_BASIS[0, :] *= 1.0 / np.sqrt(2.0)


def _diag_positions():
    # Southwest -> northeast diagonals: within each anti-diagonal the row
    # index decreases, so the order starts (0,0), (1,0), (0,1), (2,0), ...
    positions = []
    for s in range(2 * BLOCK - 1):
        r = min(s, BLOCK - 1)
        while r >= 0 and s - r < BLOCK:
            positions.append((r, s - r))
            r -= 1
    return tuple(positions)


DIAG_POSITIONS = _diag_positions()


def diag_position(index):
    """(row, col) of the 1-based diagonal index, 1 = top-left, 64 = bottom-right."""
    if not 1 <= index <= BLOCK * BLOCK:
        raise IndexError(f"diagonal index {index} out of range")
    return DIAG_POSITIONS[index - 1]


def blocks_of(img):
    """Split an image into row-major 8x8 blocks, shape (nblocks, 8, 8)."""
    img = np.asarray(img)
    h, w = img.shape
    if h % BLOCK or w % BLOCK:
        raise ValueError(f"dimensions {h}x{w} not divisible by {BLOCK}")
    return (
        img.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(-1, BLOCK, BLOCK)
    )


def blocks_to_image(blocks, shape):
    h, w = shape
    return (
        np.asarray(blocks)
        .reshape(h // BLOCK, w // BLOCK, BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(h, w)
    )


def dct2_blocks(blocks):
    """2-D orthonormal DCT-II of every block."""
    return np.einsum("km,bmn,ln->bkl", _BASIS, np.asarray(blocks, dtype=np.float64), _BASIS)


def idct2_blocks(coeffs):
    """Inverse of :func:`dct2_blocks` (transpose of the orthonormal basis)."""
    return np.einsum("km,bkl,ln->bmn", _BASIS, np.asarray(coeffs, dtype=np.float64), _BASIS)
