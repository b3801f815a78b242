"""Minimal netpbm IO: 8-bit PGM images and PBM bit maps.

Readers handle both the ASCII and binary variants with comments anywhere in
the header; the writer always emits binary P5 so round trips are bit exact.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "read_pgm",
    "write_pgm",
    "load_pgm",
    "save_pgm",
    "read_pbm",
    "load_message_bits",
]


class _Tokens:
    """Whitespace/comment-aware header tokenizer over raw bytes."""

    def __init__(self, data):
        self.data = data
        self.pos = 0

    def next_token(self):
        data, n = self.data, len(self.data)
        pos = self.pos
        while pos < n:
            c = data[pos]
            if c == 0x23:  # '#': skip to end of line
                while pos < n and data[pos] not in (0x0A, 0x0D):
                    pos += 1
            elif c in (0x20, 0x09, 0x0A, 0x0D, 0x0B, 0x0C):
                pos += 1
            else:
                break
        start = pos
        while pos < n and data[pos] not in (0x20, 0x09, 0x0A, 0x0D, 0x0B, 0x0C):
            pos += 1
        if start == pos:
            raise ValueError("truncated netpbm header")
        self.pos = pos
        return data[start:pos]

    def skip_single_whitespace(self):
        # binary rasters start exactly one whitespace byte after the header
        self.pos += 1


def read_pgm(data):
    """Decode P2 (ASCII) or P5 (binary) graymap bytes to a uint8 array."""
    tokens = _Tokens(bytes(data))
    magic = tokens.next_token()
    if magic in (b"P3", b"P6"):
        raise ValueError("P3/P6 is a PPM color map, not a PGM graymap")
    if magic in (b"P1", b"P4"):
        raise ValueError("P1/P4 is a PBM bitmap, not a PGM graymap")
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a PGM file (magic {magic!r})")
    width = int(tokens.next_token())
    height = int(tokens.next_token())
    maxval = int(tokens.next_token())
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    if not 0 < maxval <= 255:
        raise ValueError(f"only 8-bit graymaps supported, maxval={maxval}")
    count = width * height
    if magic == b"P5":
        tokens.skip_single_whitespace()
        raster = tokens.data[tokens.pos : tokens.pos + count]
        if len(raster) < count:
            raise ValueError("truncated PGM raster")
        img = np.frombuffer(raster, dtype=np.uint8, count=count)
    else:
        values = tokens.data[tokens.pos :].split()
        if len(values) < count:
            raise ValueError("truncated PGM raster")
        img = np.array([int(v) for v in values[:count]], dtype=np.int64)
        if img.min() < 0 or img.max() > maxval:
            raise ValueError("sample outside 0..maxval")
        img = img.astype(np.uint8)
    return img.reshape(height, width).copy()


def write_pgm(img):
    """Encode a uint8 array as binary P5 bytes."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale array")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise ValueError("samples outside 0..255")
        img = img.astype(np.uint8)
    height, width = img.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + img.tobytes()


def load_pgm(path):
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


def read_pbm(data):
    """Decode P1 (ASCII) or P4 (packed) bitmap bytes to a 0/1 uint8 array."""
    tokens = _Tokens(bytes(data))
    magic = tokens.next_token()
    if magic not in (b"P1", b"P4"):
        raise ValueError(f"not a PBM file (magic {magic!r})")
    width = int(tokens.next_token())
    height = int(tokens.next_token())
    if width <= 0 or height <= 0:
        raise ValueError("bitmap dimensions must be positive")
    if magic == b"P1":
        chars = [c for c in tokens.data[tokens.pos :].decode("ascii", "ignore") if c in "01"]
        if len(chars) < width * height:
            raise ValueError("truncated PBM raster")
        bits = np.array([int(c) for c in chars[: width * height]], dtype=np.uint8)
        return bits.reshape(height, width)
    tokens.skip_single_whitespace()
    row_bytes = (width + 7) // 8
    raster = tokens.data[tokens.pos : tokens.pos + row_bytes * height]
    if len(raster) < row_bytes * height:
        raise ValueError("truncated PBM raster")
    packed = np.frombuffer(raster, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(packed, axis=1)[:, :width]
    return bits.astype(np.uint8)


def load_message_bits(path):
    """Load watermark bits from a PBM/PGM image or a raw 0/1 text file.

    PGM pixels threshold at 128.  Any other file is read as text and every
    '0'/'1' character becomes one bit.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    head = data[:2]
    if head in (b"P1", b"P4"):
        return tuple(int(b) for b in read_pbm(data).ravel())
    if head in (b"P2", b"P5"):
        img = read_pgm(data)
        return tuple(int(v >= 128) for v in img.ravel())
    chars = [c for c in data.decode("ascii", "ignore") if c in "01"]
    if not chars:
        raise ValueError(f"no usable bits in message file {path}")
    return tuple(int(c) for c in chars)
