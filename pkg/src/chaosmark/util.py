"""Small shared helpers."""

from __future__ import annotations

import os
import tempfile

import numpy as np

__all__ = ["round_half_away", "atomic_write_bytes"]


def round_half_away(x):
    """Round to nearest integer with ties away from zero (fixed platform-free rule)."""
    x = np.asarray(x)
    return np.trunc(x + np.copysign(0.5, x))


def atomic_write_bytes(path, data):
    """Write a file through a temp name + rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-chaosmark-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
