"""Shared fixtures: deterministic synthetic hosts and key material.

Hosts are smooth multi-octave random fields with a little fine texture,
normalized into [32, 223] so embedding excursions never saturate.
"""

import numpy as np
import pytest
from scipy import ndimage

from chaosmark.netpbm import save_pgm
from chaosmark.strategies import generate_key_material, write_key_file

CORPUS_SIZE = 10


def synthesize_host(seed, size=512):
    rng = np.random.default_rng(seed)
    img = np.zeros((size, size))
    for scale, amp in ((size // 8, 1.0), (size // 32, 0.45), (max(size // 128, 2), 0.2)):
        low = rng.standard_normal((size // scale + 2, size // scale + 2))
        img += amp * ndimage.zoom(low, scale, order=3)[:size, :size]
    img += 0.02 * rng.standard_normal((size, size))
    lo, hi = img.min(), img.max()
    img = (img - lo) / (hi - lo)
    return np.round(32 + 191 * img).astype(np.uint8)


@pytest.fixture(scope="session")
def make_host():
    return synthesize_host


@pytest.fixture(scope="session")
def small_host():
    return synthesize_host(101, 64)


@pytest.fixture(scope="session")
def small_host_b():
    return synthesize_host(202, 64)


@pytest.fixture(scope="session")
def message_bits():
    rng = np.random.default_rng(20240701)
    return tuple(int(b) for b in rng.integers(0, 2, 4096))


@pytest.fixture(scope="session")
def corpus():
    return [(f"host{i:02d}", synthesize_host(1000 + i)) for i in range(CORPUS_SIZE)]


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, corpus):
    directory = tmp_path_factory.mktemp("corpus")
    for host_id, img in corpus:
        save_pgm(directory / f"{host_id}.pgm", img)
    return directory


@pytest.fixture(scope="session")
def key_material(corpus):
    return generate_key_material(424242, [host_id for host_id, _ in corpus])


@pytest.fixture(scope="session")
def key_file(tmp_path_factory, key_material):
    path = tmp_path_factory.mktemp("keys") / "keys.txt"
    write_key_file(path, key_material)
    return path
