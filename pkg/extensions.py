# extensions.py
from enum import IntEnum

import numpy as np
from mpmath import iv
from tqdm import tqdm

from config import Config


class Stream(IntEnum):
    """First spawn-key entry of every random stream; one value per purpose."""

    PERFECT_SPLIT = 0
    CLUSTERED = 1
    RANDOM_CONFIG = 2
    CAPACITY = 3
    CHOICE = 4
    HIT = 5
    CHECK = 6
    MATRIX = 7
    SURVEY = 8


def rng_stream(seed, stream: Stream, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(stream), *key)))


def interval_context(precision=None):
    """mpmath's interval context at the configured working precision (bits)."""
    iv.prec = precision or Config.INTERVAL_PRECISION
    return iv


def progress(iterable, **kwargs):
    return tqdm(iterable, disable=not Config.SHOW_PROGRESS, leave=False, **kwargs)
