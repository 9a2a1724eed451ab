"""Seeded random streams for reproducible simulation runs."""

from typing import Iterator, Sequence, Union

import numpy as np

SeedKey = Union[int, str]

_CHUNK = 4096


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, int):
        return key
    # stable across interpreter runs, unlike hash()
    return int.from_bytes(key.encode("utf-8"), "little") % (2 ** 63)


class SeededRNG:
    """numpy Generator wrapper that derives named child streams from one seed."""

    def __init__(self, seed: int, path: Sequence[int] = ()):
        self._seed = seed
        self._path = tuple(path)
        self._rng = np.random.default_rng(np.random.SeedSequence([seed, *self._path]))

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def generator(self) -> np.random.Generator:
        return self._rng

    def fork(self, *keys: SeedKey) -> "SeededRNG":
        """Child stream keyed by name; independent of how much the parent consumed."""
        return SeededRNG(self._seed, self._path + tuple(_key_to_int(k) for k in keys))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._rng.uniform(low, high, size)

    def random(self, size=None):
        return self._rng.random(size)

    def exponential_stream(self, scale: float) -> Iterator[float]:
        """Endless exponential draws, pulled from the generator in chunks."""
        while True:
            for value in self._rng.exponential(scale, _CHUNK).tolist():
                yield value


def derive_seed(seed: int, index: int) -> int:
    """Seed of the index-th member of a sweep (seed XOR index)."""
    return seed ^ index
