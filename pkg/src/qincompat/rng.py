"""Splittable deterministic random streams.

Every stochastic routine in this package takes a :class:`RandomStream` rather
than a bare seed or a shared generator. A stream is a value: the pair
``(seed, path)`` fully determines every number it will ever produce, and
``split(i)`` derives an independent child stream without perturbing the
parent. This makes nested experiments reproducible from a single master seed
and keeps sibling subtasks statistically independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MAX_SEED = 2**64


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on a counter-based random stream.

    Parameters
    ----------
    seed : int
        Master seed, a 64-bit unsigned integer.
    path : tuple of int
        Split path from the master stream; ``()`` is the root.
    """

    seed: int
    path: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not (0 <= self.seed < _MAX_SEED):
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        path = tuple(int(i) for i in self.path)
        if any(i < 0 for i in path):
            raise ValueError(f"split indices must be nonnegative, got {path!r}")
        object.__setattr__(self, "path", path)

    def split(self, index: int) -> "RandomStream":
        """Return the child stream at ``index``, independent of this one."""
        if index < 0:
            raise ValueError(f"split index must be nonnegative, got {index}")
        return RandomStream(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        """Materialize a fresh numpy generator for this stream.

        Each call returns a new generator starting from the same point, so a
        stream may be replayed; callers that need several disjoint sequences
        should split first.
        """
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))
