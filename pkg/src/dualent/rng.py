"""Counter-based random substreams.

Pair ``k`` of stream ``(seed, stream)`` always receives the four 64-bit words
of Philox block ``k`` under key ``(seed, stream)``, however the pair range is
split into shards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WORDS_PER_PAIR = 4
UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class PairStream:
    seed: int
    stream: int

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) <= UINT64_MAX:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def words(self, start: int, count: int) -> np.ndarray:
        """Random words for pairs ``start .. start + count - 1``, shape (count, 4)."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        counter = np.array([start, 0, 0, 0], dtype=np.uint64)
        bits = np.random.Philox(key=key, counter=counter)
        return bits.random_raw(WORDS_PER_PAIR * count).reshape(count, WORDS_PER_PAIR)


def threshold(probability: float) -> int | None:
    """Integer cut so that P(word < cut) = probability; None means always."""
    if probability >= 1.0:
        return None
    if probability <= 0.0:
        return 0
    return int(probability * 2.0**64)
