"""Counter-based random streams.

Every trial ``j`` owns one Philox-4x64 block: the four 64-bit words produced
at counter ``j`` under the key ``(seed, domain)``.  Any contiguous range of
trials can therefore be regenerated independently, which is what lets the
ensemble be built in parallel chunks with results identical to a sequential
run.  Rare redraws (a zero vector) use counter ``(j, 0, 0, attempt)``, a
region the main sequence never reaches.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from numpy.random import Philox

from macrobell.errors import DomainError

WORDS_PER_TRIAL = 4
CHUNK = 1 << 16

# Domain tags keep streams derived from the same seed apart.
ENSEMBLE_DOMAIN = 0
SETTINGS_DOMAIN = 1
ORIENTATION_DOMAIN = 2

_TWO_POW_64 = 1 << 64


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _TWO_POW_64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


class SeededStream:
    """Deterministic stream of per-trial word blocks.

    ``block(start, count)`` is a pure function of ``(seed, domain, start,
    count)``.  ``next_block`` walks a cursor for callers that draw one trial
    at a time.
    """

    def __init__(self, seed: int, domain: int = ENSEMBLE_DOMAIN):
        self.seed = check_seed(seed)
        self.domain = int(domain)
        self.position = 0

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, domain={self.domain}, position={self.position})"

    def block(self, start: int, count: int, attempt: int = 0) -> np.ndarray:
        """Words for trials ``start .. start+count-1`` as a (count, 4) uint64 array."""
        if count < 0 or start < 0:
            raise DomainError("start and count must be nonnegative")
        bitgen = Philox(key=[self.seed, self.domain], counter=[start, 0, 0, attempt])
        return bitgen.random_raw(WORDS_PER_TRIAL * count).reshape(count, WORDS_PER_TRIAL)

    def trial(self, j: int, attempt: int = 0) -> np.ndarray:
        return self.block(j, 1, attempt)[0]

    def next_block(self, count: int = 1) -> tuple[int, np.ndarray]:
        start = self.position
        words = self.block(start, count)
        self.position += count
        return start, words


def to_unit_interval(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in (0, 1] using the top 53 bits."""
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * (1.0 / 9007199254740992.0)


def chunked(total: int, fn: Callable[[int, int], np.ndarray], workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(start, count)`` over fixed chunks and concatenate in order.

    Chunk boundaries do not depend on ``workers``, so the output is the same
    for any thread count.
    """
    spans = [(s, min(CHUNK, total - s)) for s in range(0, total, CHUNK)]
    if workers <= 1 or len(spans) <= 1:
        parts = [fn(s, c) for s, c in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda span: fn(*span), spans))
    if not parts:
        return fn(0, 0)
    return np.concatenate(parts)
