"""Seeded randomness for protocol runs.

Every "with equal probability" choice in the protocols and attacks goes
through an :class:`Rng`. The underlying stream is numpy's counter-based
Philox generator, so a seed fully determines a run. :class:`ScriptedRng`
replays fixed choices, which is how worked examples are pinned.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import deque
from itertools import accumulate
from typing import Iterable, Sequence

import numpy as np

SEED_MASK = (1 << 64) - 1


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Seed for one Monte Carlo trial: ``base_seed XOR trial_index``."""
    return (int(base_seed) ^ int(trial_index)) & SEED_MASK


class Rng:
    """Deterministic random stream with the handful of draws the protocols need."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & SEED_MASK
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def bit(self) -> int:
        return int(self._gen.integers(2))

    def bits(self, n: int) -> list[int]:
        return [int(b) for b in self._gen.integers(2, size=n)]

    def index(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return int(self._gen.integers(n))

    def outcome(self, probs: Sequence[float]) -> int:
        """Index of a measurement outcome drawn with the given probabilities.

        Inverse-CDF sampling on one uniform draw. :meth:`outcomes` applies
        the same rule to a vector of draws, so both consume the stream alike.
        """
        cdf = list(accumulate(float(p) for p in probs))
        u = self._gen.random() * cdf[-1]
        return min(bisect_right(cdf, u), len(cdf) - 1)

    def outcomes(self, probs: Sequence[float], shots: int) -> np.ndarray:
        cdf = np.cumsum(np.asarray(probs, dtype=float))
        u = self._gen.random(shots) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)

    def permutation(self, n: int) -> list[int]:
        return [int(x) for x in self._gen.permutation(n)]

    def subset(self, n: int, size: int) -> list[int]:
        """Sorted uniformly random ``size``-subset of ``range(n)``."""
        return sorted(int(x) for x in self._gen.choice(n, size=size, replace=False))

    def random(self) -> float:
        return float(self._gen.random())

    def spawn(self, salt: int) -> "Rng":
        """Independent child stream; used to give each party its own randomness."""
        return Rng((self.seed * 0x9E3779B97F4A7C15 + int(salt) + 1) & SEED_MASK)


class ScriptExhausted(RuntimeError):
    pass


class ScriptedRng(Rng):
    """An :class:`Rng` whose draws come from fixed scripts.

    Each kind of draw has its own queue. When a queue is empty the draw
    falls through to the seeded stream, unless ``strict`` is set, in which
    case :class:`ScriptExhausted` is raised.
    """

    def __init__(
        self,
        bits: Iterable[int] = (),
        outcomes: Iterable[int] = (),
        permutations: Iterable[Sequence[int]] = (),
        subsets: Iterable[Sequence[int]] = (),
        seed: int = 0,
        strict: bool = False,
    ):
        super().__init__(seed)
        self._bits = deque(int(b) for b in bits)
        self._outcomes = deque(int(o) for o in outcomes)
        self._perms = deque(list(p) for p in permutations)
        self._subsets = deque(sorted(s) for s in subsets)
        self.strict = strict

    def _fallback(self, kind: str):
        if self.strict:
            raise ScriptExhausted(f"no scripted {kind} left")

    def bit(self) -> int:
        if self._bits:
            return self._bits.popleft()
        self._fallback("bit")
        return super().bit()

    def bits(self, n: int) -> list[int]:
        return [self.bit() for _ in range(n)]

    def outcome(self, probs: Sequence[float]) -> int:
        if self._outcomes:
            idx = self._outcomes.popleft()
            if probs[idx] <= 1e-12:
                raise ValueError(f"scripted outcome {idx} has zero probability")
            return idx
        self._fallback("outcome")
        return super().outcome(probs)

    def permutation(self, n: int) -> list[int]:
        if self._perms:
            perm = self._perms.popleft()
            if sorted(perm) != list(range(n)):
                raise ValueError("scripted permutation has wrong size")
            return perm
        self._fallback("permutation")
        return super().permutation(n)

    def subset(self, n: int, size: int) -> list[int]:
        if self._subsets:
            sub = self._subsets.popleft()
            if len(sub) != size or any(not 0 <= x < n for x in sub):
                raise ValueError("scripted subset does not fit")
            return sub
        self._fallback("subset")
        return super().subset(n, size)

    def remaining(self) -> dict[str, int]:
        return {
            "bits": len(self._bits),
            "outcomes": len(self._outcomes),
            "permutations": len(self._perms),
            "subsets": len(self._subsets),
        }
