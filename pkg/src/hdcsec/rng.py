"""Deterministic seeded random streams.

Every random draw in the package flows through :class:`Rng`. Words come
from a counter-based mixing function (splitmix64 over a key derived from
the seed and a stream label), so the stream for a given (seed, label) is
identical on every platform and under any thread schedule. That is what
makes models, keys and attack reports byte-reproducible.

Sign tie-breaks use a separate, counter-free mixing of (seed, label,
element index): the result depends only on the element position, never on
evaluation order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TIE_DOMAIN = 0x7463_6972_6B73_2121  # domain separator for tie-break words

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes (stable across processes/platforms)."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def splitmix64(x: int) -> int:
    """Scalar splitmix64 finalizer; the reference for the vector path."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B9B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _splitmix64_vec(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2**64, matching the scalar version
    z = x + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4B9B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Seeded, labelled random stream.

    Two instances with the same (seed, label) produce identical streams.
    `words` advances a draw counter; `tie_signs` is a pure function of the
    element index and consumes nothing.
    """

    __slots__ = ("seed", "label", "_key", "_tie_key", "_pos")

    def __init__(self, seed: int, label: str = "root"):
        self.seed = seed & _MASK64
        self.label = label
        self._key = splitmix64(self.seed ^ fnv1a64(label.encode("utf-8")))
        self._tie_key = splitmix64(self._key ^ _TIE_DOMAIN)
        self._pos = 0

    def child(self, suffix: str) -> "Rng":
        """Independent stream for a sub-context, e.g. rng.child("fea")."""
        return Rng(self.seed, f"{self.label}/{suffix}")

    def words(self, n: int) -> np.ndarray:
        """Next `n` 64-bit words of the stream (advances the counter)."""
        t = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        return _splitmix64_vec(np.uint64(self._key) + t * np.uint64(_GOLDEN))

    def bits(self, n: int) -> np.ndarray:
        """Next `n` random bits as a uint8 0/1 array."""
        nwords = (n + 63) // 64
        w = self.words(nwords)
        return np.unpackbits(w.view(np.uint8), bitorder="little")[:n]

    def integers(self, bound: int, size: int) -> np.ndarray:
        """Uniform ints in [0, bound). Modulo bias is < bound/2**64."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.words(size) % np.uint64(bound)).astype(np.int64)

    def randbelow(self, bound: int) -> int:
        """Single uniform int in [0, bound), exact (rejection sampled)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (2**64 // bound) * bound
        while True:
            v = int(self.words(1)[0])
            if v < limit:
                return v % bound

    def uniform(self, size: int) -> np.ndarray:
        """Uniform floats in [0, 1) with 53-bit resolution."""
        return (self.words(size) >> np.uint64(11)) * (2.0**-53)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n)."""
        return np.argsort(self.words(n), kind="stable")

    def tie_signs(self, n: int) -> np.ndarray:
        """Per-element +-1 pattern for sign(0) tie-breaks.

        Pure function of (seed, label, element index): element i takes bit
        (i mod 64) of splitmix64(tie_key + (i//64 + 1)*GOLDEN). Does not
        advance the stream, so results never depend on evaluation order.
        """
        nwords = (n + 63) // 64
        t = np.arange(1, nwords + 1, dtype=np.uint64)
        w = _splitmix64_vec(np.uint64(self._tie_key) + t * np.uint64(_GOLDEN))
        bits = np.unpackbits(w.view(np.uint8), bitorder="little")[:n]
        return (bits.astype(np.int8) << 1) - 1
