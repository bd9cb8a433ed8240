"""Bipolar hypervectors and the multiply / add / permute operator set.

Vectors live in {+1,-1}^D. Storage is bit-packed: 64 elements per
little-endian word with +1 mapped to bit 1 and unused high bits of the
last word held at zero, so Hamming distance is XOR plus popcount and a
D=10,000 vector costs 1,250 bytes. `Accumulator` holds the element-wise
signed integer sums of +-1 terms produced by bundling (encoder output
before the sign, class vectors during training).

All values are immutable after construction and every operation is a
pure function of its inputs, so everything here is safe to share across
threads.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateVectorError,
    DimensionMismatchError,
    InvalidDimensionError,
)
from .rng import Rng

_WORD_BITS = 64


def _n_words(dim: int) -> int:
    return (dim + _WORD_BITS - 1) // _WORD_BITS


def _pad_mask(dim: int, n_words: int) -> np.ndarray:
    """Per-word mask that zeroes the unused high bits of the last word."""
    mask = np.full(n_words, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    rem = dim % _WORD_BITS
    if rem:
        mask[-1] = np.uint64((1 << rem) - 1)
    return mask


def _pack(bits: np.ndarray, dim: int) -> np.ndarray:
    """0/1 uint8 array -> packed uint64 words (element i = bit i%64 of word i//64)."""
    nw = _n_words(dim)
    packed = np.packbits(bits, bitorder="little")
    buf = np.zeros(nw * 8, dtype=np.uint8)
    buf[: len(packed)] = packed
    return buf.view(np.uint64)


def _unpack(words: np.ndarray, dim: int) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:dim]


class Hypervector:
    """A D-dimensional vector over {+1, -1}, stored bit-packed."""

    __slots__ = ("dim", "words", "_bipolar")

    def __init__(self, dim: int, words: np.ndarray):
        if dim < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
        if len(words) != _n_words(dim):
            raise DimensionMismatchError(
                f"expected {_n_words(dim)} words for dim {dim}, got {len(words)}"
            )
        self.dim = dim
        self.words = words
        self.words.flags.writeable = False
        self._bipolar = None

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "Hypervector":
        """Build from a 0/1 array; bit 1 means element +1."""
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(len(bits), _pack(bits, len(bits)))

    @classmethod
    def from_bipolar(cls, elements: np.ndarray) -> "Hypervector":
        """Build from a +-1 array (any integer dtype; positives map to +1)."""
        arr = np.asarray(elements)
        if arr.ndim != 1 or len(arr) < 1:
            raise InvalidDimensionError("elements must be a non-empty 1-D array")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("elements must all be +1 or -1")
        return cls.from_bits((arr > 0).astype(np.uint8))

    def bits(self) -> np.ndarray:
        """Elements as a 0/1 uint8 array."""
        return _unpack(self.words, self.dim)

    def bipolar(self) -> np.ndarray:
        """Elements as an int8 +-1 array (cached, read-only)."""
        if self._bipolar is None:
            arr = (self.bits().astype(np.int8) << 1) - 1
            arr.flags.writeable = False
            self._bipolar = arr
        return self._bipolar

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypervector)
            and self.dim == other.dim
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.dim, self.words.tobytes()))

    def __repr__(self):
        return f"Hypervector(dim={self.dim})"


class Accumulator:
    """Element-wise signed sum of +-1 terms (int32 elements)."""

    __slots__ = ("dim", "elements", "term_count")

    def __init__(self, dim: int, elements: np.ndarray, term_count: int):
        if dim < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
        elements = np.asarray(elements, dtype=np.int32)
        if len(elements) != dim:
            raise DimensionMismatchError(
                f"elements length {len(elements)} != dim {dim}"
            )
        if term_count < 0:
            raise ValueError("term_count must be non-negative")
        if term_count < int(np.abs(elements).max(initial=0)):
            raise ValueError("|element| exceeds term_count")
        self.dim = dim
        self.elements = elements
        self.elements.flags.writeable = False
        self.term_count = term_count

    @classmethod
    def zeros(cls, dim: int) -> "Accumulator":
        return cls(dim, np.zeros(dim, dtype=np.int32), 0)

    @classmethod
    def from_hypervector(cls, hv: Hypervector) -> "Accumulator":
        return cls(hv.dim, hv.bipolar().astype(np.int32), 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Accumulator)
            and self.dim == other.dim
            and self.term_count == other.term_count
            and bool(np.array_equal(self.elements, other.elements))
        )

    def __repr__(self):
        return f"Accumulator(dim={self.dim}, term_count={self.term_count})"


def random_hypervector(dim: int, rng: Rng) -> Hypervector:
    """Draw a vector with i.i.d. fair-coin elements.

    Independent draws are nearly orthogonal (normalized Hamming distance
    concentrates at 0.5 with sigma = 0.5/sqrt(D)), which is the geometry
    feature hypervectors rely on.
    """
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    nw = _n_words(dim)
    words = rng.words(nw) & _pad_mask(dim, nw)
    return Hypervector(dim, words)


def multiply(a: Hypervector, b: Hypervector) -> Hypervector:
    """Element-wise product (binding). Self-inverse: multiply(a, a) is all ones."""
    _check_dims(a, b)
    # +1 <-> bit 1 makes the bipolar product an XNOR on bits
    words = ~(a.words ^ b.words) & _pad_mask(a.dim, len(a.words))
    return Hypervector(a.dim, words)


def negate(a: Hypervector) -> Hypervector:
    """Element-wise negation."""
    words = ~a.words & _pad_mask(a.dim, len(a.words))
    return Hypervector(a.dim, words)


def add(acc: Accumulator, hv: Hypervector) -> Accumulator:
    """Bundle one more +-1 vector into an accumulator."""
    if acc.dim != hv.dim:
        raise DimensionMismatchError(f"dim {acc.dim} != dim {hv.dim}")
    return Accumulator(
        acc.dim, acc.elements + hv.bipolar().astype(np.int32), acc.term_count + 1
    )


def bundle(hvs) -> Accumulator:
    """Sum a sequence of hypervectors into a fresh accumulator."""
    hvs = list(hvs)
    if not hvs:
        raise ValueError("cannot bundle an empty sequence")
    dim = hvs[0].dim
    total = np.zeros(dim, dtype=np.int32)
    for hv in hvs:
        if hv.dim != dim:
            raise DimensionMismatchError("mixed dimensions in bundle")
        total += hv.bipolar()
    return Accumulator(dim, total, len(hvs))


def rotate(hv: Hypervector, k: int) -> Hypervector:
    """Cyclic rotation: element i of the result is element (i+k) mod D.

    rotate(hv, 0) == hv, rotate(hv, D) == hv, and rotations compose
    additively. The direction convention is shared by the encoder lock
    and the guess sweeps, which must agree bit-for-bit.
    """
    k %= hv.dim
    if k == 0:
        return hv
    bits = np.roll(hv.bits(), -k)
    return Hypervector(hv.dim, _pack(bits, hv.dim))


def binarize(acc: Accumulator, rng: Rng) -> Hypervector:
    """Sign of each element; zeros get a deterministic pseudo-random sign.

    The tie sign for element i depends only on (rng seed, stream label, i),
    so the output is reproducible and independent of evaluation order.
    """
    elems = acc.elements
    bits = (elems > 0).astype(np.uint8)
    zero = elems == 0
    if zero.any():
        ties = rng.tie_signs(acc.dim)
        bits[zero] = ties[zero] > 0
    return Hypervector(acc.dim, _pack(bits, acc.dim))


def hamming(a: Hypervector, b: Hypervector) -> float:
    """Normalized Hamming distance: fraction of positions that differ."""
    _check_dims(a, b)
    diff = int(np.bitwise_count(a.words ^ b.words).sum())
    return diff / a.dim


def dot(a: Hypervector, b: Hypervector) -> int:
    """Integer dot product of the two bipolar vectors."""
    _check_dims(a, b)
    agree = a.dim - int(np.bitwise_count(a.words ^ b.words).sum())
    return 2 * agree - a.dim


def cosine(a: Accumulator, b: Accumulator) -> float:
    """Cosine similarity of two accumulators.

    Proportional integer vectors score exactly +-1.0 (the proportionality
    test is done in exact integer arithmetic, not floating point), which
    is what lets the non-binary attack claim equality with full
    confidence.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim {a.dim} != dim {b.dim}")
    av = a.elements.astype(np.int64)
    bv = b.elements.astype(np.int64)
    d = int(av @ bv)
    na = int(av @ av)
    nb = int(bv @ bv)
    if na == 0 or nb == 0:
        raise DegenerateVectorError("cosine undefined for a zero vector")
    if d * d == na * nb:  # exact colinearity, avoids sqrt rounding
        return 1.0 if d > 0 else -1.0
    return d / float(np.sqrt(float(na) * float(nb)))


def _check_dims(a: Hypervector, b: Hypervector) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim {a.dim} != dim {b.dim}")


def stack_bipolar(hvs) -> np.ndarray:
    """Row-stack the bipolar forms of a hypervector sequence (int8 matrix)."""
    return np.stack([hv.bipolar() for hv in hvs])
