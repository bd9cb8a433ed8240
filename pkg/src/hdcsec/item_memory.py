"""Item memory: indexed feature and value hypervectors plus quantization.

Feature vectors are independent random draws (pairwise distance ~ 0.5).
Value vectors interpolate between two orthogonal endpoints by cumulative
negation of disjoint blocks inside the first floor(D/2) positions, so the
distance between levels a and b is exactly proportional to |a-b| up to
one block of rounding. The index order of both pools is the mapping an
attacker tries to recover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidDimensionError
from .hv import Hypervector, _pack, random_hypervector
from .rng import Rng


def generate_feature_hvs(n: int, dim: int, rng: Rng) -> list[Hypervector]:
    """N independent random hypervectors (near-orthogonal for large D)."""
    if n < 1:
        raise InvalidDimensionError(f"need at least one feature vector, got {n}")
    return [random_hypervector(dim, rng) for _ in range(n)]


def level_block_sizes(dim: int, m: int) -> list[int]:
    """Partition of the first dim//2 positions into m-1 near-equal blocks.

    The remainder is spread one position per block from the front, so no
    block deviates from dim//2/(m-1) by more than one.
    """
    half = dim // 2
    base, rem = divmod(half, m - 1)
    return [base + 1] * rem + [base] * (m - 1 - rem)


def generate_value_hvs(m: int, dim: int, rng: Rng) -> list[Hypervector]:
    """M level vectors with distances linear in the level gap.

    Level 0 is random; level j equals level j-1 with block j-1 negated.
    Level j therefore differs from level 0 in exactly the first j blocks,
    the endpoints differ in floor(D/2) positions (distance ~ 0.5), and
    hamming(val[a], val[b]) depends only on |a-b|.
    """
    if m < 2:
        raise InvalidDimensionError(f"need at least two levels, got {m}")
    if dim < 2 * (m - 1):
        raise InvalidDimensionError(
            f"dim {dim} too small for {m} levels (need >= {2 * (m - 1)})"
        )
    sizes = level_block_sizes(dim, m)
    bits = random_hypervector(dim, rng).bits().copy()
    out = [Hypervector(dim, _pack(bits, dim))]
    start = 0
    for size in sizes:
        bits[start : start + size] ^= 1
        start += size
        out.append(Hypervector(dim, _pack(bits, dim)))
    return out


def quantize(value: float, v_min: float, v_max: float, m: int) -> int:
    """Discretize a value to one of m levels over [v_min, v_max].

    Floor-based with clamping at both ends, so v_min maps to 0, v_max to
    m-1, and out-of-range inputs saturate.
    """
    if v_max <= v_min:
        raise DataError(f"invalid value range [{v_min}, {v_max}]")
    level = int(np.floor((value - v_min) / (v_max - v_min) * m))
    return min(max(level, 0), m - 1)


def quantize_array(values: np.ndarray, v_min: float, v_max: float, m: int) -> np.ndarray:
    """Vectorized `quantize` over an array of any shape."""
    if v_max <= v_min:
        raise DataError(f"invalid value range [{v_min}, {v_max}]")
    levels = np.floor((np.asarray(values, dtype=np.float64) - v_min)
                      / (v_max - v_min) * m)
    return np.clip(levels, 0, m - 1).astype(np.int64)


@dataclass
class ItemMemory:
    """The indexed store of N feature and M value hypervectors."""

    n_features: int
    n_levels: int
    dim: int
    fea: list[Hypervector]
    val: list[Hypervector]
    seed: int = 0
    _fea_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _val_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.fea) != self.n_features or len(self.val) != self.n_levels:
            raise InvalidDimensionError("item memory arity mismatch")
        for hv in self.fea + self.val:
            if hv.dim != self.dim:
                raise InvalidDimensionError("item memory dimension mismatch")

    @classmethod
    def generate(cls, n_features: int, n_levels: int, dim: int, seed: int) -> "ItemMemory":
        rng = Rng(seed)
        fea = generate_feature_hvs(n_features, dim, rng.child("fea"))
        val = generate_value_hvs(n_levels, dim, rng.child("val"))
        return cls(n_features, n_levels, dim, fea, val, seed)

    def fea_matrix(self) -> np.ndarray:
        """(N, D) int8 matrix of feature vectors, built once."""
        if self._fea_matrix is None:
            self._fea_matrix = np.stack([hv.bipolar() for hv in self.fea])
        return self._fea_matrix

    def val_matrix(self) -> np.ndarray:
        """(M, D) int8 matrix of value vectors, built once."""
        if self._val_matrix is None:
            self._val_matrix = np.stack([hv.bipolar() for hv in self.val])
        return self._val_matrix
