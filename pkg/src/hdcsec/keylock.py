"""Encoder lock keys: generation, validation, serialization, complexity.

A lock key holds one sub-key per feature; each sub-key is a list of L
(base index, rotation) pairs over a public pool of P random base vectors.
The locked feature vector is the product of the L rotated bases, so
recovering one feature by guessing costs (D*P)**L tries and the whole
mapping costs N*(D*P)**L, versus N**2 for the unlocked divide-and-conquer
attack. Complexity values are exact big integers; they overflow 64 bits
at modest L.

Key file format (little-endian throughout):
  magic "HDLK" | version u16 | N u32 | L u32 | P u32 | D u32 |
  N*L records of (base_index u32, rotation u32), feature-major |
  CRC-32C u32 of all preceding bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .errors import FormatError, InvalidDimensionError, KeyValidationError
from .fileio import atomic_write_bytes, finish_checked, read_checked
from .hv import Hypervector
from .item_memory import generate_feature_hvs
from .rng import Rng

KEY_MAGIC = b"HDLK"
KEY_VERSION = 1


@dataclass
class BasePool:
    """Public pool of P random base hypervectors."""

    p: int
    dim: int
    bases: list[Hypervector]
    seed: int = 0

    def __post_init__(self):
        if len(self.bases) != self.p:
            raise InvalidDimensionError("pool arity mismatch")
        for hv in self.bases:
            if hv.dim != self.dim:
                raise InvalidDimensionError("pool dimension mismatch")

    @classmethod
    def generate(cls, p: int, dim: int, seed: int) -> "BasePool":
        """Draw P bases from the same stream as baseline feature memories.

        With P = N and the same seed, the pool reproduces the unlocked
        model's feature vectors exactly, so an identity key degenerates
        the lock to the baseline encoder bit-for-bit.
        """
        rng = Rng(seed)
        return cls(p, dim, generate_feature_hvs(p, dim, rng.child("fea")), seed)

    def matrix(self) -> np.ndarray:
        return np.stack([hv.bipolar() for hv in self.bases])


@dataclass
class LockKey:
    """N sub-keys of L (base_index, rotation) pairs; shape (N, L, 2)."""

    n_features: int
    layers: int
    entries: np.ndarray  # int64, (N, L, 2)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64)
        if self.entries.shape != (self.n_features, self.layers, 2):
            raise KeyValidationError(
                f"entries shape {self.entries.shape} != "
                f"({self.n_features}, {self.layers}, 2)"
            )

    @classmethod
    def identity(cls, n: int) -> "LockKey":
        """Single-layer key mapping feature i to base i with rotation 0."""
        entries = np.zeros((n, 1, 2), dtype=np.int64)
        entries[:, 0, 0] = np.arange(n)
        return cls(n, 1, entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LockKey)
            and self.n_features == other.n_features
            and self.layers == other.layers
            and bool(np.array_equal(self.entries, other.entries))
        )


def generate_key(n: int, layers: int, p: int, dim: int, rng: Rng) -> LockKey:
    """Uniform random key; sub-keys are redrawn until free of duplicate pairs."""
    if n < 1 or layers < 1 or p < 1 or dim < 1:
        raise InvalidDimensionError("key parameters must all be >= 1")
    entries = np.zeros((n, layers, 2), dtype=np.int64)
    for i in range(n):
        while True:
            pairs = [(rng.randbelow(p), rng.randbelow(dim)) for _ in range(layers)]
            if len(set(pairs)) == layers:
                break
        entries[i] = pairs
    return LockKey(n, layers, entries)


def validate_key(key: LockKey, pool: BasePool) -> list[dict]:
    """Check a key against its pool; returns violations as data, not errors.

    Duplicate (base, rotation) pairs inside one sub-key are rejected
    because the bipolar product is self-inverse: a repeated pair cancels
    and silently weakens the lock.
    """
    violations = []
    for i in range(key.n_features):
        sub = key.entries[i]
        for layer, (base, rot) in enumerate(sub):
            if not 0 <= base < pool.p:
                violations.append(
                    {"sub_key": i, "layer": layer,
                     "reason": f"base index {base} out of range [0, {pool.p})"}
                )
            if not 0 <= rot < pool.dim:
                violations.append(
                    {"sub_key": i, "layer": layer,
                     "reason": f"rotation {rot} out of range [0, {pool.dim})"}
                )
        pairs = [tuple(pair) for pair in sub.tolist()]
        if len(set(pairs)) != len(pairs):
            violations.append(
                {"sub_key": i, "layer": None,
                 "reason": "duplicate (base, rotation) pair within sub-key"}
            )
    return violations


def attack_complexity(n: int, dim: int, p: int, layers: int) -> int:
    """Guesses to recover all N locked features: exactly N * (D*P)**L."""
    if min(n, dim, p, layers) < 1:
        raise InvalidDimensionError("complexity arguments must all be >= 1")
    return n * (dim * p) ** layers


def per_feature_complexity(dim: int, p: int, layers: int) -> int:
    """Guesses to recover a single locked feature: (D*P)**L."""
    if min(dim, p, layers) < 1:
        raise InvalidDimensionError("complexity arguments must all be >= 1")
    return (dim * p) ** layers


def baseline_complexity(n: int) -> int:
    """Guess count for the unlocked divide-and-conquer attack: N**2."""
    if n < 1:
        raise InvalidDimensionError("n must be >= 1")
    return n * n


def sig3_round(value) -> Decimal:
    """Value rounded (half-even) to 3 significant figures."""
    d = Decimal(value)
    if d == 0:
        return Decimal(0)
    exp = d.adjusted()  # position of the leading digit
    return d.quantize(Decimal(1).scaleb(exp - 2), rounding=ROUND_HALF_EVEN)


def sig3_trunc(value) -> Decimal:
    """Value truncated to 3 significant figures."""
    d = Decimal(value)
    if d == 0:
        return Decimal(0)
    exp = d.adjusted()
    quantum = Decimal(1).scaleb(exp - 2)
    return (d // quantum) * quantum


def save_key(key: LockKey, pool_size: int, dim: int, path: str) -> None:
    """Serialize to the key file format (bit-exact, checksummed).

    The header carries N, L, P, D so a key cannot be applied to a
    mismatched pool.
    """
    body = struct.pack(
        "<HIIII", KEY_VERSION, key.n_features, key.layers, pool_size, dim
    )
    flat = key.entries.reshape(-1, 2).astype("<u4")
    body += flat.tobytes()
    atomic_write_bytes(path, finish_checked(KEY_MAGIC, body))


def load_key(path: str) -> tuple[LockKey, int, int]:
    """Read a key file; returns (key, pool_size, dim)."""
    body = read_checked(path, KEY_MAGIC)
    if len(body) < 18:
        raise FormatError(f"{path}: truncated key header")
    version, n, layers, p, dim = struct.unpack_from("<HIIII", body, 0)
    if version != KEY_VERSION:
        raise FormatError(f"{path}: unsupported key version {version}")
    expected = n * layers * 8
    payload = bytes(body[18:])
    if len(payload) != expected:
        raise FormatError(
            f"{path}: key payload is {len(payload)} bytes, expected {expected}"
        )
    entries = (
        np.frombuffer(payload, dtype="<u4")
        .astype(np.int64)
        .reshape(n, layers, 2)
    )
    return LockKey(n, layers, entries), p, dim
