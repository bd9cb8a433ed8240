"""Record-based encoding for baseline and locked models.

A quantized sample (f_1 .. f_N) encodes to the accumulator
sum_i val[f_i] * fea[i]; binary mode applies the sign afterwards. Under
a lock, fea[i] is the element-wise product of L rotated base vectors
named by the key; with the key in hand the products are derived once and
encoding proceeds exactly as in the baseline, so locked and unlocked
costs coincide for L = 1 and grow by one multiply per extra layer.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, InvalidDimensionError, KeyValidationError
from .hv import Accumulator, Hypervector, binarize
from .item_memory import ItemMemory, generate_value_hvs
from .keylock import BasePool, LockKey, generate_key, validate_key
from .rng import Rng


def derive_locked_feature_hvs(pool: BasePool, key: LockKey) -> list[Hypervector]:
    """Feature vectors as products of the key's rotated pool bases."""
    violations = validate_key(key, pool)
    if violations:
        raise KeyValidationError(f"invalid key: {violations}")
    mat = pool.matrix()
    out = []
    for sub in key.entries:
        prod = None
        for base, rot in sub:
            layer = np.roll(mat[base], -int(rot))
            prod = layer if prod is None else prod * layer
        out.append(Hypervector.from_bipolar(prod))
    return out


@dataclass
class EncoderConfig:
    """Everything `encode` needs: mode, item memory, optional lock."""

    mode: str
    item_memory: ItemMemory
    pool: BasePool | None = None
    key: LockKey | None = None

    def __post_init__(self):
        if self.mode not in ("binary", "non-binary"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if (self.pool is None) != (self.key is None):
            raise ConfigError("lock requires both a base pool and a key")
        if self.key is not None:
            if self.key.n_features != self.item_memory.n_features:
                raise ConfigError(
                    f"key covers {self.key.n_features} features, "
                    f"item memory has {self.item_memory.n_features}"
                )
            if self.pool.dim != self.item_memory.dim:
                raise ConfigError("pool dimension differs from item memory")

    @property
    def locked(self) -> bool:
        return self.key is not None

    @property
    def n_features(self) -> int:
        return self.item_memory.n_features

    @property
    def n_levels(self) -> int:
        return self.item_memory.n_levels

    @property
    def dim(self) -> int:
        return self.item_memory.dim


def build_encoder(
    mode: str,
    n_features: int,
    n_levels: int,
    dim: int,
    seed: int,
    pool_size: int | None = None,
    layers: int | None = None,
    key: LockKey | None = None,
) -> EncoderConfig:
    """Construct a baseline or locked encoder from scratch.

    The value stream and the feature/base stream are keyed only by the
    seed, so a locked encoder built with pool_size == n_features and an
    identity key reproduces the baseline encoder exactly.
    """
    rng = Rng(seed)
    if pool_size is None and layers is None and key is None:
        im = ItemMemory.generate(n_features, n_levels, dim, seed)
        return EncoderConfig(mode, im)
    if pool_size is None:
        raise ConfigError("locked encoder needs a pool size")
    pool = BasePool.generate(pool_size, dim, seed)
    if key is None:
        if layers is None:
            raise ConfigError("locked encoder needs a layer count or a key")
        key = generate_key(n_features, layers, pool_size, dim, rng.child("key"))
    fea = derive_locked_feature_hvs(pool, key)
    val = generate_value_hvs(n_levels, dim, rng.child("val"))
    im = ItemMemory(n_features, n_levels, dim, fea, val, seed)
    return EncoderConfig(mode, im, pool, key)


def _check_sample(sample, cfg: EncoderConfig) -> np.ndarray:
    levels = np.asarray(sample, dtype=np.int64)
    if levels.ndim != 1 or len(levels) != cfg.n_features:
        raise DataError(
            f"sample has {levels.shape} levels, expected ({cfg.n_features},)"
        )
    if levels.min(initial=0) < 0 or levels.max(initial=0) >= cfg.n_levels:
        raise DataError(f"level index out of range [0, {cfg.n_levels})")
    return levels


def encode(sample, cfg: EncoderConfig) -> Accumulator:
    """Non-binary encoding: sum over features of val[f_i] * fea[i]."""
    levels = _check_sample(sample, cfg)
    fea = cfg.item_memory.fea_matrix()
    val = cfg.item_memory.val_matrix()
    elements = np.sum(val[levels] * fea, axis=0, dtype=np.int32)
    return Accumulator(cfg.dim, elements, cfg.n_features)


def encode_binary(sample, cfg: EncoderConfig, rng: Rng) -> Hypervector:
    """Binary encoding: sign of the non-binary sum.

    Pass a sample-scoped rng (e.g. rng.child(f"sample/{i}")) when batch
    results must be reproducible regardless of evaluation order.
    """
    return binarize(encode(sample, cfg), rng)


def encode_batch(samples: np.ndarray, cfg: EncoderConfig, threads: int = 1) -> np.ndarray:
    """Encode many samples; returns an (S, D) int32 matrix of accumulators.

    Results are identical for any thread count: each sample's encoding is
    a pure function of its row.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.ndim != 2:
        raise DataError("expected a 2-D array of quantized samples")
    out = np.empty((len(samples), cfg.dim), dtype=np.int32)
    fea = cfg.item_memory.fea_matrix()
    val = cfg.item_memory.val_matrix()
    if samples.size and (
        samples.min() < 0 or samples.max() >= cfg.n_levels
    ):
        raise DataError(f"level index out of range [0, {cfg.n_levels})")
    if len(samples) and samples.shape[1] != cfg.n_features:
        raise DataError(
            f"samples have {samples.shape[1]} features, expected {cfg.n_features}"
        )

    def work(lo: int, hi: int) -> None:
        for s in range(lo, hi):
            np.sum(val[samples[s]] * fea, axis=0, dtype=np.int32, out=out[s])

    if threads <= 1 or len(samples) < 2 * threads:
        work(0, len(samples))
    else:
        bounds = np.linspace(0, len(samples), threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(work, bounds[t], bounds[t + 1]) for t in range(threads)
            ]
            for f in futures:
                f.result()
    return out


def encoding_cost(layers: int) -> float:
    """Modeled relative encoding cost versus the baseline encoder.

    Counts element-wise multiplies only; rotations are shifted memory
    access and additions are shared with the baseline. One layer is free
    (the rotated base is read in place of a feature vector), and every
    further layer adds one multiply per feature per dimension, so the
    curve is 1.0 at L=1 and exactly L from L=2 on.
    """
    if layers < 1:
        raise InvalidDimensionError(f"layer count must be >= 1, got {layers}")
    return 1.0 if layers == 1 else float(layers)
