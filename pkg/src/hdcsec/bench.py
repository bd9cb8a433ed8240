"""Wall-clock encoding cost measurements backing the analytic cost model.

The measured path derives locked feature vectors on the fly, the way a
memory-constrained device would (store P bases plus the key, never the N
products). Pool rows are mirrored to double length so a rotated read is
one contiguous span: a single-layer lock then replaces the baseline's
plain feature read with a shifted read, and every extra layer adds one
gather-and-multiply pass per feature. Kernels are compiled (numba) and
share the same fused multiply-accumulate inner loop, so the comparison
is like-for-like; timing is round-robin best-of so clock drift hits all
configurations equally.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .encoder import encoding_cost
from .errors import ConfigError
from .keylock import generate_key
from .rng import Rng


@njit(cache=True)
def _mac(row, vrow, out):
    # out += row * vrow over 1-D contiguous slices (vectorizes cleanly)
    for j in range(row.shape[0]):
        out[j] += row[j] * vrow[j]


@njit(cache=True)
def _copy_into(row, buf):
    for j in range(row.shape[0]):
        buf[j] = row[j]


@njit(cache=True)
def _mul_into(row, buf):
    for j in range(row.shape[0]):
        buf[j] *= row[j]


@njit(cache=True)
def _encode_baseline(fea, val, levels, out):
    n = fea.shape[0]
    for i in range(n):
        _mac(fea[i], val[levels[i]], out)


@njit(cache=True)
def _encode_locked_l1(pool_ext, sel, rot, val, levels, out):
    # one layer: the feature read becomes a shifted read, nothing else
    n = sel.shape[0]
    d = out.shape[0]
    for i in range(n):
        k = rot[i, 0]
        _mac(pool_ext[sel[i, 0]][k : k + d], val[levels[i]], out)


@njit(cache=True)
def _encode_locked(pool_ext, sel, rot, val, levels, out, layers, buf):
    n = sel.shape[0]
    d = out.shape[0]
    for i in range(n):
        k = rot[i, 0]
        _copy_into(pool_ext[sel[i, 0]][k : k + d], buf)
        for l in range(1, layers):
            k = rot[i, l]
            _mul_into(pool_ext[sel[i, l]][k : k + d], buf)
        _mac(buf, val[levels[i]], out)


@dataclass
class BenchRow:
    layers: int
    modeled: float
    measured_seconds: float
    measured_ratio: float

    def to_dict(self) -> dict:
        return {
            "layers": self.layers,
            "modeled_relative_cost": self.modeled,
            "measured_seconds_per_sample": self.measured_seconds,
            "measured_ratio": self.measured_ratio,
        }


def measure_encoding_ratios(
    n_features: int,
    dim: int,
    layers_list: list[int],
    n_levels: int = 2,
    samples: int = 10,
    repeats: int = 9,
    seed: int = 1,
) -> list[BenchRow]:
    """Measure locked/baseline encoding time ratios for each layer count."""
    if any(l < 1 for l in layers_list):
        raise ConfigError("layer counts must be >= 1")
    rng = Rng(seed, "bench")
    pool = (
        (rng.child("pool").integers(2, n_features * dim) * 2 - 1)
        .astype(np.int8)
        .reshape(n_features, dim)
    )
    pool_ext = np.ascontiguousarray(np.concatenate([pool, pool], axis=1))
    val = (
        (rng.child("val").integers(2, n_levels * dim) * 2 - 1)
        .astype(np.int8)
        .reshape(n_levels, dim)
    )
    level_rows = (
        rng.child("levels")
        .integers(n_levels, samples * n_features)
        .reshape(samples, n_features)
    )
    out = np.zeros(dim, dtype=np.int64)
    buf = np.zeros(dim, dtype=np.int8)

    def run_baseline():
        for s in range(samples):
            out[:] = 0
            _encode_baseline(pool, val, level_rows[s], out)

    def make_locked(layers: int):
        key = generate_key(
            n_features, layers, n_features, dim, rng.child(f"key/{layers}")
        )
        sel = np.ascontiguousarray(key.entries[:, :, 0])
        rot = np.ascontiguousarray(key.entries[:, :, 1])

        def run():
            for s in range(samples):
                out[:] = 0
                if layers == 1:
                    _encode_locked_l1(pool_ext, sel, rot, val, level_rows[s], out)
                else:
                    _encode_locked(
                        pool_ext, sel, rot, val, level_rows[s], out, layers, buf
                    )

        return run

    runs = {0: run_baseline}
    runs.update({l: make_locked(l) for l in sorted(set(layers_list))})
    for run in runs.values():  # JIT warmup
        run()

    best = {tag: float("inf") for tag in runs}
    for _ in range(repeats):
        for tag, run in runs.items():
            t0 = time.perf_counter()
            run()
            best[tag] = min(best[tag], time.perf_counter() - t0)

    t_base = best[0]
    return [
        BenchRow(
            layers=layers,
            modeled=encoding_cost(layers),
            measured_seconds=best[layers] / samples,
            measured_ratio=best[layers] / t_base,
        )
        for layers in layers_list
    ]
