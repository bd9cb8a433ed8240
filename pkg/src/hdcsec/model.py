"""Single-pass HDC training, inference, evaluation, and the model file.

Training sums the encodings of each class (binary mode binarizes both the
per-sample encodings and the class sums). Inference encodes the query the
same way and picks the most similar class vector: cosine for non-binary,
Hamming for binary, ties broken toward the lowest class index.

Model file format (little-endian throughout):
  magic "HDLM" | version u16 | mode u8 (0 non-binary, 1 binary) |
  flags u8 (bit 0: locked) | D, N, M, C, P, L u32 (P = L = 0 unlocked) |
  seed u64 | M value vectors | N feature vectors (unlocked) or P base
  vectors (locked) | C class vectors (i32 elements non-binary,
  bit-packed words binary) | CRC-32C u32.

Hypervectors are stored as little-endian 64-bit words, +1 = bit 1. The
lock key is never written here; it lives in its own file (see keylock).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .encoder import EncoderConfig, derive_locked_feature_hvs, encode, encode_batch
from .errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    FormatError,
    TrainingError,
)
from .fileio import (
    atomic_write_bytes,
    finish_checked,
    hv_record_size,
    pack_hv_bytes,
    read_checked,
    unpack_hv_bytes,
)
from .hv import Accumulator, Hypervector, binarize
from .item_memory import ItemMemory
from .keylock import BasePool, LockKey
from .rng import Rng

MODEL_MAGIC = b"HDLM"
MODEL_VERSION = 1


@dataclass
class TrainedModel:
    mode: str
    encoder: EncoderConfig
    class_vectors: list  # Accumulator (non-binary) or Hypervector (binary)
    seed: int

    @property
    def class_count(self) -> int:
        return len(self.class_vectors)

    @property
    def dim(self) -> int:
        return self.encoder.dim

    def infer_rng(self) -> Rng:
        """Tie-break stream for query encoding, derived from the model seed."""
        return Rng(self.seed, "infer")


def _binarize_rows(accs: np.ndarray, term_count: int, rng: Rng, tag: str) -> np.ndarray:
    """Sign of each row with per-row tie streams keyed by ordinal."""
    out = np.where(accs > 0, 1, -1).astype(np.int8)
    if term_count % 2 == 0:  # odd term counts cannot produce zeros
        for i in range(len(accs)):
            zero = accs[i] == 0
            if zero.any():
                ties = rng.child(f"{tag}/{i}").tie_signs(accs.shape[1])
                out[i, zero] = ties[zero]
    return out


def train(
    samples: np.ndarray,
    labels: np.ndarray,
    cfg: EncoderConfig,
    rng: Rng,
    threads: int = 1,
) -> TrainedModel:
    """Single-pass training over quantized samples.

    Labels must be dense in [0, C). Class sums are order-independent, so
    any parallel split of the batch yields the same model bit-for-bit.
    """
    samples = np.asarray(samples, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(samples) != len(labels):
        raise DataError(f"{len(samples)} samples but {len(labels)} labels")
    if len(samples) == 0:
        raise TrainingError("training set is empty")
    if labels.min() < 0:
        raise DataError("labels must be non-negative")
    n_classes = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=n_classes)
    for j in range(n_classes):
        if counts[j] == 0:
            raise TrainingError(f"class {j} has no training samples")

    accs = encode_batch(samples, cfg, threads=threads)

    if cfg.mode == "binary":
        signs = _binarize_rows(accs, cfg.n_features, rng, "sample")
        class_vectors = []
        for j in range(n_classes):
            class_sum = signs[labels == j].sum(axis=0, dtype=np.int32)
            class_vectors.append(
                binarize(
                    Accumulator(cfg.dim, class_sum, int(counts[j])),
                    rng.child(f"class/{j}"),
                )
            )
    else:
        class_vectors = []
        for j in range(n_classes):
            class_sum = accs[labels == j].sum(axis=0, dtype=np.int64)
            if np.abs(class_sum).max(initial=0) >= 2**31:
                raise TrainingError("class accumulator overflows 32-bit storage")
            class_vectors.append(
                Accumulator(
                    cfg.dim,
                    class_sum.astype(np.int32),
                    int(counts[j]) * cfg.n_features,
                )
            )
    return TrainedModel(cfg.mode, cfg, class_vectors, cfg.item_memory.seed)


def _class_matrix(model: TrainedModel) -> np.ndarray:
    if model.mode == "binary":
        return np.stack([hv.bipolar() for hv in model.class_vectors]).astype(np.int64)
    return np.stack([acc.elements for acc in model.class_vectors]).astype(np.int64)


def _predict_rows(
    samples: np.ndarray, model: TrainedModel, rng: Rng, threads: int = 1
) -> np.ndarray:
    accs = encode_batch(samples, model.encoder, threads=threads)
    cmat = _class_matrix(model)
    if model.mode == "binary":
        q = _binarize_rows(accs, model.encoder.n_features, rng, "query").astype(np.int64)
        dots = q @ cmat.T
        # max dot == min Hamming; argmax takes the first (lowest class index)
        return np.argmax(dots, axis=1)
    q = accs.astype(np.int64)
    qnorm = np.sqrt((q * q).sum(axis=1).astype(np.float64))
    cnorm = np.sqrt((cmat * cmat).sum(axis=1).astype(np.float64))
    if (qnorm == 0).any() or (cnorm == 0).any():
        raise DegenerateVectorError("zero-norm vector in cosine inference")
    scores = (q @ cmat.T) / (qnorm[:, None] * cnorm[None, :])
    return np.argmax(scores, axis=1)


def infer(sample, model: TrainedModel, rng: Rng) -> int:
    """Label of the class vector most similar to the query's encoding."""
    levels = np.asarray(sample, dtype=np.int64).reshape(1, -1)
    return int(_predict_rows(levels, model, rng)[0])


def predict(
    samples: np.ndarray, model: TrainedModel, rng: Rng | None = None, threads: int = 1
) -> np.ndarray:
    """Vectorized inference over a batch of quantized samples."""
    if rng is None:
        rng = model.infer_rng()
    return _predict_rows(np.asarray(samples, dtype=np.int64), model, rng, threads)


def evaluate(
    samples: np.ndarray,
    labels: np.ndarray,
    model: TrainedModel,
    rng: Rng | None = None,
    threads: int = 1,
) -> float:
    """Fraction of correctly classified samples."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise DataError("evaluation set is empty")
    preds = predict(samples, model, rng, threads)
    return float(np.mean(preds == labels))


def save_model(model: TrainedModel, path: str) -> None:
    cfg = model.encoder
    locked = cfg.locked
    mode_byte = 1 if model.mode == "binary" else 0
    flags = 1 if locked else 0
    p = cfg.pool.p if locked else 0
    layers = cfg.key.layers if locked else 0
    body = struct.pack(
        "<HBBIIIIIIQ",
        MODEL_VERSION,
        mode_byte,
        flags,
        cfg.dim,
        cfg.n_features,
        cfg.n_levels,
        model.class_count,
        p,
        layers,
        model.seed,
    )
    chunks = [body]
    for hv in cfg.item_memory.val:
        chunks.append(pack_hv_bytes(hv))
    feature_region = cfg.pool.bases if locked else cfg.item_memory.fea
    for hv in feature_region:
        chunks.append(pack_hv_bytes(hv))
    for cv in model.class_vectors:
        if model.mode == "binary":
            chunks.append(pack_hv_bytes(cv))
        else:
            chunks.append(cv.elements.astype("<i4").tobytes())
    atomic_write_bytes(path, finish_checked(MODEL_MAGIC, b"".join(chunks)))


@dataclass
class ModelFile:
    """Parsed model file; exactly what an attacker reading the device sees."""

    mode: str
    locked: bool
    dim: int
    n_features: int
    n_levels: int
    class_count: int
    pool_size: int
    layers: int
    seed: int
    val: list[Hypervector]
    features: list[Hypervector]  # item-memory rows, or pool bases when locked
    class_vectors: list


def load_model(path: str) -> ModelFile:
    body = read_checked(path, MODEL_MAGIC)
    header_size = struct.calcsize("<HBBIIIIIIQ")
    if len(body) < header_size:
        raise FormatError(f"{path}: truncated model header")
    (version, mode_byte, flags, dim, n, m, c, p, layers, seed) = struct.unpack_from(
        "<HBBIIIIIIQ", body, 0
    )
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    if mode_byte not in (0, 1):
        raise FormatError(f"{path}: bad mode byte {mode_byte}")
    mode = "binary" if mode_byte else "non-binary"
    locked = bool(flags & 1)
    rec = hv_record_size(dim)
    n_feature_recs = p if locked else n
    class_rec = rec if mode == "binary" else dim * 4
    expected = header_size + (m + n_feature_recs) * rec + c * class_rec
    if len(body) != expected:
        raise FormatError(
            f"{path}: payload is {len(body)} bytes, expected {expected}"
        )
    off = header_size
    val = []
    for _ in range(m):
        val.append(unpack_hv_bytes(bytes(body[off : off + rec]), dim))
        off += rec
    features = []
    for _ in range(n_feature_recs):
        features.append(unpack_hv_bytes(bytes(body[off : off + rec]), dim))
        off += rec
    class_vectors = []
    for _ in range(c):
        if mode == "binary":
            class_vectors.append(unpack_hv_bytes(bytes(body[off : off + rec]), dim))
            off += rec
        else:
            elems = np.frombuffer(body, dtype="<i4", count=dim, offset=off).astype(
                np.int32
            )
            term = int(np.abs(elems).max(initial=0))
            class_vectors.append(Accumulator(dim, elems, term))
            off += dim * 4
    return ModelFile(
        mode, locked, dim, n, m, c, p, layers, seed, val, features, class_vectors
    )


def model_from_file(mf: ModelFile, key: LockKey | None = None) -> TrainedModel:
    """Rebuild a runnable model; locked files additionally need their key."""
    if mf.locked:
        if key is None:
            raise ConfigError("locked model file requires its lock key")
        if key.n_features != mf.n_features or key.layers != mf.layers:
            raise ConfigError(
                f"key shape ({key.n_features}, {key.layers}) does not match "
                f"model header ({mf.n_features}, {mf.layers})"
            )
        pool = BasePool(mf.pool_size, mf.dim, mf.features, mf.seed)
        fea = derive_locked_feature_hvs(pool, key)
        im = ItemMemory(mf.n_features, mf.n_levels, mf.dim, fea, mf.val, mf.seed)
        cfg = EncoderConfig(mf.mode, im, pool, key)
    else:
        im = ItemMemory(mf.n_features, mf.n_levels, mf.dim, mf.features, mf.val, mf.seed)
        cfg = EncoderConfig(mf.mode, im)
    return TrainedModel(mf.mode, cfg, mf.class_vectors, mf.seed)
