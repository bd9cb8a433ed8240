"""Dataset generation and loading: synthetic grids, CSV, IDX.

The synthetic generator draws one prototype per class on an integer
value grid and corrupts a fraction of features per sample; it keeps the
prototypes so attack and accuracy checks can score against ground truth.
CSV is the generic path for external benchmarks; IDX covers the standard
handwritten-digit image files (gzip accepted).
"""

from __future__ import annotations

import csv
import gzip
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .fileio import atomic_write_bytes, atomic_write_json
from .rng import Rng

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    name: str
    samples: np.ndarray  # (S, N) float64
    labels: np.ndarray  # (S,) int64
    v_min: float
    v_max: float
    prototypes: np.ndarray | None = None  # (C, N) ground-truth grid values
    seed: int | None = None
    label_mapping: dict = field(default_factory=dict)  # original label -> dense index

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.samples.ndim != 2:
            raise DataError("samples must be a 2-D array")
        if len(self.samples) != len(self.labels):
            raise DataError(
                f"{len(self.samples)} samples but {len(self.labels)} labels"
            )
        if self.v_max <= self.v_min:
            raise DataError(f"invalid value range [{self.v_min}, {self.v_max}]")

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


def generate_synthetic(
    n_features: int,
    n_classes: int,
    samples_per_class: int,
    noise: float,
    rng: Rng,
    levels: int = 8,
    name: str = "synthetic",
) -> Dataset:
    """Class-prototype dataset on a `levels`-valued grid.

    Each sample copies its class prototype and redraws each feature with
    probability `noise` (uniformly over the grid). Prototypes disagree on
    a 1 - 1/levels fraction of features in expectation, which keeps both
    classification and mapping-recovery experiments well separated.
    """
    if not 0 <= noise < 0.5:
        raise DataError(f"noise must be in [0, 0.5), got {noise}")
    if n_features < 1 or n_classes < 1 or samples_per_class < 1 or levels < 2:
        raise DataError("synthetic dataset parameters must be positive (levels >= 2)")
    proto_rng = rng.child("prototypes")
    prototypes = np.stack(
        [proto_rng.integers(levels, n_features) for _ in range(n_classes)]
    )
    samples = np.empty((n_classes * samples_per_class, n_features), dtype=np.float64)
    labels = np.empty(n_classes * samples_per_class, dtype=np.int64)
    noise_rng = rng.child("noise")
    row = 0
    for c in range(n_classes):
        for _ in range(samples_per_class):
            values = prototypes[c].copy()
            mask = noise_rng.uniform(n_features) < noise
            if mask.any():
                redraw = noise_rng.integers(levels, int(mask.sum()))
                values[mask] = redraw
            samples[row] = values
            labels[row] = c
            row += 1
    return Dataset(
        name,
        samples,
        labels,
        v_min=0.0,
        v_max=float(levels - 1),
        prototypes=prototypes,
        seed=rng.seed,
    )


def save_dataset(ds: Dataset, csv_path: str, sidecar_path: str | None = None) -> None:
    """Write samples+labels as CSV plus a JSON sidecar with the ground truth."""
    lines = []
    for row, label in zip(ds.samples, ds.labels):
        cells = [_format_number(v) for v in row]
        cells.append(str(int(label)))
        lines.append(",".join(cells))
    atomic_write_bytes(csv_path, ("\n".join(lines) + "\n").encode("ascii"))
    if sidecar_path is not None:
        sidecar = {
            "name": ds.name,
            "v_min": ds.v_min,
            "v_max": ds.v_max,
            "seed": ds.seed,
            "prototypes": None
            if ds.prototypes is None
            else ds.prototypes.astype(int).tolist(),
        }
        atomic_write_json(sidecar_path, sidecar)


def _format_number(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def load_csv(
    path: str,
    label_column: int = -1,
    has_header: bool = False,
    name: str | None = None,
) -> Dataset:
    """Load a rectangular numeric CSV; one column holds the class label.

    Labels are re-indexed densely in sorted order and the mapping is kept
    on the dataset. The value range is computed over every feature cell
    in the file, so quantization is shuffle-invariant.
    """
    rows = []
    raw_labels = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if has_header and lineno == 1:
                continue
            if width is None:
                width = len(cells)
                if width < 2:
                    raise DataError(f"{path}:{lineno}: need at least 2 columns")
                label_idx = label_column if label_column >= 0 else width + label_column
                if not 0 <= label_idx < width:
                    raise DataError(
                        f"{path}: label column {label_column} out of range "
                        f"for {width} columns"
                    )
            elif len(cells) != width:
                raise DataError(
                    f"{path}:{lineno}: ragged row ({len(cells)} cells, expected {width})"
                )
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
            raw_labels.append(values.pop(label_idx))
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    samples = np.asarray(rows, dtype=np.float64)
    raw = np.asarray(raw_labels)
    if not np.all(raw == np.round(raw)):
        raise DataError(f"{path}: labels must be integers")
    uniques = np.unique(raw.astype(np.int64))
    mapping = {int(orig): dense for dense, orig in enumerate(uniques)}
    labels = np.asarray([mapping[int(v)] for v in raw], dtype=np.int64)
    v_min = float(samples.min())
    v_max = float(samples.max())
    if v_max <= v_min:
        raise DataError(f"{path}: degenerate value range [{v_min}, {v_max}]")
    return Dataset(
        name or path,
        samples,
        labels,
        v_min=v_min,
        v_max=v_max,
        label_mapping=mapping,
    )


def _open_maybe_gzip(path: str):
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(images_path: str, labels_path: str, name: str = "idx") -> Dataset:
    """Load the big-endian IDX image/label pair used by digit benchmarks."""
    with _open_maybe_gzip(images_path) as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise DataError(f"{images_path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise DataError(
                f"{images_path}: bad IDX magic {magic:#010x}, "
                f"expected {IDX_IMAGES_MAGIC:#010x}"
            )
        payload = fh.read(count * rows * cols)
        if len(payload) != count * rows * cols:
            raise DataError(f"{images_path}: truncated IDX payload")
    images = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)

    with _open_maybe_gzip(labels_path) as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise DataError(f"{labels_path}: truncated IDX header")
        magic, label_count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise DataError(
                f"{labels_path}: bad IDX magic {magic:#010x}, "
                f"expected {IDX_LABELS_MAGIC:#010x}"
            )
        label_payload = fh.read(label_count)
        if len(label_payload) != label_count:
            raise DataError(f"{labels_path}: truncated IDX payload")
    if label_count != count:
        raise DataError(
            f"IDX pair mismatch: {count} images but {label_count} labels"
        )
    labels = np.frombuffer(label_payload, dtype=np.uint8).astype(np.int64)
    return Dataset(
        name,
        images.astype(np.float64),
        labels,
        v_min=0.0,
        v_max=255.0,
    )


def load_sidecar(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
