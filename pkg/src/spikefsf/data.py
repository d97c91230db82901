"""Dataset ingestion and the random-fold evaluation protocol."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Dataset",
    "DataError",
    "load_csv",
    "load_idx",
    "write_idx_images",
    "write_idx_labels",
    "normalize_minmax",
    "take",
    "random_folds",
]

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with dense integer labels.

    features: (N, m); labels: (N,) with values in [0, n). Feature values are
    expected in [0, 1] once normalised (the encoder enforces this at use).
    """

    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    n: int
    feature_names: list[str] | None = None

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]


def load_csv(path, label_column: str) -> Dataset:
    """Parse a header-first CSV into a dataset.

    Label strings map to dense class indices in order of first appearance;
    every other column must be numeric. Errors carry the 1-based line number.
    """
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: unknown label column {label_column!r} (header: {header})")
        label_idx = header.index(label_column)
        feature_names = [h for k, h in enumerate(header) if k != label_idx]

        rows: list[list[float]] = []
        label_strings: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            feats = []
            for k, cell in enumerate(row):
                if k == label_idx:
                    continue
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: line {lineno}: non-numeric value {cell!r} in column {header[k]!r}"
                    ) from None
            rows.append(feats)
            label_strings.append(row[label_idx].strip())

    if not rows:
        raise DataError(f"{path}: no data rows")
    class_order: dict[str, int] = {}
    for s in label_strings:
        if s not in class_order:
            class_order[s] = len(class_order)
    labels = np.array([class_order[s] for s in label_strings], dtype=int)
    return Dataset(
        features=np.array(rows, dtype=float),
        labels=labels,
        n=len(class_order),
        feature_names=feature_names,
    )


def _read_be32(f, path) -> int:
    data = f.read(4)
    if len(data) != 4:
        raise DataError(f"{path}: truncated header")
    return struct.unpack(">i", data)[0]


def load_idx(images_path, labels_path) -> Dataset:
    """Load an image/label pair of big-endian IDX files.

    Pixels are scaled into [0, 1]; each image is flattened row-major so
    m = rows * cols. Image and label counts must match.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    with open(images_path, "rb") as f:
        magic = _read_be32(f, images_path)
        if magic != IDX_IMAGE_MAGIC:
            raise DataError(f"{images_path}: bad magic {magic}, expected {IDX_IMAGE_MAGIC}")
        count = _read_be32(f, images_path)
        rows = _read_be32(f, images_path)
        cols = _read_be32(f, images_path)
        payload = f.read()
        if len(payload) != count * rows * cols:
            raise DataError(
                f"{images_path}: payload holds {len(payload)} bytes, expected {count * rows * cols}"
            )
        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)
    with open(labels_path, "rb") as f:
        magic = _read_be32(f, labels_path)
        if magic != IDX_LABEL_MAGIC:
            raise DataError(f"{labels_path}: bad magic {magic}, expected {IDX_LABEL_MAGIC}")
        label_count = _read_be32(f, labels_path)
        payload = f.read()
        if len(payload) != label_count:
            raise DataError(f"{labels_path}: payload holds {len(payload)} bytes, expected {label_count}")
        labels = np.frombuffer(payload, dtype=np.uint8).astype(int)
    if label_count != count:
        raise DataError(f"label count {label_count} does not match image count {count}")
    return Dataset(
        features=pixels.astype(float) / 255.0,
        labels=labels,
        n=int(labels.max()) + 1 if len(labels) else 0,
    )


def write_idx_images(path, images: np.ndarray, rows: int, cols: int) -> None:
    """Write uint8 images (N, rows*cols) in IDX format (round-trip exact)."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, images.shape[0], rows, cols))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", IDX_LABEL_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def normalize_minmax(raw: np.ndarray) -> np.ndarray:
    """Per-column min-max scaling into [0, 1]; constant columns map to 0."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape[0] < 1:
        raise DataError("need at least one row to normalize")
    lo = raw.min(axis=0)
    span = raw.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = (raw - lo) / safe
    out[:, span == 0] = 0.0
    return out


def take(dataset: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(
        features=dataset.features[idx],
        labels=dataset.labels[idx],
        n=dataset.n,
        feature_names=dataset.feature_names,
    )


def random_folds(
    dataset: Dataset,
    k: int,
    train_count: int,
    seed: int,
    test_count: int | None = None,
    stratified: bool = False,
) -> list[tuple[Dataset, Dataset]]:
    """k independent random train/test partitions with fixed counts.

    test_count defaults to everything not drawn for training. The stratified
    variant keeps per-class proportions in the training draw, for datasets
    whose smallest class would otherwise risk dropping out of a split.
    """
    N = len(dataset)
    if k < 1:
        raise ValueError(f"need at least one fold, got k={k}")
    if not 1 <= train_count < N:
        raise ValueError(f"train count {train_count} not in [1, {N})")
    if test_count is None:
        test_count = N - train_count
    if train_count + test_count > N:
        raise ValueError(f"train+test = {train_count + test_count} exceeds {N} samples")
    rng = np.random.default_rng(seed)
    folds = []
    for _ in range(k):
        if stratified:
            train_idx, rest = _stratified_draw(dataset.labels, train_count, rng)
            test_idx = rest[:test_count]
        else:
            perm = rng.permutation(N)
            train_idx = perm[:train_count]
            test_idx = perm[train_count : train_count + test_count]
        folds.append((take(dataset, train_idx), take(dataset, test_idx)))
    return folds


def _stratified_draw(labels: np.ndarray, train_count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    N = len(labels)
    classes = np.unique(labels)
    picked: list[np.ndarray] = []
    for c in classes:
        members = rng.permutation(np.flatnonzero(labels == c))
        share = int(round(train_count * len(members) / N))
        share = max(1, min(share, len(members)))
        picked.append(members[:share])
    train_idx = np.concatenate(picked)
    # trim or top up to the exact requested count
    train_idx = rng.permutation(train_idx)[:train_count]
    mask = np.ones(N, dtype=bool)
    mask[train_idx] = False
    rest = rng.permutation(np.flatnonzero(mask))
    return train_idx, rest
