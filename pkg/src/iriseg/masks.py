"""Label masks, probability maps, file I/O, and confusion-matrix accumulation."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError

# Grayscale value at or above which a pixel counts as foreground.
FOREGROUND_THRESHOLD = 128


@dataclasses.dataclass(frozen=True)
class ClassSpec:
    """Number of segmentation classes and their display names."""

    num_classes: int = 2
    names: tuple[str, ...] = ("background", "iris")

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        if len(self.names) != self.num_classes:
            raise ValueError("names must have one entry per class")


#: Default binary background/iris labeling.
BINARY = ClassSpec()


@dataclasses.dataclass(frozen=True)
class LabelMask:
    """Per-pixel integer class labels on an H x W grid."""

    labels: np.ndarray
    num_classes: int = 2

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.shape[0] < 1 or labels.shape[1] < 1:
            raise ValueError(f"labels must be a non-empty 2-D grid, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclasses.dataclass(frozen=True)
class ProbMap:
    """Per-pixel class probabilities, shape (H, W, N); each pixel sums to 1."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 3 or probs.shape[2] < 2:
            raise ValueError(f"probs must have shape (H, W, N>=2), got {probs.shape}")
        if probs.min() < 0.0 or probs.max() > 1.0 + 1e-9:
            raise ValueError("probabilities must lie in [0, 1]")
        sums = probs.sum(axis=2)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise ValueError("per-pixel probabilities must sum to 1 within 1e-6")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def height(self) -> int:
        return self.probs.shape[0]

    @property
    def width(self) -> int:
        return self.probs.shape[1]

    @property
    def num_classes(self) -> int:
        return self.probs.shape[2]


def as_labels(mask) -> np.ndarray:
    """Accept a LabelMask or a raw integer grid and return the label array."""
    if isinstance(mask, LabelMask):
        return mask.labels
    labels = np.asarray(mask)
    if labels.ndim != 2:
        raise ValueError(f"expected a 2-D label grid, got shape {labels.shape}")
    return labels


def as_probs(probs) -> np.ndarray:
    """Accept a ProbMap or a raw (H, W, N) grid and return the array.

    Raw grids skip the sum-to-1 check so probe code may perturb single entries.
    """
    if isinstance(probs, ProbMap):
        return probs.probs
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"expected an (H, W, N) probability grid, got shape {arr.shape}")
    return arr


def one_hot(mask, spec: ClassSpec = BINARY) -> ProbMap:
    """Encode a label mask as an exact one-hot probability map."""
    labels = as_labels(mask)
    if labels.max() >= spec.num_classes:
        raise ValueError("mask labels exceed the class count")
    planes = np.zeros(labels.shape + (spec.num_classes,), dtype=np.float64)
    rows, cols = np.indices(labels.shape)
    planes[rows, cols, labels] = 1.0
    return ProbMap(planes)


def argmax_decode(probs) -> LabelMask:
    """Per-pixel class of maximal probability; ties go to the lowest class index."""
    arr = as_probs(probs)
    labels = np.argmax(arr, axis=2).astype(np.int64)
    return LabelMask(labels, num_classes=arr.shape[2])


class ConfusionMatrix:
    """N x N pixel tallies; counts[g, p] = pixels with ground truth g predicted p.

    Accumulation is meant to be thread-confined: use one matrix per worker and
    combine the results with :meth:`merge`, which is associative and commutative.
    """

    def __init__(self, num_classes: int = 2, counts: np.ndarray | None = None):
        if num_classes < 2:
            raise ValueError("need at least 2 classes")
        self.num_classes = num_classes
        if counts is None:
            counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64).copy()
            if counts.shape != (num_classes, num_classes):
                raise ValueError("counts shape must be (N, N)")
            if counts.min() < 0:
                raise ValueError("counts must be non-negative")
        self.counts = counts

    def accumulate(self, truth, pred) -> "ConfusionMatrix":
        """Tally one truth/prediction pair; returns self for chaining."""
        t = as_labels(truth)
        p = as_labels(pred)
        if t.shape != p.shape:
            raise DataError(f"dimension mismatch: truth {t.shape} vs pred {p.shape}")
        n = self.num_classes
        if t.max() >= n or p.max() >= n or t.min() < 0 or p.min() < 0:
            raise ValueError(f"labels must lie in [0, {n})")
        flat = t.reshape(-1).astype(np.int64) * n + p.reshape(-1)
        self.counts += np.bincount(flat, minlength=n * n).reshape(n, n)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Elementwise sum of two tallies; does not mutate either operand."""
        if other.num_classes != self.num_classes:
            raise ValueError("cannot merge matrices with different class counts")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.num_classes == other.num_classes
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self):
        return f"ConfusionMatrix({self.num_classes}, {self.counts.tolist()})"


def accumulate_confusion(cm: ConfusionMatrix, truth, pred) -> ConfusionMatrix:
    """Functional alias for :meth:`ConfusionMatrix.accumulate`."""
    return cm.accumulate(truth, pred)


def load_mask(
    path,
    spec: ClassSpec = BINARY,
    strict: bool = True,
    threshold: int = FOREGROUND_THRESHOLD,
) -> LabelMask:
    """Load a binary mask from an 8-bit grayscale PNG or PGM file.

    Value 0 maps to background; values >= ``threshold`` map to foreground.
    In strict mode (the default) any other value is rejected, so corrupted or
    non-binary masks fail loudly instead of being silently coerced.  Masks
    stored with foreground = 1 can be read with ``threshold=1``.
    """
    if spec.num_classes != 2:
        raise ValueError("mask files are binary; only 2-class specs are supported")
    path = Path(path)
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"unreadable mask file {path}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DataError(f"mask file {path} has zero-sized dimensions")
    if strict:
        bad = (arr > 0) & (arr < threshold)
        if bad.any():
            value = int(arr[bad][0])
            raise DataError(f"unmappable pixel value {value} in {path}")
    return LabelMask((arr >= threshold).astype(np.int64), num_classes=2)


def save_mask(mask, path) -> None:
    """Write a binary mask as 0/255 grayscale; format chosen by file suffix."""
    labels = as_labels(mask)
    arr = np.where(labels > 0, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path))


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale image as floats in [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"unreadable image file {path}: {exc}") from exc
    return arr.astype(np.float64) / 255.0


def save_image(image: np.ndarray, path) -> None:
    """Write a [0, 1] float grid as an 8-bit grayscale image."""
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.round(arr * 255.0).astype(np.uint8), mode="L").save(Path(path))


def paired_stems(pred_dir, truth_dir) -> tuple[list[tuple[str, Path, Path]], list[str]]:
    """Pair prediction and ground-truth files by identical file stem.

    Returns (pairs sorted by stem, sorted stems present on only one side).
    """
    pred_dir, truth_dir = Path(pred_dir), Path(truth_dir)
    exts = {".png", ".pgm"}
    pred = {p.stem: p for p in sorted(pred_dir.iterdir()) if p.suffix.lower() in exts}
    truth = {p.stem: p for p in sorted(truth_dir.iterdir()) if p.suffix.lower() in exts}
    pairs = [(s, pred[s], truth[s]) for s in sorted(pred.keys() & truth.keys())]
    unpaired = sorted((pred.keys() | truth.keys()) - (pred.keys() & truth.keys()))
    return pairs, unpaired
