"""IDX dataset ingestion plus a synthetic stand-in digit generator."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MnistDataset",
    "IdxFormatError",
    "BadMagicError",
    "TruncatedFileError",
    "CountMismatchError",
    "load_mnist_idx",
    "write_idx_images",
    "write_idx_labels",
    "synthetic_digits",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX file."""


class BadMagicError(IdxFormatError):
    pass


class TruncatedFileError(IdxFormatError):
    pass


class CountMismatchError(IdxFormatError):
    pass


@dataclass
class MnistDataset:
    """Image stack (n, 28, 28) with matching byte labels (0-9)."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise CountMismatchError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return self.images.shape[0]


def _read_u32(data: bytes, offset: int, path) -> int:
    if offset + 4 > len(data):
        raise TruncatedFileError(
            f"{path}: truncated header, expected 4 bytes at offset {offset}"
        )
    return struct.unpack_from(">I", data, offset)[0]


def _load_idx_images(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic = _read_u32(data, 0, path)
    if magic != IMAGE_MAGIC:
        raise BadMagicError(
            f"{path}: bad magic 0x{magic:08x} at offset 0, "
            f"expected 0x{IMAGE_MAGIC:08x}"
        )
    count = _read_u32(data, 4, path)
    rows = _read_u32(data, 8, path)
    cols = _read_u32(data, 12, path)
    if (rows, cols) != (28, 28):
        raise IdxFormatError(f"{path}: expected 28x28 images, got {rows}x{cols}")
    need = count * rows * cols
    if len(data) - 16 != need:
        raise TruncatedFileError(
            f"{path}: expected {need} pixel bytes at offset 16, "
            f"found {len(data) - 16}"
        )
    return np.frombuffer(data, dtype=np.uint8, offset=16).reshape(count, 28, 28)


def _load_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic = _read_u32(data, 0, path)
    if magic != LABEL_MAGIC:
        raise BadMagicError(
            f"{path}: bad magic 0x{magic:08x} at offset 0, "
            f"expected 0x{LABEL_MAGIC:08x}"
        )
    count = _read_u32(data, 4, path)
    if len(data) - 8 != count:
        raise TruncatedFileError(
            f"{path}: expected {count} label bytes at offset 8, "
            f"found {len(data) - 8}"
        )
    labels = np.frombuffer(data, dtype=np.uint8, offset=8)
    if labels.size and labels.max() > 9:
        raise IdxFormatError(f"{path}: label values above 9 present")
    return labels


def load_mnist_idx(images_path, labels_path) -> MnistDataset:
    """Parse big-endian IDX image/label files into a dataset.

    Validates the magic numbers (0x00000803 / 0x00000801), the 28x28
    image geometry, payload sizes, and that both files agree on the
    sample count.
    """
    images = _load_idx_images(images_path)
    labels = _load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} "
            f"holds {labels.shape[0]} labels"
        )
    return MnistDataset(images=images, labels=labels)


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, images.shape[0], 28, 28))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


# seven-segment layout per digit: (top, top-right, bottom-right, bottom,
# bottom-left, top-left, middle)
_SEGMENTS = {
    0: (1, 1, 1, 1, 1, 1, 0),
    1: (0, 1, 1, 0, 0, 0, 0),
    2: (1, 1, 0, 1, 1, 0, 1),
    3: (1, 1, 1, 1, 0, 0, 1),
    4: (0, 1, 1, 0, 0, 1, 1),
    5: (1, 0, 1, 1, 0, 1, 1),
    6: (1, 0, 1, 1, 1, 1, 1),
    7: (1, 1, 1, 0, 0, 0, 0),
    8: (1, 1, 1, 1, 1, 1, 1),
    9: (1, 1, 1, 1, 0, 1, 1),
}


def _render_digit(digit: int) -> np.ndarray:
    img = np.zeros((28, 28), dtype=np.uint8)
    x0, x1 = 8, 19
    y0, ym, y1 = 4, 13, 22
    w = 3
    seg = _SEGMENTS[digit]
    if seg[0]:
        img[y0:y0 + w, x0:x1 + 1] = 255
    if seg[1]:
        img[y0:ym + 1, x1 - w + 1:x1 + 1] = 255
    if seg[2]:
        img[ym:y1 + 1, x1 - w + 1:x1 + 1] = 255
    if seg[3]:
        img[y1 - w + 1:y1 + 1, x0:x1 + 1] = 255
    if seg[4]:
        img[ym:y1 + 1, x0:x0 + w] = 255
    if seg[5]:
        img[y0:ym + 1, x0:x0 + w] = 255
    if seg[6]:
        img[ym - 1:ym + 2, x0:x1 + 1] = 255
    return img


def synthetic_digits(count: int, seed: int,
                     flip_fraction: float = 0.06,
                     max_shift: int = 3) -> MnistDataset:
    """Deterministic stand-in for the handwriting dataset.

    Renders seven-segment glyphs for the ten classes, then perturbs each
    sample with a random translation of up to ``max_shift`` pixels and
    salt-and-pepper flips of ``flip_fraction`` of the pixels.  Useful
    for offline benchmarking of the digit pipeline; real IDX files plug
    into the same interface.
    """
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    templates = np.stack([_render_digit(d) for d in range(10)])
    labels = rng.integers(0, 10, size=count).astype(np.uint8)
    images = np.zeros((count, 28, 28), dtype=np.uint8)
    for i, label in enumerate(labels):
        img = templates[label]
        dy, dx = rng.integers(-max_shift, max_shift + 1, size=2)
        img = np.roll(np.roll(img, dy, axis=0), dx, axis=1)
        flips = rng.random((28, 28)) < flip_fraction
        images[i] = np.where(flips, 255 - img, img)
    return MnistDataset(images=images, labels=labels)
