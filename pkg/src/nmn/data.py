"""Dataset ingestion and artifact output formats.

Covers the IDX binary container (MNIST's format) with a matching fixture
writer, the four-point XOR dataset, byte-level corpus tokenization with
deterministic batch sampling, and the 2-D decision-boundary grid emitter.

CSV output uses ``repr`` for floats so every emitted file parses back into
bit-identical arrays.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelConfig, yat_batch
from .linalg import ShapeError

__all__ = [
    "Dataset",
    "CharCorpus",
    "load_mnist_idx",
    "write_idx_images",
    "write_idx_labels",
    "xor_dataset",
    "char_tokenize",
    "lm_batches",
    "emit_boundary_grid",
    "write_csv",
    "read_csv",
]

_IDX_IMAGES_MAGIC = 0x00000803
_IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    """Row-per-sample inputs with integer class labels."""

    inputs: np.ndarray
    labels: np.ndarray
    split: str = "train"

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise ShapeError(f"Dataset: inputs must be 2-D, got {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ShapeError(
                f"Dataset: {self.inputs.shape[0]} inputs but labels shape {self.labels.shape}"
            )

    def __len__(self):
        return self.inputs.shape[0]


def _open_maybe_gzip(path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise ValueError(f"truncated IDX file: expected {n} bytes for {what}, got {len(buf)}")
    return buf


def load_mnist_idx(images_path, labels_path) -> Dataset:
    """Parse an IDX image/label file pair into flattened [0, 1] pixel rows.

    Headers are big-endian: magic 0x00000803 for images (then count, rows,
    cols) and 0x00000801 for labels (then count); payloads are unsigned
    bytes. Gzipped files are detected and decompressed transparently.
    """
    with _open_maybe_gzip(images_path) as f:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, "image header"))
        if magic != _IDX_IMAGES_MAGIC:
            raise ValueError(
                f"bad IDX image magic 0x{magic:08x} (expected 0x{_IDX_IMAGES_MAGIC:08x})"
            )
        raw = _read_exact(f, count * rows * cols, "image payload")
    images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)
    with _open_maybe_gzip(labels_path) as f:
        magic, n_labels = struct.unpack(">II", _read_exact(f, 8, "label header"))
        if magic != _IDX_LABELS_MAGIC:
            raise ValueError(
                f"bad IDX label magic 0x{magic:08x} (expected 0x{_IDX_LABELS_MAGIC:08x})"
            )
        raw = _read_exact(f, n_labels, "label payload")
    labels = np.frombuffer(raw, dtype=np.uint8)
    if n_labels != count:
        raise ValueError(f"IDX count mismatch: {count} images but {n_labels} labels")
    return Dataset(inputs=images.astype(np.float64) / 255.0, labels=labels.astype(np.int64))


def write_idx_images(path, images: np.ndarray):
    """Write a uint8 array of shape (N, rows, cols) as an IDX image file."""
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ShapeError(f"write_idx_images: expected (N, rows, cols), got {images.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", _IDX_IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    """Write a uint8 label vector as an IDX label file."""
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ShapeError(f"write_idx_labels: expected 1-D labels, got {labels.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">II", _IDX_LABELS_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def xor_dataset() -> Dataset:
    """The four XOR points: (0,0)->0, (0,1)->1, (1,0)->1, (1,1)->0."""
    inputs = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0])
    return Dataset(inputs=inputs, labels=labels)


@dataclass
class CharCorpus:
    """Byte-level token stream with a train/validation split point."""

    vocab: dict = field(repr=False)
    inv_vocab: bytes = field(repr=False)
    ids: np.ndarray = field(repr=False)
    split_index: int = 0

    @property
    def vocab_size(self) -> int:
        return len(self.inv_vocab)

    @property
    def train_ids(self) -> np.ndarray:
        return self.ids[: self.split_index]

    @property
    def val_ids(self) -> np.ndarray:
        return self.ids[self.split_index:]

    def encode(self, text) -> np.ndarray:
        data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
        try:
            return np.array([self.vocab[b] for b in data], dtype=np.int64)
        except KeyError as e:
            raise ValueError(f"byte {e.args[0]!r} not in corpus vocabulary") from None

    def decode(self, ids) -> bytes:
        return bytes(self.inv_vocab[i] for i in np.asarray(ids))


def char_tokenize(text, val_fraction: float = 0.1) -> CharCorpus:
    """Build a byte vocabulary from ``text`` and tokenize it.

    The vocabulary is the sorted set of distinct bytes; decode(encode(s))
    round-trips any in-vocabulary text. The trailing ``val_fraction`` of
    the stream becomes the validation split.
    """
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    if not data:
        raise ValueError("char_tokenize: empty corpus")
    distinct = sorted(set(data))
    vocab = {b: i for i, b in enumerate(distinct)}
    ids = np.frombuffer(data, dtype=np.uint8)
    lut = np.zeros(256, dtype=np.int64)
    for b, i in vocab.items():
        lut[b] = i
    ids = lut[ids]
    split = int(len(ids) * (1.0 - val_fraction))
    return CharCorpus(vocab=vocab, inv_vocab=bytes(distinct), ids=ids, split_index=split)


def lm_batches(ids: np.ndarray, seq_len: int, batch_size: int,
               rng: np.random.Generator, n_batches: int | None = None):
    """Stream of ``(inputs, targets)`` id blocks; targets are inputs shifted by one.

    Offsets are sampled uniformly, so the stream is deterministic given the
    generator state. Runs forever unless ``n_batches`` is given.
    """
    ids = np.asarray(ids)
    if ids.size < seq_len + 1:
        raise ValueError(
            f"corpus too small: need at least {seq_len + 1} tokens, have {ids.size}"
        )
    produced = 0
    max_start = ids.size - seq_len - 1
    while n_batches is None or produced < n_batches:
        starts = rng.integers(0, max_start + 1, size=batch_size)
        inputs = np.stack([ids[s:s + seq_len] for s in starts])
        targets = np.stack([ids[s + 1:s + seq_len + 1] for s in starts])
        yield inputs, targets
        produced += 1


def emit_boundary_grid(prototypes: np.ndarray, bounds, resolution: int,
                       kind: str = "yat", cfg: KernelConfig | None = None,
                       path=None) -> np.ndarray:
    """Evaluate per-class responses on a regular 2-D grid.

    ``prototypes`` is ``C x 2``. Returns an array with one row per grid
    point and columns ``x, y, resp_0 .. resp_{C-1}, label`` where label is
    the argmax response. ``kind="yat"`` scores with the kernel (localized
    regions), ``kind="linear"`` with plain inner products (half spaces).
    Writes CSV to ``path`` when given.
    """
    W = np.asarray(prototypes, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] != 2:
        raise ShapeError(f"emit_boundary_grid: prototypes must be C x 2, got {W.shape}")
    if kind not in ("yat", "linear"):
        raise ValueError(f"kind must be 'yat' or 'linear', got {kind!r}")
    xmin, xmax, ymin, ymax = bounds
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    if kind == "yat":
        resp, _ = yat_batch(pts, W, None, cfg or KernelConfig())
    else:
        resp = pts @ W.T
    labels = np.argmax(resp, axis=1)
    grid = np.column_stack([pts, resp, labels.astype(np.float64)])
    if path is not None:
        header = ["x", "y"] + [f"resp_{c}" for c in range(W.shape[0])] + ["label"]
        write_csv(path, header, grid)
    return grid


def write_csv(path, header, rows):
    """UTF-8 CSV with '.' decimal separator and full-precision floats."""
    rows = np.asarray(rows)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_format_cell(c) for c in row) + "\n")


def _format_cell(c):
    if isinstance(c, (str, bytes)):
        return c if isinstance(c, str) else c.decode("utf-8")
    return repr(float(c))


def read_csv(path):
    """Read back a CSV written by :func:`write_csv` as (header, float array)."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        rows = [line.strip().split(",") for line in f if line.strip()]
    return header, np.array([[float(c) for c in row] for row in rows])
