"""Feature pipeline: labelled feature containers, the frozen random buffer
layer, a synthetic stand-in for a pretrained backbone, and the AIRF file format.

AIRF layout (little-endian)::

    magic   4 bytes  b"AIRF"
    version u32      1
    count   u64      N
    dim     u32      f
    N records of (f x float64 features, u32 label)
"""

import struct
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import BadMagicError, FormatError, InvalidDimensionError, TruncatedFileError, VersionMismatchError

__all__ = [
    "LabeledFeature",
    "FeatureSet",
    "BufferLayer",
    "buffer_project",
    "SyntheticSpec",
    "synth_generate",
    "write_features",
    "read_features",
]

AIRF_MAGIC = b"AIRF"
AIRF_VERSION = 1
_AIRF_HEADER = struct.Struct("<4sIQI")


class LabeledFeature(NamedTuple):
    x: np.ndarray
    y: int


@dataclass(eq=False)
class FeatureSet:
    """A batch of labelled features: ``X`` is ``(N, f)`` float64, ``y`` is ``(N,)`` int64."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(f"y has shape {self.y.shape}, expected ({self.X.shape[0]},)")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("features contain non-finite values")
        if self.y.size and self.y.min() < 0:
            raise ValueError("labels must be non-negative")

    @classmethod
    def empty(cls, dim):
        return cls(np.empty((0, dim)), np.empty(0, dtype=np.int64))

    @classmethod
    def from_items(cls, items, dim=None):
        items = list(items)
        if not items:
            if dim is None:
                raise ValueError("dimension required for an empty item list")
            return cls.empty(dim)
        X = np.stack([np.asarray(it.x, dtype=np.float64) for it in items])
        return cls(X, np.array([int(it.y) for it in items], dtype=np.int64))

    @classmethod
    def concat(cls, parts, dim=None):
        parts = list(parts)
        if not parts:
            return cls.empty(dim or 0)
        return cls(np.concatenate([p.X for p in parts]), np.concatenate([p.y for p in parts]))

    @property
    def dim(self):
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def __iter__(self) -> Iterator[LabeledFeature]:
        for x, y in zip(self.X, self.y):
            yield LabeledFeature(x, int(y))

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return FeatureSet(self.X[idx], self.y[idx])

    def labels(self):
        return np.unique(self.y)

    def class_counts(self, num_classes=None):
        n = num_classes if num_classes is not None else (int(self.y.max()) + 1 if len(self) else 0)
        return np.bincount(self.y, minlength=n)

    def equals(self, other):
        """Bit-exact equality, including order."""
        return (
            self.X.shape == other.X.shape
            and self.X.tobytes() == other.X.tobytes()
            and np.array_equal(self.y, other.y)
        )

    def multiset_key(self):
        """Order-independent canonical form, for conservation checks."""
        rows = [self.X[i].tobytes() + int(self.y[i]).to_bytes(8, "little") for i in range(len(self))]
        return sorted(rows)


@dataclass(frozen=True)
class BufferLayer:
    """Frozen random projection from ``in_dim`` to ``out_dim`` followed by ReLU.

    Projection entries are iid standard normal drawn once from ``seed``.
    """

    in_dim: int
    out_dim: int
    seed: int
    projection: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"buffer dims must be positive, got {self.in_dim}->{self.out_dim}")
        P = np.random.default_rng(self.seed).standard_normal((self.in_dim, self.out_dim))
        P.flags.writeable = False
        object.__setattr__(self, "projection", P)

    def __call__(self, raw):
        return buffer_project(self, raw)


def buffer_project(layer, raw):
    """``max(0, raw @ projection)`` for one vector or a ``(N, d)`` batch."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape[-1] != layer.in_dim or raw.ndim not in (1, 2):
        raise ValueError(f"input has shape {raw.shape}, layer expects last dim {layer.in_dim}")
    return np.maximum(raw @ layer.projection, 0.0)


def project_set(layer, fs):
    return FeatureSet(buffer_project(layer, fs.X), fs.y)


@dataclass(frozen=True)
class SyntheticSpec:
    """Class-conditional Gaussians with means spread on a sphere."""

    num_classes: int
    raw_dim: int
    class_mean_radius: float = 3.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.raw_dim < 1:
            raise ValueError("raw_dim must be >= 1")
        if not self.class_mean_radius > 0:
            raise ValueError("class_mean_radius must be positive")
        if not self.noise_sigma > 0:
            raise ValueError("noise_sigma must be positive")

    def class_means(self):
        g = np.random.default_rng(self.seed).standard_normal((self.num_classes, self.raw_dim))
        return self.class_mean_radius * g / np.linalg.norm(g, axis=1, keepdims=True)


def synth_generate(spec, counts, draw=0):
    """Sample ``counts[y]`` raw features for every class y, grouped by label.

    Class means depend only on ``spec.seed``; the noise also depends on
    ``draw``, so ``draw=1`` gives a fresh sample from the same classes.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (spec.num_classes,):
        raise ValueError(f"expected {spec.num_classes} counts, got {counts.shape[0] if counts.ndim else counts}")
    if counts.size and counts.min() < 0:
        raise ValueError("counts must be non-negative")
    means = spec.class_means()
    rng = np.random.default_rng([spec.seed, draw])
    X = np.empty((int(counts.sum()), spec.raw_dim))
    y = np.repeat(np.arange(spec.num_classes), counts)
    start = 0
    for label, n in enumerate(counts):
        X[start:start + n] = means[label] + spec.noise_sigma * rng.standard_normal((n, spec.raw_dim))
        start += n
    return FeatureSet(X, y)


def _record_dtype(dim):
    return np.dtype([("x", "<f8", (dim,)), ("y", "<u4")])


def write_features(path, features):
    """Write a FeatureSet (or a list of LabeledFeature) to an AIRF file."""
    if not isinstance(features, FeatureSet):
        features = FeatureSet.from_items(features, dim=0)
    if features.dim == 0:
        raise InvalidDimensionError("feature dimension must be positive")
    if len(features) and features.y.max() > np.iinfo(np.uint32).max:
        raise FormatError("labels must fit in u32")
    rec = np.empty(len(features), dtype=_record_dtype(features.dim))
    rec["x"] = features.X
    rec["y"] = features.y
    with open(path, "wb") as fh:
        fh.write(_AIRF_HEADER.pack(AIRF_MAGIC, AIRF_VERSION, len(features), features.dim))
        fh.write(rec.tobytes())


def read_features(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != AIRF_MAGIC:
        raise BadMagicError(f"{path}: not an AIRF file (magic {data[:4]!r})")
    if len(data) < _AIRF_HEADER.size:
        raise TruncatedFileError(f"{path}: header truncated ({len(data)} bytes)")
    _, version, count, dim = _AIRF_HEADER.unpack_from(data)
    if version != AIRF_VERSION:
        raise VersionMismatchError(f"{path}: AIRF version {version}, expected {AIRF_VERSION}")
    if dim == 0:
        raise InvalidDimensionError(f"{path}: feature dimension is 0")
    dt = _record_dtype(dim)
    expected = _AIRF_HEADER.size + count * dt.itemsize
    if len(data) < expected:
        raise TruncatedFileError(f"{path}: expected {expected} bytes for {count} records, found {len(data)}")
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes after {count} records")
    rec = np.frombuffer(data, dtype=dt, count=count, offset=_AIRF_HEADER.size)
    return FeatureSet(rec["x"].reshape(count, dim), rec["y"].astype(np.int64))
