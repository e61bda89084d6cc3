"""Analytic (closed-form) classifiers over accumulated feature statistics.

Each class y keeps its auto-correlation ``A_y = sum x x^T``, its feature sum
``c_y = sum x`` (the single non-zero column of ``X_y^T Y_y`` under one-hot
targets) and its count ``n_y``. The class-balanced weights are

    W = (sum_y A_y / n_y + gamma I)^-1 [c_0 / n_0, c_1 / n_1, ...]

and the ordinary ridge baseline drops the ``1 / n_y`` factors. Both depend
only on the multiset of observed samples, never on arrival order.

Two storage modes:

* ``"gcil"`` keeps per-class statistics forever, so a class may recur in any
  phase.
* ``"cil"`` folds each finished phase into two f x f / f x C accumulators
  (one weighted, one unweighted) and discards the per-class matrices. This
  is only exact when phases are class-disjoint, which is enforced.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import BadMagicError, FormatError, InvalidDimensionError, TruncatedFileError, VersionMismatchError
from .errors import ClassReappearedError
from .linalg import regularized_spd_solve

__all__ = [
    "ClassStats",
    "ClassifierState",
    "Weights",
    "observe",
    "observe_batch",
    "fit_air",
    "fit_baseline",
    "fit_joint_oracle",
    "fold_phase",
    "predict",
    "predict_batch",
    "write_weights",
    "read_weights",
]

AIRW_MAGIC = b"AIRW"
AIRW_VERSION = 1
_AIRW_HEADER = struct.Struct("<4sIII")


@dataclass
class ClassStats:
    A: np.ndarray
    c: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0)


@dataclass
class ClassifierState:
    dim: int
    gamma: float
    mode: str = "gcil"
    per_class: dict = field(default_factory=dict)
    seen_classes: int = 0
    # CIL mode only
    folded_A: np.ndarray | None = None
    folded_C: np.ndarray | None = None
    folded_A_unweighted: np.ndarray | None = None
    folded_C_unweighted: np.ndarray | None = None
    folded_labels: set = field(default_factory=set)
    phases_folded: int = 0

    def __post_init__(self):
        if self.mode not in ("cil", "gcil"):
            raise ValueError(f"mode must be 'cil' or 'gcil', got {self.mode!r}")
        if self.dim < 1:
            raise ValueError("feature dimension must be positive")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if self.mode == "cil" and self.folded_A is None:
            self.folded_A = np.zeros((self.dim, self.dim))
            self.folded_A_unweighted = np.zeros((self.dim, self.dim))
            self.folded_C = np.zeros((self.dim, 0))
            self.folded_C_unweighted = np.zeros((self.dim, 0))

    def observe(self, x, y):
        return observe(self, x, y)

    def observe_batch(self, features):
        return observe_batch(self, features)

    def fold_phase(self):
        return fold_phase(self)

    def class_counts(self):
        counts = np.zeros(self.seen_classes, dtype=np.int64)
        for y, s in self.per_class.items():
            counts[y] = s.n
        return counts

    def _stats_for(self, y):
        if y < 0:
            raise ValueError(f"labels must be non-negative, got {y}")
        if self.mode == "cil" and y in self.folded_labels:
            raise ClassReappearedError(y, phase=self.phases_folded + 1)
        s = self.per_class.get(y)
        if s is None:
            s = self.per_class[y] = ClassStats.zeros(self.dim)
        self.seen_classes = max(self.seen_classes, y + 1)
        return s


@dataclass(frozen=True, eq=False)
class Weights:
    """Immutable ``(f, C)`` classifier snapshot."""

    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, order="C", copy=True)
        if W.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("weights contain non-finite values")
        W.flags.writeable = False
        object.__setattr__(self, "W", W)

    @property
    def dim(self):
        return self.W.shape[0]

    @property
    def num_classes(self):
        return self.W.shape[1]


def _as_vector(x, dim):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise ValueError(f"feature has shape {x.shape}, expected ({dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature contains non-finite values")
    return x


def observe(state, x, y):
    """Accumulate one sample into its class statistics (in place; returns ``state``)."""
    x = _as_vector(x, state.dim)
    s = state._stats_for(int(y))
    _backend.sym_rank1_update(s.A, x, 1.0)
    s.c += x
    s.n += 1
    return state


def observe_batch(state, features):
    """Accumulate a FeatureSet, equivalent to calling :func:`observe` per row."""
    if features.dim != state.dim:
        raise ValueError(f"features have dimension {features.dim}, state expects {state.dim}")
    if len(features) == 0:
        return state
    # validate every label before touching any statistics
    labels = np.unique(features.y)
    if state.mode == "cil":
        for y in labels:
            if int(y) in state.folded_labels:
                raise ClassReappearedError(int(y), phase=state.phases_folded + 1)
    order = np.argsort(features.y, kind="stable")
    ys = features.y[order]
    bounds = np.searchsorted(ys, labels, side="left").tolist() + [len(ys)]
    for i, y in enumerate(labels):
        rows = np.ascontiguousarray(features.X[order[bounds[i]:bounds[i + 1]]])
        s = state._stats_for(int(y))
        _backend.accumulate_rows(s.A, s.c, rows)
        s.n += rows.shape[0]
    return state


def _weighted_sums(state, weighted, num_classes):
    """Return (G, B) for the current per-class statistics, classes in label order."""
    G = np.zeros((state.dim, state.dim))
    B = np.zeros((state.dim, num_classes))
    for y in sorted(state.per_class):
        s = state.per_class[y]
        if s.n == 0:
            continue
        pi = 1.0 / s.n if weighted else 1.0
        G += pi * s.A
        B[:, y] = pi * s.c
    return G, B


def _system(state, weighted):
    C = state.seen_classes
    G, B = _weighted_sums(state, weighted, C)
    if state.mode == "cil":
        fA = state.folded_A if weighted else state.folded_A_unweighted
        fC = state.folded_C if weighted else state.folded_C_unweighted
        G += fA
        B[:, :fC.shape[1]] += fC
    return G, B


def _fit(state, weighted, gamma):
    if state.seen_classes == 0:
        raise ValueError("cannot fit a classifier on an empty state")
    G, B = _system(state, weighted)
    return Weights(regularized_spd_solve(G, B, state.gamma if gamma is None else gamma))


def fit_air(state, gamma=None):
    """Class-balanced closed-form weights (each class's loss scaled by ``1 / n_y``)."""
    return _fit(state, True, gamma)


def fit_baseline(state, gamma=None):
    """Plain ridge weights: every sample counts once."""
    return _fit(state, False, gamma)


def fit_joint_oracle(features, gamma, weighted=True, num_classes=None):
    """Batch solution from the full buffered dataset in one pass.

    Builds the Gram matrices with matrix products directly, independent of
    the incremental accumulation path.
    """
    if len(features) == 0:
        raise ValueError("cannot fit a classifier on an empty dataset")
    X, y = features.X, features.y
    C = int(y.max()) + 1 if num_classes is None else num_classes
    counts = np.bincount(y, minlength=C)
    pi = 1.0 / counts[y] if weighted else np.ones(len(y))
    Y = np.zeros((len(y), C))
    Y[np.arange(len(y)), y] = 1.0
    Xw = X * pi[:, None]
    G = Xw.T @ X
    G = 0.5 * (G + G.T)
    return Weights(regularized_spd_solve(G, Xw.T @ Y, gamma))


def fold_phase(state):
    """Fold the current phase's class statistics into the CIL accumulators."""
    if state.mode != "cil":
        raise ValueError("fold_phase is only defined for CIL-mode states")
    active = {y: s for y, s in state.per_class.items() if s.n > 0}
    if not active:
        state.per_class.clear()
        return state
    C = state.seen_classes
    for name in ("folded_C", "folded_C_unweighted"):
        cur = getattr(state, name)
        if cur.shape[1] < C:
            setattr(state, name, np.hstack([cur, np.zeros((state.dim, C - cur.shape[1]))]))
    Gw, Bw = _weighted_sums(state, True, C)
    Gu, Bu = _weighted_sums(state, False, C)
    state.folded_A += Gw
    state.folded_C += Bw
    state.folded_A_unweighted += Gu
    state.folded_C_unweighted += Bu
    state.folded_labels.update(active)
    state.per_class.clear()
    state.phases_folded += 1
    return state


def predict_batch(w, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != w.dim:
        raise ValueError(f"inputs have shape {X.shape}, weights expect dimension {w.dim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs contain non-finite values")
    if len(X) == 0:
        return np.empty(0, dtype=np.int64)
    # argmax returns the first maximum, i.e. the smallest label on ties
    return np.argmax(X @ w.W, axis=1).astype(np.int64)


def predict(w, x):
    return int(predict_batch(w, _as_vector(x, w.dim)[None, :])[0])


def write_weights(path, w):
    f, C = w.W.shape
    if f == 0:
        raise InvalidDimensionError("weights have zero feature dimension")
    with open(path, "wb") as fh:
        fh.write(_AIRW_HEADER.pack(AIRW_MAGIC, AIRW_VERSION, f, C))
        fh.write(w.W.astype("<f8").tobytes())


def read_weights(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != AIRW_MAGIC:
        raise BadMagicError(f"{path}: not an AIRW file (magic {data[:4]!r})")
    if len(data) < _AIRW_HEADER.size:
        raise TruncatedFileError(f"{path}: header truncated ({len(data)} bytes)")
    _, version, f, C = _AIRW_HEADER.unpack_from(data)
    if version != AIRW_VERSION:
        raise VersionMismatchError(f"{path}: AIRW version {version}, expected {AIRW_VERSION}")
    if f == 0:
        raise InvalidDimensionError(f"{path}: feature dimension is 0")
    expected = _AIRW_HEADER.size + 8 * f * C
    if len(data) < expected:
        raise TruncatedFileError(f"{path}: expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes")
    W = np.frombuffer(data, dtype="<f8", count=f * C, offset=_AIRW_HEADER.size).reshape(f, C)
    return Weights(W)
