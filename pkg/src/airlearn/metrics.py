"""Evaluation metrics and diagnostics for fitted analytic classifiers."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .classifier import predict_batch

__all__ = [
    "EvalReport",
    "confusion_matrix",
    "phase_accuracy",
    "per_class_recall",
    "streaming_auc",
    "weight_norms",
    "per_class_mse",
    "total_loss",
]


def confusion_matrix(w, test, num_classes=None):
    """Rows are true labels, columns predictions; ``C = w.num_classes`` by default."""
    C = w.num_classes if num_classes is None else num_classes
    if len(test) and test.y.max() >= C:
        raise ValueError(f"test label {int(test.y.max())} outside the {C} classes of the classifier")
    pred = predict_batch(w, test.X)
    cm = np.zeros((C, C), dtype=np.int64)
    np.add.at(cm, (test.y, pred), 1)
    return cm


def per_class_recall(cm):
    """Recall per class; NaN for classes without test samples."""
    support = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(support > 0, np.diag(cm) / support, np.nan)


def _macro(cm):
    rec = per_class_recall(cm)
    return float(np.nanmean(rec))


def _micro(cm):
    return float(np.trace(cm) / cm.sum())


def phase_accuracy(w, test, macro=True):
    """Macro (mean per-class recall over classes present in ``test``) or micro accuracy."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    cm = confusion_matrix(w, test)
    return _macro(cm) if macro else _micro(cm)


def streaming_auc(points):
    """Trapezoidal area under (samples_seen, accuracy), divided by the samples_seen span."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (samples_seen, accuracy) points")
    s, a = pts[:, 0], pts[:, 1]
    if np.any(np.diff(s) <= 0):
        raise ValueError("samples_seen must be strictly increasing")
    area = float(np.sum(0.5 * (a[1:] + a[:-1]) * np.diff(s)))
    return area / float(s[-1] - s[0])


def weight_norms(w):
    return np.sqrt(np.sum(w.W * w.W, axis=0))


def per_class_mse(w, data, mean=True, num_classes=None):
    """Per-class ``sum ||x W - onehot(y)||^2`` (divided by the class count if ``mean``).

    Classes with no samples in ``data`` are NaN.
    """
    if len(data) == 0:
        raise ValueError("data is empty")
    C = w.num_classes if num_classes is None else num_classes
    R = data.X @ w.W
    R[np.arange(len(data)), data.y] -= 1.0
    per_sample = np.sum(R * R, axis=1)
    sums = np.bincount(data.y, weights=per_sample, minlength=C)
    counts = np.bincount(data.y, minlength=C)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = sums / counts if mean else sums.astype(np.float64)
    return np.where(counts > 0, out, np.nan)


def total_loss(w, data):
    """Unregularized squared loss over all samples, computed globally."""
    Y = np.zeros((len(data), w.num_classes))
    Y[np.arange(len(data)), data.y] = 1.0
    return float(np.sum((data.X @ w.W - Y) ** 2))


def _nan_to_none(values):
    return [None if (v is None or (isinstance(v, float) and math.isnan(v))) else float(v) for v in values]


@dataclass
class EvalReport:
    per_phase_acc: list
    a_avg: float
    a_last_macro: float
    a_last_micro: float
    confusion: list
    weight_norms: list
    per_class_mse: list
    a_auc: float | None = None
    per_phase_acc_micro: list = field(default_factory=list)
    a_avg_micro: float | None = None
    auc_points: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, per_phase_macro, per_phase_micro, w_last, test, auc_points=None, meta=None):
        cm = confusion_matrix(w_last, test)
        return cls(
            per_phase_acc=[float(a) for a in per_phase_macro],
            a_avg=float(np.mean(per_phase_macro)),
            a_last_macro=float(per_phase_macro[-1]),
            a_last_micro=float(per_phase_micro[-1]),
            confusion=cm.tolist(),
            weight_norms=[float(v) for v in weight_norms(w_last)],
            per_class_mse=_nan_to_none(per_class_mse(w_last, test, mean=True).tolist()),
            a_auc=streaming_auc(auc_points) if auc_points and len(auc_points) >= 2 else None,
            per_phase_acc_micro=[float(a) for a in per_phase_micro],
            a_avg_micro=float(np.mean(per_phase_micro)),
            auc_points=[[int(s), float(a)] for s, a in (auc_points or [])],
            meta=dict(meta or {}),
        )

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)

    def macro_from_confusion(self):
        return _macro(np.asarray(self.confusion))

    def micro_from_confusion(self):
        return _micro(np.asarray(self.confusion))
