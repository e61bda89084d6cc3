"""Phase-ordered stream builders for long-tailed CIL and Si-blurry GCIL."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ScenarioError
from .features import FeatureSet, read_features, write_features

__all__ = [
    "Order",
    "LtConfig",
    "SiBlurryConfig",
    "PhaseStream",
    "longtail_counts",
    "build_ltcil",
    "build_siblurry",
]


class Order(str, Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"
    SHUFFLED = "shuffled"


@dataclass(frozen=True)
class LtConfig:
    num_phases: int
    classes_per_phase: int
    imbalance_ratio: float
    order: Order = Order.DESCENDING
    seed: int = 0
    n_max: int | None = None  # None: largest count every class can supply

    def __post_init__(self):
        object.__setattr__(self, "order", Order(self.order))
        if self.num_phases < 1 or self.classes_per_phase < 1:
            raise ScenarioError("num_phases and classes_per_phase must be positive")
        if not 0 < self.imbalance_ratio <= 1:
            raise ScenarioError(f"imbalance_ratio must be in (0, 1], got {self.imbalance_ratio}")
        if self.n_max is not None and self.n_max < 1:
            raise ScenarioError("n_max must be positive")

    @property
    def num_classes(self):
        return self.num_phases * self.classes_per_phase


@dataclass(frozen=True)
class SiBlurryConfig:
    num_tasks: int
    disjoint_ratio: float = 0.1
    blurry_ratio: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.num_tasks < 2:
            raise ScenarioError("Si-blurry needs at least 2 tasks")
        if not 0 <= self.disjoint_ratio <= 1:
            raise ScenarioError(f"disjoint_ratio must be in [0, 1], got {self.disjoint_ratio}")
        if not 0 <= self.blurry_ratio <= 1:
            raise ScenarioError(f"blurry_ratio must be in [0, 1], got {self.blurry_ratio}")


@dataclass(eq=False)
class PhaseStream:
    phases: list
    kind: str
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.phases)

    def __iter__(self):
        return iter(self.phases)

    def labels_per_phase(self):
        return [set(np.unique(p.y).tolist()) for p in self.phases]

    def concatenated(self):
        return FeatureSet.concat(self.phases)

    def equals(self, other):
        return (
            self.kind == other.kind
            and len(self.phases) == len(other.phases)
            and all(a.equals(b) for a, b in zip(self.phases, other.phases))
        )

    def dump(self, prefix):
        """Write each phase to ``{prefix}.phase{K}`` (K from 1); returns the paths."""
        paths = []
        for k, phase in enumerate(self.phases, start=1):
            path = f"{prefix}.phase{k}"
            write_features(path, phase)
            paths.append(path)
        return paths

    @classmethod
    def load(cls, prefix, num_phases, kind="unknown"):
        return cls([read_features(f"{prefix}.phase{k}") for k in range(1, num_phases + 1)], kind)


def _round_half_up(v):
    return np.floor(np.asarray(v) + 0.5).astype(np.int64)


def longtail_counts(num_classes, n_max, imbalance_ratio):
    """Exponential long-tail profile ``max(1, round(n_max * rho**(i / (C - 1))))``."""
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if not imbalance_ratio > 0 or imbalance_ratio > 1:
        raise ValueError(f"imbalance ratio must be in (0, 1], got {imbalance_ratio}")
    if n_max < 1 or _round_half_up(n_max * imbalance_ratio) < 1:
        raise ValueError(f"n_max={n_max} with ratio {imbalance_ratio} leaves the tail class empty")
    exponents = np.arange(num_classes) / (num_classes - 1)
    counts = _round_half_up(n_max * imbalance_ratio ** exponents)
    counts[0] = n_max
    return np.maximum(counts, 1)


def _class_indices(dataset):
    order = np.argsort(dataset.y, kind="stable")
    labels, starts = np.unique(dataset.y[order], return_index=True)
    return labels, np.split(order, starts[1:])


def build_ltcil(dataset, cfg):
    """Subsample ``dataset`` to a long-tailed profile and split it into class-disjoint phases.

    Classes are ranked by label: the class with the smallest label gets the
    head count. The order only decides which classes land in which phase, so
    the three orders see the same training samples.
    """
    labels, members = _class_indices(dataset)
    if len(labels) != cfg.num_classes:
        raise ScenarioError(
            f"dataset has {len(labels)} classes, config needs "
            f"{cfg.num_phases} x {cfg.classes_per_phase} = {cfg.num_classes}"
        )
    available = np.array([len(m) for m in members])
    n_max = cfg.n_max if cfg.n_max is not None else int(available.min())
    counts = longtail_counts(len(labels), n_max, cfg.imbalance_ratio)
    short = np.nonzero(available < counts)[0]
    if short.size:
        i = int(short[0])
        raise ScenarioError(f"class {int(labels[i])} has {available[i]} samples, needs {counts[i]}")

    sub_ss, perm_ss, shuf_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    sub_rng = np.random.default_rng(sub_ss)
    chosen = [sub_rng.permutation(m)[:n] for m, n in zip(members, counts)]

    ranks = np.arange(len(labels))
    if cfg.order is Order.ASCENDING:
        ranks = ranks[::-1]
    elif cfg.order is Order.SHUFFLED:
        ranks = np.random.default_rng(perm_ss).permutation(ranks)
    groups = ranks.reshape(cfg.num_phases, cfg.classes_per_phase)

    shuf_rng = np.random.default_rng(shuf_ss)
    phases = []
    for group in groups:
        idx = np.concatenate([chosen[r] for r in group])
        phases.append(dataset.take(shuf_rng.permutation(idx)))

    metadata = {
        "imbalance_ratio": cfg.imbalance_ratio,
        "order": cfg.order.value,
        "n_max": n_max,
        "class_counts": {int(labels[i]): int(counts[i]) for i in range(len(labels))},
        "phase_classes": [[int(labels[r]) for r in g] for g in groups],
        "selected_indices": np.sort(np.concatenate(chosen)),
        "seed": cfg.seed,
    }
    return PhaseStream(phases, "lt-cil", metadata)


def build_siblurry(dataset, cfg):
    """Si-blurry stream: disjoint classes live in one task; blurry samples leak across tasks.

    ``ceil(r_D * C)`` randomly chosen classes are disjoint and split among the
    tasks. Every remaining (blurry) class gets a home task; then a
    ``round(r_B * M)`` subset of the M blurry samples is moved, each to a task
    drawn uniformly from the tasks other than its home. Each task is shuffled.
    """
    if len(dataset) == 0:
        raise ScenarioError("dataset is empty")
    labels, members = _class_indices(dataset)
    C = len(labels)
    n_disjoint = min(C, math.ceil(cfg.disjoint_ratio * C - 1e-12))
    if n_disjoint == C and cfg.blurry_ratio > 0:
        raise ScenarioError(
            f"disjoint_ratio={cfg.disjoint_ratio} marks all {C} classes disjoint; "
            "blurry_ratio must be 0 when there are no blurry classes"
        )

    class_ss, assign_ss, blur_ss, shuf_ss = np.random.SeedSequence(cfg.seed).spawn(4)
    perm = np.random.default_rng(class_ss).permutation(C)
    disjoint, blurry = np.sort(perm[:n_disjoint]), np.sort(perm[n_disjoint:])

    assign_rng = np.random.default_rng(assign_ss)
    task_of_class = np.empty(C, dtype=np.int64)
    for group in (disjoint, blurry):
        shuffled = assign_rng.permutation(group)
        for t, chunk in enumerate(np.array_split(shuffled, cfg.num_tasks)):
            task_of_class[chunk] = t

    sample_task = np.empty(len(dataset), dtype=np.int64)
    for ci, m in enumerate(members):
        sample_task[m] = task_of_class[ci]

    blurry_idx = np.sort(np.concatenate([members[ci] for ci in blurry])) if len(blurry) else np.empty(0, np.int64)
    n_extract = int(_round_half_up(cfg.blurry_ratio * len(blurry_idx)))
    blur_rng = np.random.default_rng(blur_ss)
    extracted = np.sort(blur_rng.choice(blurry_idx, size=n_extract, replace=False)) if n_extract else blurry_idx[:0]
    # uniform over the other num_tasks - 1 tasks
    offsets = blur_rng.integers(1, cfg.num_tasks, size=n_extract)
    sample_task[extracted] = (sample_task[extracted] + offsets) % cfg.num_tasks

    shuf_rng = np.random.default_rng(shuf_ss)
    phases = []
    for t in range(cfg.num_tasks):
        idx = np.nonzero(sample_task == t)[0]
        phases.append(dataset.take(shuf_rng.permutation(idx)))

    metadata = {
        "disjoint_ratio": cfg.disjoint_ratio,
        "blurry_ratio": cfg.blurry_ratio,
        "disjoint_classes": [int(labels[i]) for i in disjoint],
        "blurry_classes": [int(labels[i]) for i in blurry],
        "home_task": {int(labels[i]): int(task_of_class[i]) for i in range(C)},
        "num_blurry_samples": int(len(blurry_idx)),
        "num_extracted": n_extract,
        "seed": cfg.seed,
    }
    return PhaseStream(phases, "si-blurry", metadata)
