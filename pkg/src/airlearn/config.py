"""TOML run configuration for the ``airlearn run`` and ``gen-features`` commands."""

import sys
from dataclasses import dataclass, fields

from .errors import ConfigError, ScenarioError
from .features import SyntheticSpec
from .scenarios import LtConfig, SiBlurryConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METHODS = ("air-cil", "air-gcil", "baseline")


@dataclass(frozen=True)
class FeatureSource:
    source: str = "synthetic"
    path: str | None = None
    num_classes: int = 10
    raw_dim: int = 32
    class_mean_radius: float = 3.0
    noise_sigma: float = 1.0
    samples_per_class: int = 200
    imbalance_ratio: float | None = None
    seed: int | None = None

    def synthetic_spec(self, run_seed):
        return SyntheticSpec(
            num_classes=self.num_classes,
            raw_dim=self.raw_dim,
            class_mean_radius=self.class_mean_radius,
            noise_sigma=self.noise_sigma,
            seed=self.seed if self.seed is not None else run_seed,
        )


@dataclass(frozen=True)
class BufferConfig:
    out_dim: int
    seed: int | None = None


@dataclass(frozen=True)
class EvalConfig:
    interval_samples: int = 1000
    test_split_fraction: float = 0.2


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario parameters without the seed, which comes from the run seed."""

    kind: str
    params: dict

    def build_config(self, seed):
        if self.kind == "lt-cil":
            return LtConfig(seed=seed, **self.params)
        return SiBlurryConfig(seed=seed, **self.params)


@dataclass(frozen=True)
class RunConfig:
    method: str
    gamma: float
    seeds: tuple
    output_dir: str
    features: FeatureSource
    scenario: ScenarioSpec | None
    buffer: BufferConfig | None = None
    eval: EvalConfig = EvalConfig()


def _section(cls, raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{where}] must be a table")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"[{where}] unknown field(s): {', '.join(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


_LT_FIELDS = {"num_phases", "classes_per_phase", "imbalance_ratio", "order", "n_max"}
_SB_FIELDS = {"num_tasks", "disjoint_ratio", "blurry_ratio"}


def _scenario(raw):
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError("[scenario] needs a 'kind' field ('lt-cil' or 'si-blurry')")
    raw = dict(raw)
    kind = raw.pop("kind")
    allowed = {"lt-cil": _LT_FIELDS, "si-blurry": _SB_FIELDS}.get(kind)
    if allowed is None:
        raise ConfigError(f"scenario.kind: expected 'lt-cil' or 'si-blurry', got {kind!r}")
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"[scenario] unknown field(s) for {kind}: {', '.join(unknown)}")
    spec = ScenarioSpec(kind, raw)
    try:
        spec.build_config(0)
    except (TypeError, ValueError, ScenarioError) as exc:
        raise ConfigError(f"[scenario] {exc}") from None
    return spec


def parse_config(text, require_scenario=True):
    try:
        return _parse(text, require_scenario)
    except TypeError as exc:
        # comparisons on a wrongly typed field, e.g. num_classes = "ten"
        raise ConfigError(f"wrongly typed field: {exc}") from None


def _parse(text, require_scenario):
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None

    top = {"method", "gamma", "seeds", "output_dir", "features", "scenario", "buffer", "eval"}
    unknown = sorted(set(raw) - top)
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {', '.join(unknown)}")

    method = raw.get("method", "air-gcil")
    _require(method in METHODS, f"method: expected one of {', '.join(METHODS)}, got {method!r}")
    gamma = raw.get("gamma", 1.0)
    _require(isinstance(gamma, (int, float)) and gamma > 0, f"gamma: must be a positive number, got {gamma!r}")
    seeds = raw.get("seeds", [0])
    _require(
        isinstance(seeds, list) and seeds and all(isinstance(s, int) and s >= 0 for s in seeds),
        "seeds: must be a non-empty list of non-negative integers",
    )

    features = _section(FeatureSource, raw.get("features", {}), "features")
    _require(features.source in ("synthetic", "file"), f"features.source: expected 'synthetic' or 'file', got {features.source!r}")
    if features.source == "file":
        _require(bool(features.path), "features.path: required when features.source = 'file'")
    else:
        _require(features.num_classes >= 2, "features.num_classes: must be >= 2")
        _require(features.raw_dim >= 1, "features.raw_dim: must be >= 1")
        _require(features.samples_per_class >= 1, "features.samples_per_class: must be >= 1")
        _require(features.class_mean_radius > 0, "features.class_mean_radius: must be positive")
        _require(features.noise_sigma > 0, "features.noise_sigma: must be positive")
        if features.imbalance_ratio is not None:
            _require(0 < features.imbalance_ratio <= 1, "features.imbalance_ratio: must be in (0, 1]")

    buffer = None
    if "buffer" in raw:
        buffer = _section(BufferConfig, raw["buffer"], "buffer")
        _require(isinstance(buffer.out_dim, int) and buffer.out_dim >= 1, "buffer.out_dim: must be a positive integer")

    ev = _section(EvalConfig, raw.get("eval", {}), "eval")
    _require(isinstance(ev.interval_samples, int) and ev.interval_samples >= 1, "eval.interval_samples: must be a positive integer")
    _require(0 < ev.test_split_fraction < 1, "eval.test_split_fraction: must be in (0, 1)")

    scenario = None
    if "scenario" in raw:
        scenario = _scenario(raw["scenario"])
    else:
        _require(not require_scenario, "[scenario] section is required")

    return RunConfig(
        method=method,
        gamma=float(gamma),
        seeds=tuple(seeds),
        output_dir=str(raw.get("output_dir", "airlearn-out")),
        features=features,
        scenario=scenario,
        buffer=buffer,
        eval=ev,
    )


def load_config(path, require_scenario=True):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), require_scenario)
