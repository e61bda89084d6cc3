"""Exemplar-free continual learning with class-balanced analytic classifiers."""

from ._backend import BACKEND
from .classifier import (
    ClassifierState,
    ClassStats,
    Weights,
    fit_air,
    fit_baseline,
    fit_joint_oracle,
    fold_phase,
    observe,
    observe_batch,
    predict,
    predict_batch,
    read_weights,
    write_weights,
)
from .errors import (
    AirError,
    BadMagicError,
    ClassReappearedError,
    ConfigError,
    FormatError,
    InvalidDimensionError,
    ScenarioError,
    TruncatedFileError,
    VersionMismatchError,
)
from .features import (
    BufferLayer,
    FeatureSet,
    LabeledFeature,
    SyntheticSpec,
    buffer_project,
    read_features,
    synth_generate,
    write_features,
)
from .linalg import rank1_sym_update, regularized_spd_solve
from .metrics import EvalReport, per_class_mse, phase_accuracy, streaming_auc, weight_norms
from .scenarios import LtConfig, Order, PhaseStream, SiBlurryConfig, build_ltcil, build_siblurry, longtail_counts

__version__ = "0.1.0"
