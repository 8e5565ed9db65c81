"""Gradient-based inverse molecule design on a robust string grammar.

The package trains a small from-scratch MLP to predict an additive
property surrogate from one-hot token strings, then optimizes the
*input* of the frozen network by gradient descent ("dreaming") so the
decoded molecule drifts toward a property target. Every intermediate
input still decodes to a valid molecule because the grammar is robust
by construction.
"""

from .config import SPLITS, ExperimentConfig
from .dream import (
    DreamConfig,
    DreamSetResult,
    DreamStep,
    DreamTrajectory,
    MoleculeDreamer,
    dream,
    dream_set,
    inject_noise,
    trajectory_json_lines,
)
from .errors import (
    BadRange,
    ConfigError,
    DegenerateLabels,
    EmptyDataset,
    EmptyInput,
    EncodingError,
    FileUnreadable,
    InvalidGraph,
    MissingLabel,
    ModelFormatError,
    MoldreamError,
    NonFiniteInput,
    NotOneHot,
    RingLabelsExhausted,
    ShapeMismatch,
    SmilesSyntaxError,
    TooLong,
    UnclosedRing,
    Unencodable,
    UnknownToken,
    UnsupportedFeature,
    ValenceExceeded,
)
from .graph import (
    MAX_VALENCE,
    CanonicalKey,
    MolecularGraph,
    canonical_form,
    canonical_key,
    composition,
    implicit_hydrogens,
    parse_smiles,
    write_smiles,
)
from .net import (
    DEFAULT_HIDDEN,
    GradientBundle,
    Mlp,
    MlpRegressor,
    backward,
    backward_batch,
    forward,
    forward_batch,
    input_gradient_batch,
    load_model,
    save_model,
)
from .oracle import (
    DEFAULT_TABLE,
    ExternalLabelOracle,
    PropertyTable,
    Stats,
    TableOracle,
    dataset_stats,
    surrogate_logp,
)
from .pipeline import (
    CompositionShift,
    Dataset,
    Entry,
    ExperimentResult,
    composition_shift,
    histogram,
    ingest,
    report_json,
    run_experiment,
    train_regressor,
    write_artifacts,
)
from .selfies import (
    ALPHABET,
    ALPHABET_SIZE,
    DEFAULT_L_MAX,
    SelfiesVectorizer,
    decode,
    encode,
    from_onehot_argmax,
    to_onehot,
    tokens_from_text,
    tokens_to_text,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "ALPHABET_SIZE",
    "BadRange",
    "CanonicalKey",
    "CompositionShift",
    "ConfigError",
    "DEFAULT_HIDDEN",
    "DEFAULT_L_MAX",
    "DEFAULT_TABLE",
    "Dataset",
    "DegenerateLabels",
    "DreamConfig",
    "DreamSetResult",
    "DreamStep",
    "DreamTrajectory",
    "EmptyDataset",
    "EmptyInput",
    "EncodingError",
    "Entry",
    "ExperimentConfig",
    "ExperimentResult",
    "ExternalLabelOracle",
    "FileUnreadable",
    "GradientBundle",
    "InvalidGraph",
    "MAX_VALENCE",
    "MissingLabel",
    "Mlp",
    "MlpRegressor",
    "ModelFormatError",
    "MolecularGraph",
    "MoldreamError",
    "MoleculeDreamer",
    "NonFiniteInput",
    "NotOneHot",
    "PropertyTable",
    "RingLabelsExhausted",
    "SPLITS",
    "SelfiesVectorizer",
    "ShapeMismatch",
    "SmilesSyntaxError",
    "Stats",
    "TableOracle",
    "TooLong",
    "UnclosedRing",
    "Unencodable",
    "UnknownToken",
    "UnsupportedFeature",
    "ValenceExceeded",
    "backward",
    "backward_batch",
    "canonical_form",
    "canonical_key",
    "composition",
    "composition_shift",
    "dataset_stats",
    "decode",
    "dream",
    "dream_set",
    "encode",
    "forward",
    "forward_batch",
    "from_onehot_argmax",
    "histogram",
    "implicit_hydrogens",
    "ingest",
    "inject_noise",
    "input_gradient_batch",
    "load_model",
    "parse_smiles",
    "report_json",
    "run_experiment",
    "save_model",
    "surrogate_logp",
    "to_onehot",
    "tokens_from_text",
    "tokens_to_text",
    "train_regressor",
    "trajectory_json_lines",
    "write_artifacts",
    "write_smiles",
]
