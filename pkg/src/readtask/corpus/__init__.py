from .types import (
    BAND_NAMES,
    N_CHANNELS,
    TASK_LABELS,
    ContinuousEeg,
    Corpus,
    FixationEvent,
    SaccadeEvent,
    SentenceRecording,
    SubjectData,
    SubjectMeta,
    WordRecord,
)
from .io import load_corpus, save_corpus, validate_corpus
from .synth import (
    EegParams,
    Gaussian,
    SynthSpec,
    TaskParams,
    block_drift_spec,
    null_spec,
    omission_only_spec,
    synthesize_corpus,
    zuco1_like_spec,
    zuco2_like_spec,
)
from .oracle import BayesOracleResult, bayes_oracle, gaussian_bayes_accuracy_1d

__all__ = [
    "BAND_NAMES",
    "N_CHANNELS",
    "TASK_LABELS",
    "BayesOracleResult",
    "ContinuousEeg",
    "Corpus",
    "EegParams",
    "FixationEvent",
    "Gaussian",
    "SaccadeEvent",
    "SentenceRecording",
    "SubjectData",
    "SubjectMeta",
    "SynthSpec",
    "TaskParams",
    "WordRecord",
    "bayes_oracle",
    "block_drift_spec",
    "gaussian_bayes_accuracy_1d",
    "load_corpus",
    "null_spec",
    "omission_only_spec",
    "save_corpus",
    "synthesize_corpus",
    "validate_corpus",
    "zuco1_like_spec",
    "zuco2_like_spec",
]
