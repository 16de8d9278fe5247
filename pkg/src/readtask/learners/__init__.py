from .scaler import (
    ScalerParams,
    apply_scaler,
    apply_sequence_scaler,
    fit_scaler,
    fit_sequence_scaler,
)
from .svm import (
    LinearSvmModel,
    decision_values,
    load_svm,
    predict,
    save_svm,
    svm_objective,
    train_svm,
)
from .lstm import (
    BiLstmModel,
    LstmHyperParams,
    TrainingHistory,
    batch_loss_and_grads,
    forward_logits,
    init_params,
    load_bilstm,
    pad_sequences,
    predict_bilstm,
    save_bilstm,
    train_bilstm,
)

__all__ = [
    "BiLstmModel",
    "LinearSvmModel",
    "LstmHyperParams",
    "ScalerParams",
    "TrainingHistory",
    "apply_scaler",
    "apply_sequence_scaler",
    "batch_loss_and_grads",
    "decision_values",
    "fit_scaler",
    "fit_sequence_scaler",
    "forward_logits",
    "init_params",
    "load_bilstm",
    "load_svm",
    "pad_sequences",
    "predict",
    "predict_bilstm",
    "save_bilstm",
    "save_svm",
    "svm_objective",
    "train_bilstm",
    "train_svm",
]
