"""Bidirectional LSTM sequence classifier, implemented directly on numpy.

Architecture: forward and backward LSTM stacks (hidden 64 each by
default), readout = concat(last valid forward state, first valid backward
state), a tanh dense layer (64), and a softmax output head trained with
cross-entropy. Sequences are padded with zero vectors plus a validity
mask; masked steps carry the hidden and cell states through unchanged, so
the readout and every gradient are invariant to the amount of padding.

Training: Adam (default moments) at learning rate 0.001, batch 40, up to
200 epochs with early stopping on validation accuracy (patience 104,
min delta 1e-7 — kept verbatim even though such a large patience rarely
triggers), 10% of the training data held out for validation. The model
returned is the one with the best validation accuracy. Deterministic for
a fixed seed.

Backpropagation through time is hand-rolled; ``batch_loss_and_grads``
exposes the exact loss/gradient computation so tests can compare every
parameter gradient against central finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import SCHEMA_VERSION
from ..errors import ParameterError, SchemaVersionError
from ..seeding import derived_rng

PARAM_NAMES = (
    "fwd_Wx", "fwd_Wh", "fwd_b",
    "bwd_Wx", "bwd_Wh", "bwd_b",
    "dense_W", "dense_b",
    "out_W", "out_b",
)


@dataclass(frozen=True)
class LstmHyperParams:
    hidden_size: int = 64
    dense_size: int = 64
    learning_rate: float = 0.001
    batch_size: int = 40
    max_epochs: int = 200
    patience: int = 104
    min_delta: float = 1e-7
    validation_fraction: float = 0.1

    def check(self) -> None:
        if min(self.hidden_size, self.dense_size, self.batch_size,
               self.max_epochs, self.patience) <= 0:
            raise ParameterError("LSTM sizes, batch, epochs, patience must be > 0")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ParameterError("validation_fraction must be in (0, 1)")


@dataclass
class BiLstmModel:
    classes: list[str]
    input_dim: int
    hyper: LstmHyperParams
    params: dict[str, np.ndarray]

    @property
    def n_outputs(self) -> int:
        return int(self.params["out_b"].shape[0])


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_val_accuracy: float = float("nan")
    epochs_run: int = 0


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_params(input_dim: int, hidden: int, dense: int, n_out: int,
                rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases, forget-gate bias +1."""

    def glorot(n_in, n_out_):
        limit = np.sqrt(6.0 / (n_in + n_out_))
        return rng.uniform(-limit, limit, size=(n_in, n_out_))

    params = {}
    for prefix in ("fwd", "bwd"):
        params[f"{prefix}_Wx"] = glorot(input_dim, 4 * hidden)
        params[f"{prefix}_Wh"] = glorot(hidden, 4 * hidden)
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = 1.0  # forget gate
        params[f"{prefix}_b"] = b
    params["dense_W"] = glorot(2 * hidden, dense)
    params["dense_b"] = np.zeros(dense)
    params["out_W"] = glorot(dense, n_out)
    params["out_b"] = np.zeros(n_out)
    return params


def pad_sequences(sequences: list[np.ndarray],
                  length: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Zero-pad to a common length; returns (X (B,T,d), mask (B,T))."""
    if not sequences:
        raise ParameterError("no sequences to pad")
    max_len = length if length is not None else max(s.shape[0] for s in sequences)
    dim = sequences[0].shape[1]
    X = np.zeros((len(sequences), max_len, dim))
    mask = np.zeros((len(sequences), max_len))
    for i, seq in enumerate(sequences):
        t = seq.shape[0]
        if t > max_len:
            raise ParameterError(f"sequence of length {t} exceeds pad length {max_len}")
        X[i, :t] = seq
        mask[i, :t] = 1.0
    return X, mask


def _run_direction(X, mask, Wx, Wh, b, reverse: bool):
    batch, steps, _ = X.shape
    hidden = Wh.shape[0]
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    cache = []
    for t in order:
        x_t = X[:, t]
        m = mask[:, t][:, None]
        z = x_t @ Wx + h @ Wh + b
        i = _sigmoid(z[:, :hidden])
        f = _sigmoid(z[:, hidden:2 * hidden])
        g = np.tanh(z[:, 2 * hidden:3 * hidden])
        o = _sigmoid(z[:, 3 * hidden:])
        c_cand = f * c + i * g
        tanh_c = np.tanh(c_cand)
        h_cand = o * tanh_c
        cache.append((x_t, h, c, i, f, g, o, c_cand, tanh_c, m))
        c = m * c_cand + (1.0 - m) * c
        h = m * h_cand + (1.0 - m) * h
    return h, cache


def _direction_grads(d_h_final, cache, Wx, Wh):
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(Wx.shape[1])
    hidden = Wh.shape[0]
    dh = d_h_final
    dc = np.zeros_like(d_h_final)
    for x_t, h_prev, c_prev, i, f, g, o, c_cand, tanh_c, m in reversed(cache):
        dh_cand = m * dh
        dh_pass = (1.0 - m) * dh
        do = dh_cand * tanh_c
        dc_cand = dh_cand * o * (1.0 - tanh_c ** 2) + m * dc
        dc_pass = (1.0 - m) * dc
        di = dc_cand * g
        df = dc_cand * c_prev
        dg = dc_cand * i
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ], axis=1)
        dWx += x_t.T @ dz
        dWh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dh = dz @ Wh.T + dh_pass
        dc = dc_cand * f + dc_pass
    return dWx, dWh, db


def forward_logits(params: dict[str, np.ndarray], X: np.ndarray,
                   mask: np.ndarray):
    """Logits plus the caches needed for backprop."""
    h_fwd, cache_fwd = _run_direction(
        X, mask, params["fwd_Wx"], params["fwd_Wh"], params["fwd_b"], False)
    h_bwd, cache_bwd = _run_direction(
        X, mask, params["bwd_Wx"], params["bwd_Wh"], params["bwd_b"], True)
    readout = np.concatenate([h_fwd, h_bwd], axis=1)
    pre_dense = readout @ params["dense_W"] + params["dense_b"]
    dense = np.tanh(pre_dense)
    logits = dense @ params["out_W"] + params["out_b"]
    return logits, (cache_fwd, cache_bwd, readout, dense)


def batch_loss_and_grads(params: dict[str, np.ndarray], X: np.ndarray,
                         mask: np.ndarray, targets: np.ndarray):
    """Mean softmax cross-entropy over the batch and gradients for every
    parameter; the reference implementation the finite-difference check
    runs against."""
    logits, (cache_fwd, cache_bwd, readout, dense) = forward_logits(params, X, mask)
    batch = X.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    loss = float(-np.mean(np.log(probs[np.arange(batch), targets] + 1e-300)))

    dlogits = probs.copy()
    dlogits[np.arange(batch), targets] -= 1.0
    dlogits /= batch

    grads = {}
    grads["out_W"] = dense.T @ dlogits
    grads["out_b"] = dlogits.sum(axis=0)
    ddense = dlogits @ params["out_W"].T
    dpre = ddense * (1.0 - dense ** 2)
    grads["dense_W"] = readout.T @ dpre
    grads["dense_b"] = dpre.sum(axis=0)
    dreadout = dpre @ params["dense_W"].T

    hidden = params["fwd_Wh"].shape[0]
    d_fwd = dreadout[:, :hidden]
    d_bwd = dreadout[:, hidden:]
    grads["fwd_Wx"], grads["fwd_Wh"], grads["fwd_b"] = _direction_grads(
        d_fwd, cache_fwd, params["fwd_Wx"], params["fwd_Wh"])
    grads["bwd_Wx"], grads["bwd_Wh"], grads["bwd_b"] = _direction_grads(
        d_bwd, cache_bwd, params["bwd_Wx"], params["bwd_Wh"])
    return loss, grads


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        lr_t = self.lr * np.sqrt(1.0 - self.beta2 ** self.t) / (
            1.0 - self.beta1 ** self.t)
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= lr_t * self.m[k] / (np.sqrt(self.v[k]) + self.eps)


def _stratified_validation_split(labels_idx: np.ndarray, fraction: float,
                                 rng: np.random.Generator):
    train_idx, val_idx = [], []
    for cls in np.unique(labels_idx):
        members = np.flatnonzero(labels_idx == cls)
        members = members[rng.permutation(len(members))]
        n_val = int(round(fraction * len(members)))
        if len(members) >= 2:
            n_val = max(1, min(n_val, len(members) - 1))
        else:
            n_val = 0
        val_idx.extend(members[:n_val])
        train_idx.extend(members[n_val:])
    return np.sort(np.array(train_idx, dtype=int)), np.sort(np.array(val_idx, dtype=int))


def train_bilstm(sequences: list[np.ndarray], labels: list[str],
                 hyper: LstmHyperParams | None = None, seed: int = 0,
                 return_history: bool = False):
    """Train on variable-length sequences; see the module docstring."""
    hyper = hyper or LstmHyperParams()
    hyper.check()
    if not sequences:
        raise ParameterError("empty dataset")
    if len(sequences) != len(labels):
        raise ParameterError("sequences and labels must align")

    classes = sorted(set(labels))
    n_out = max(2, len(classes))
    index = {c: k for k, c in enumerate(classes)}
    y = np.array([index[l] for l in labels])
    input_dim = sequences[0].shape[1]

    rng = derived_rng(seed, "bilstm")
    train_idx, val_idx = _stratified_validation_split(
        y, hyper.validation_fraction, rng)
    if val_idx.size == 0:  # singleton classes only: validate on train
        val_idx = train_idx
    X_train, mask_train = pad_sequences([sequences[i] for i in train_idx])
    y_train = y[train_idx]
    X_val, mask_val = pad_sequences([sequences[i] for i in val_idx])
    y_val = y[val_idx]

    params = init_params(input_dim, hyper.hidden_size, hyper.dense_size,
                         n_out, rng)
    optimizer = _Adam(params, hyper.learning_rate)
    history = TrainingHistory()
    best_params = {k: v.copy() for k, v in params.items()}
    best_acc = -np.inf
    wait = 0

    n_train = len(train_idx)
    for epoch in range(hyper.max_epochs):
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, hyper.batch_size):
            batch = order[start:start + hyper.batch_size]
            loss, grads = batch_loss_and_grads(
                params, X_train[batch], mask_train[batch], y_train[batch])
            optimizer.step(params, grads)
            epoch_loss += loss * len(batch)
        history.train_loss.append(epoch_loss / n_train)

        val_pred = _predict_indices(params, X_val, mask_val, len(classes))
        val_acc = float(np.mean(val_pred == y_val))
        history.val_accuracy.append(val_acc)
        history.epochs_run = epoch + 1
        if val_acc > best_acc + hyper.min_delta:
            best_acc = val_acc
            best_params = {k: v.copy() for k, v in params.items()}
            history.best_epoch = epoch
            wait = 0
        else:
            wait += 1
            if wait >= hyper.patience:
                break
    history.best_val_accuracy = best_acc

    model = BiLstmModel(classes=classes, input_dim=input_dim, hyper=hyper,
                        params=best_params)
    if return_history:
        return model, history
    return model


def _predict_indices(params, X, mask, n_classes: int) -> np.ndarray:
    logits, _ = forward_logits(params, X, mask)
    # argmax over the live classes only; first maximum wins ties, which is
    # the lexicographically smallest label under sorted classes
    return np.argmax(logits[:, :n_classes], axis=1)


def predict_bilstm(model: BiLstmModel, sequences: list[np.ndarray]) -> list[str]:
    if not sequences:
        return []
    if sequences[0].shape[1] != model.input_dim:
        raise ParameterError(
            f"sequence dimension {sequences[0].shape[1]} does not match "
            f"model input_dim {model.input_dim}"
        )
    X, mask = pad_sequences(sequences)
    idx = _predict_indices(model.params, X, mask, len(model.classes))
    return [model.classes[k] for k in idx]


def save_bilstm(model: BiLstmModel, path: str | Path) -> Path:
    path = Path(path)
    meta = {
        "format": "readtask-bilstm",
        "schema_version": SCHEMA_VERSION,
        "classes": model.classes,
        "input_dim": model.input_dim,
        "hyper": model.hyper.__dict__,
    }
    np.savez(path, __meta__=json.dumps(meta), **model.params)
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_bilstm(path: str | Path) -> BiLstmModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format") != "readtask-bilstm":
            raise SchemaVersionError(f"{path}: not a readtask BiLSTM file")
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"{path}: schema_version {meta.get('schema_version')} "
                f"unsupported (expected {SCHEMA_VERSION})"
            )
        params = {k: data[k] for k in data.files if k != "__meta__"}
    return BiLstmModel(
        classes=list(meta["classes"]),
        input_dim=int(meta["input_dim"]),
        hyper=LstmHyperParams(**meta["hyper"]),
        params=params,
    )
