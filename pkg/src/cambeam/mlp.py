"""From-scratch offset regressor: three dense layers with LayerNorm, ReLU
and dropout, trained with Smooth-L1 loss and Adam.

Implemented directly in numpy (no autograd) so the analytic gradients can be
verified against finite differences, and so model files stay dependency-free.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ModelNotReady, ShapeError

_LN_EPS = 1e-5
MODEL_FORMAT_VERSION = 1

DEFAULT_FEATURE_SCHEMA = (
    "b_pred_norm", "offset_lag1", "offset_lag2", "offset_lag3", "angular_rate_deg_s",
)

# parameter names per dense/layernorm block
_PARAM_KEYS = ("W1", "b1", "g1", "c1", "W2", "b2", "g2", "c2", "W3", "b3")


@dataclass
class MlpModel:
    """Weights plus the hyperparameters needed to reproduce inference."""

    layer_dims: tuple[int, int, int]  # (in, hidden1, hidden2); output is scalar
    dropout_p: float
    params: dict[str, np.ndarray]
    feature_schema: tuple[str, ...] = DEFAULT_FEATURE_SCHEMA
    loss_curve: list[float] = field(default_factory=list)
    trained: bool = False

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]


def init_model(layer_dims: tuple[int, int, int], dropout_p: float,
               seed: int, feature_schema: tuple[str, ...] = DEFAULT_FEATURE_SCHEMA) -> MlpModel:
    d_in, h1, h2 = layer_dims
    rng = np.random.default_rng(seed)

    def dense(n_in, n_out):
        # He init for the ReLU blocks
        return rng.standard_normal((n_in, n_out)) * math.sqrt(2.0 / n_in)

    params = {
        "W1": dense(d_in, h1), "b1": np.zeros(h1),
        "g1": np.ones(h1), "c1": np.zeros(h1),
        "W2": dense(h1, h2), "b2": np.zeros(h2),
        "g2": np.ones(h2), "c2": np.zeros(h2),
        "W3": dense(h2, 1), "b3": np.zeros(1),
    }
    return MlpModel(tuple(layer_dims), dropout_p, params, tuple(feature_schema))


def _layernorm_forward(x: np.ndarray, g: np.ndarray, c: np.ndarray):
    mu = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv
    return g * xhat + c, (xhat, inv)


def _layernorm_backward(dy: np.ndarray, g: np.ndarray, cache):
    xhat, inv = cache
    n = xhat.shape[1]
    dg = (dy * xhat).sum(axis=0)
    dc = dy.sum(axis=0)
    dxhat = dy * g
    dx = inv / n * (n * dxhat - dxhat.sum(axis=1, keepdims=True)
                    - xhat * (dxhat * xhat).sum(axis=1, keepdims=True))
    return dx, dg, dc


def forward(model: MlpModel, x: np.ndarray, dropout_masks=None,
            return_cache: bool = False):
    """Batched forward pass. Dropout is applied only when masks are given;
    inference is deterministic."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.input_dim:
        raise ShapeError(f"expected {model.input_dim} features, got {x.shape[1]}")
    p = model.params
    z1 = x @ p["W1"] + p["b1"]
    n1, ln1 = _layernorm_forward(z1, p["g1"], p["c1"])
    a1 = np.maximum(n1, 0.0)
    d1 = a1 if dropout_masks is None else a1 * dropout_masks[0]
    z2 = d1 @ p["W2"] + p["b2"]
    n2, ln2 = _layernorm_forward(z2, p["g2"], p["c2"])
    a2 = np.maximum(n2, 0.0)
    d2 = a2 if dropout_masks is None else a2 * dropout_masks[1]
    out = (d2 @ p["W3"] + p["b3"])[:, 0]
    if not return_cache:
        return out
    cache = (x, n1, ln1, a1, d1, n2, ln2, a2, d2)
    return out, cache


def smooth_l1(residual: np.ndarray, beta: float = 1.0):
    """Per-sample Smooth-L1 loss and its derivative w.r.t. the residual."""
    a = np.abs(residual)
    loss = np.where(a < beta, 0.5 * residual**2 / beta, a - 0.5 * beta)
    grad = np.where(a < beta, residual / beta, np.sign(residual))
    return loss, grad


def loss_and_gradients(model: MlpModel, x: np.ndarray, target: np.ndarray,
                       dropout_masks=None):
    """Mean Smooth-L1 loss over the batch plus gradients for every parameter."""
    target = np.asarray(target, dtype=float).reshape(-1)
    out, cache = forward(model, x, dropout_masks, return_cache=True)
    if out.shape != target.shape:
        raise ShapeError("target length does not match batch size")
    x2d, n1, ln1, a1, d1, n2, ln2, a2, d2 = cache
    p = model.params
    m = len(target)
    losses, dres = smooth_l1(out - target)
    loss = float(losses.mean())

    dout = (dres / m)[:, None]  # (m, 1)
    grads = {"W3": d2.T @ dout, "b3": dout.sum(axis=0)}
    dd2 = dout @ p["W3"].T
    da2 = dd2 if dropout_masks is None else dd2 * dropout_masks[1]
    dn2 = da2 * (n2 > 0)
    dz2, grads["g2"], grads["c2"] = _layernorm_backward(dn2, p["g2"], ln2)
    grads["W2"] = d1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    dd1 = dz2 @ p["W2"].T
    da1 = dd1 if dropout_masks is None else dd1 * dropout_masks[0]
    dn1 = da1 * (n1 > 0)
    dz1, grads["g1"], grads["c1"] = _layernorm_backward(dn1, p["g1"], ln1)
    grads["W1"] = x2d.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


def mlp_forward(features: np.ndarray, model: MlpModel) -> float:
    """Single-sample inference (dropout off)."""
    if not model.trained:
        raise ModelNotReady("model has not been trained or loaded")
    return float(forward(model, np.asarray(features, dtype=float).reshape(1, -1))[0])


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 200
    batch: int = 32
    dropout_p: float = 0.1
    seed: int = 0
    hidden: tuple[int, int] = (32, 32)


def train_mlp(dataset: list[tuple[np.ndarray, float]], hyper: TrainConfig) -> MlpModel:
    """Adam on Smooth-L1; deterministic given hyper.seed."""
    if not dataset:
        raise ConfigError("training dataset is empty")
    x = np.stack([np.asarray(f, dtype=float) for f, _ in dataset])
    y = np.array([t for _, t in dataset], dtype=float)
    d_in = x.shape[1]
    model = init_model((d_in, *hyper.hidden), hyper.dropout_p, hyper.seed)
    rng = np.random.default_rng(hyper.seed + 1)

    mstate = {k: np.zeros_like(v) for k, v in model.params.items()}
    vstate = {k: np.zeros_like(v) for k, v in model.params.items()}
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    keep = 1.0 - hyper.dropout_p
    for _ in range(hyper.epochs):
        order = rng.permutation(len(y))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(y), hyper.batch):
            idx = order[start:start + hyper.batch]
            xb, yb = x[idx], y[idx]
            masks = None
            if hyper.dropout_p > 0.0:
                masks = tuple(
                    (rng.random((len(idx), h)) < keep).astype(float) / keep
                    for h in hyper.hidden
                )
            loss, grads = loss_and_gradients(model, xb, yb, masks)
            step += 1
            for k in _PARAM_KEYS:
                g = grads[k].reshape(model.params[k].shape)
                mstate[k] = b1 * mstate[k] + (1 - b1) * g
                vstate[k] = b2 * vstate[k] + (1 - b2) * g * g
                mhat = mstate[k] / (1 - b1**step)
                vhat = vstate[k] / (1 - b2**step)
                model.params[k] -= hyper.lr * mhat / (np.sqrt(vhat) + eps)
            epoch_loss += loss
            n_batches += 1
        model.loss_curve.append(epoch_loss / n_batches)
    model.trained = True
    return model


def save_model(model: MlpModel, path: str) -> None:
    """Versioned JSON weight file; floats round-trip exactly."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_dims": list(model.layer_dims),
        "dropout_p": model.dropout_p,
        "feature_schema": list(model.feature_schema),
        "params": {k: v.tolist() for k, v in model.params.items()},
        "loss_curve": model.loss_curve,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path: str) -> MlpModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model format version {doc.get('format_version')}")
    params = {k: np.array(v, dtype=float) for k, v in doc["params"].items()}
    model = MlpModel(tuple(doc["layer_dims"]), doc["dropout_p"], params,
                     tuple(doc["feature_schema"]), list(doc.get("loss_curve", [])),
                     trained=True)
    return model
