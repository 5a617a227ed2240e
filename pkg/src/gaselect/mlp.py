"""Three-layer perceptron (input, one sigmoid hidden layer, two sigmoid outputs).

Output node 0 stands for Tumor and node 1 for Normal, matching the integer
label codes in :mod:`gaselect.dataset`. Training is per-sample stochastic
gradient descent on ``E = 0.5 * sum_k (t_k - o_k)**2`` with one-hot targets.

The epoch loop is compiled with numba; :func:`loss_gradients` and
:func:`sgd_step` are plain numpy versions of the same arithmetic, kept for
gradient checking and as the reference the compiled loop is tested against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numba
import numpy as np

from .dataset import NORMAL, TUMOR, ExpressionDataset
from .errors import ConfigError, DimensionError, EmptyInputError, StateError

N_OUTPUTS = 2
MODEL_SCHEMA = 1


@dataclass(frozen=True)
class MlpLayout:
    n_inputs: int
    n_hidden: int
    n_outputs: int = N_OUTPUTS

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_hidden < 1:
            raise ConfigError(f"invalid layout {self}")
        if self.n_outputs != N_OUTPUTS:
            raise ConfigError("the output layer has exactly two nodes (Tumor, Normal)")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    max_epochs: int = 60
    error_goal: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if not self.error_goal > 0:
            raise ConfigError("error_goal must be positive")


@dataclass(eq=False)
class MlpModel:
    layout: MlpLayout
    hidden_weights: np.ndarray  # (n_hidden, n_inputs)
    hidden_biases: np.ndarray  # (n_hidden,)
    output_weights: np.ndarray  # (2, n_hidden)
    output_biases: np.ndarray  # (2,)

    def __post_init__(self):
        L = self.layout
        shapes = {
            "hidden_weights": (L.n_hidden, L.n_inputs),
            "hidden_biases": (L.n_hidden,),
            "output_weights": (L.n_outputs, L.n_hidden),
            "output_biases": (L.n_outputs,),
        }
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.layout,
            self.hidden_weights.copy(),
            self.hidden_biases.copy(),
            self.output_weights.copy(),
            self.output_biases.copy(),
        )

    def params(self):
        return self.hidden_weights, self.hidden_biases, self.output_weights, self.output_biases

    def to_dict(self) -> dict:
        """JSON-ready snapshot; weight matrices flattened row-major."""
        L = self.layout
        return {
            "schema": MODEL_SCHEMA,
            "layout": {"n_inputs": L.n_inputs, "n_hidden": L.n_hidden, "n_outputs": L.n_outputs},
            "hidden_weights": self.hidden_weights.ravel(order="C").tolist(),
            "hidden_biases": self.hidden_biases.tolist(),
            "output_weights": self.output_weights.ravel(order="C").tolist(),
            "output_biases": self.output_biases.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MlpModel":
        if doc.get("schema") != MODEL_SCHEMA:
            raise ConfigError(f"unsupported model schema {doc.get('schema')!r}")
        L = MlpLayout(**doc["layout"])
        return cls(
            L,
            np.asarray(doc["hidden_weights"]).reshape(L.n_hidden, L.n_inputs),
            np.asarray(doc["hidden_biases"]),
            np.asarray(doc["output_weights"]).reshape(L.n_outputs, L.n_hidden),
            np.asarray(doc["output_biases"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MlpModel":
        return cls.from_dict(json.loads(text))


def sigmoid(z):
    # two-branch form avoids overflow in exp for large |z|
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_model(layout: MlpLayout, seed: int) -> MlpModel:
    """Uniform weights in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``, zero biases."""
    rng = np.random.default_rng(seed)
    a = 1.0 / np.sqrt(layout.n_inputs)
    b = 1.0 / np.sqrt(layout.n_hidden)
    W = rng.uniform(-a, a, size=(layout.n_hidden, layout.n_inputs))
    V = rng.uniform(-b, b, size=(layout.n_outputs, layout.n_hidden))
    return MlpModel(layout, W, np.zeros(layout.n_hidden), V, np.zeros(layout.n_outputs))


def _check_input(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (model.layout.n_inputs,) or x.ndim > 2:
        raise DimensionError(
            f"input shape {x.shape} does not match n_inputs={model.layout.n_inputs}"
        )
    return x


def forward(model: MlpModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(hidden_activations, outputs)`` for one input vector or a batch of rows."""
    x = _check_input(model, x)
    W, b, V, c = model.params()
    h = sigmoid(x @ W.T + b)
    o = sigmoid(h @ V.T + c)
    return h, o


def predict(model: MlpModel, x) -> int:
    """Class code of the larger output; an exact tie goes to Tumor."""
    x = _check_input(model, x)
    if x.ndim != 1:
        raise DimensionError("predict takes a single input vector; use predict_batch")
    _, o = forward(model, x)
    return label_from_outputs(o)


def label_from_outputs(o) -> int:
    return TUMOR if o[TUMOR] >= o[NORMAL] else NORMAL


def predict_batch(model: MlpModel, X) -> np.ndarray:
    _, o = forward(model, np.atleast_2d(X))
    return np.where(o[:, TUMOR] >= o[:, NORMAL], TUMOR, NORMAL)


def one_hot(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    T = np.zeros((labels.size, N_OUTPUTS))
    T[np.arange(labels.size), labels] = 1.0
    return T


def sample_loss(model: MlpModel, x, t) -> float:
    _, o = forward(model, x)
    return 0.5 * float(np.sum((np.asarray(t) - o) ** 2))


def mean_squared_error(model: MlpModel, data: ExpressionDataset) -> float:
    """Mean over samples of ``0.5 * sum_k (t_k - o_k)**2``."""
    if data.n_samples == 0:
        raise EmptyInputError("empty dataset")
    if not data.is_labeled:
        raise StateError("dataset has no labels")
    _, o = forward(model, data.values)
    return float(np.mean(0.5 * np.sum((one_hot(data.labels) - o) ** 2, axis=1)))


def loss_gradients(model: MlpModel, x, t) -> tuple[np.ndarray, ...]:
    """Backprop gradients of the single-sample loss, same order as ``model.params()``."""
    x = _check_input(model, x)
    t = np.asarray(t, dtype=np.float64)
    W, b, V, c = model.params()
    h, o = forward(model, x)
    d_out = (o - t) * o * (1.0 - o)
    d_hid = (V.T @ d_out) * h * (1.0 - h)
    return np.outer(d_hid, x), d_hid, np.outer(d_out, h), d_out


def sgd_step(model: MlpModel, x, t, learning_rate: float) -> MlpModel:
    """One gradient step on one sample; returns a new model."""
    grads = loss_gradients(model, x, t)
    new = model.copy()
    for p, g in zip(new.params(), grads):
        p -= learning_rate * g
    return new


@numba.njit(cache=True)
def _sig(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


@numba.njit(cache=True)
def _sgd_epochs(W, b, V, c, X, T, orders, lr, goal, history):
    """Mutates W, b, V, c in place; returns the number of epochs run."""
    H = W.shape[0]
    d = X.shape[1]
    h = np.empty(H)
    o = np.empty(2)
    d_out = np.empty(2)
    d_hid = np.empty(H)
    n = orders.shape[1]
    for epoch in range(orders.shape[0]):
        total = 0.0
        for s in orders[epoch]:
            for j in range(H):
                z = b[j]
                for i in range(d):
                    z += W[j, i] * X[s, i]
                h[j] = _sig(z)
            for k in range(2):
                z = c[k]
                for j in range(H):
                    z += V[k, j] * h[j]
                o[k] = _sig(z)
                diff = o[k] - T[s, k]
                total += 0.5 * diff * diff
                d_out[k] = diff * o[k] * (1.0 - o[k])
            for j in range(H):
                d_hid[j] = (V[0, j] * d_out[0] + V[1, j] * d_out[1]) * h[j] * (1.0 - h[j])
            for k in range(2):
                for j in range(H):
                    V[k, j] -= lr * d_out[k] * h[j]
                c[k] -= lr * d_out[k]
            for j in range(H):
                for i in range(d):
                    W[j, i] -= lr * d_hid[j] * X[s, i]
                b[j] -= lr * d_hid[j]
        err = total / n
        history[epoch] = err
        if err <= goal:
            return epoch + 1
    return orders.shape[0]


def train(model: MlpModel, data: ExpressionDataset, cfg: TrainConfig) -> tuple[MlpModel, list]:
    """Train a copy of ``model`` by per-sample SGD.

    Sample order is reshuffled every epoch from ``cfg.seed``. The epoch error
    is the mean of the per-sample losses seen during that epoch (each measured
    just before its own update); training stops once it reaches
    ``cfg.error_goal`` or after ``cfg.max_epochs`` epochs.
    """
    if data.n_samples == 0:
        raise EmptyInputError("empty training set")
    if not data.scaled:
        raise StateError("training data must be scaled to [-1, 1] first")
    if not data.is_labeled:
        raise StateError("training data has no labels")
    if data.n_genes != model.layout.n_inputs:
        raise DimensionError(
            f"data has {data.n_genes} genes, model expects {model.layout.n_inputs} inputs"
        )
    return train_arrays(model, data.values, data.labels, cfg)


def train_arrays(model: MlpModel, X: np.ndarray, y: np.ndarray, cfg: TrainConfig):
    """Array-level core of :func:`train` with no dataset checks."""
    rng = np.random.default_rng(cfg.seed)
    n = X.shape[0]
    orders = rng.permuted(np.tile(np.arange(n, dtype=np.int64), (cfg.max_epochs, 1)), axis=1)
    out = model.copy()
    history = np.empty(cfg.max_epochs)
    n_epochs = _sgd_epochs(
        *out.params(),
        np.ascontiguousarray(X, dtype=np.float64),
        one_hot(y),
        orders,
        float(cfg.learning_rate),
        float(cfg.error_goal),
        history,
    )
    return out, history[:n_epochs].tolist()
