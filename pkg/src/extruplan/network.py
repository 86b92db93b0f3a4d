"""Feedforward network for design retrieval, written out long-hand.

One hidden layer, sigmoid units, backpropagation with a momentum term,
trained in pattern mode: weights update after every training pair, in
dataset order, so training is order-dependent and exactly reproducible
from the seed. Gradients are verified against central finite differences
rather than trusted. Models serialize to JSON with weights as decimal
strings so a reload is bit-exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyDataset,
    NonFiniteLoss,
    NonPositiveInput,
    SchemaMismatch,
)

MODEL_SCHEMA = "extruplan-model"


def activate(v: np.ndarray | float, kind: str, theta: float = 0.0):
    """Unit activation: logistic sigmoid, or a hard threshold that fires
    1 when the drive reaches theta."""
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.asarray(v, dtype=np.float64)))
    if kind == "threshold":
        return np.where(np.asarray(v, dtype=np.float64) >= theta, 1.0, 0.0)
    raise ValueError(f"unknown activation kind {kind!r}")


@dataclass
class MLPModel:
    """170 -> H -> 93 network (sizes are generic; the codec fixes them).

    Unit thresholds are realized as trainable biases (b = -theta), so the
    affine drive is w @ x + b throughout.
    """

    w1: np.ndarray  # (hidden, n_in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_out, hidden)
    b2: np.ndarray  # (n_out,)
    hidden_activation: str = "sigmoid"
    output_activation: str = "sigmoid"
    metadata: dict = field(default_factory=dict)

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return (self.w1.shape[1], self.w1.shape[0], self.w2.shape[0])

    def __post_init__(self):
        n_in, hidden, n_out = self.layer_sizes
        if self.w1.shape != (hidden, n_in):
            raise DimensionMismatch(hidden * n_in, self.w1.size, "w1")
        if self.b1.shape != (hidden,):
            raise DimensionMismatch(hidden, self.b1.size, "b1")
        if self.w2.shape != (n_out, hidden):
            raise DimensionMismatch(n_out * hidden, self.w2.size, "w2")
        if self.b2.shape != (n_out,):
            raise DimensionMismatch(n_out, self.b2.size, "b2")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.7
    hidden_size: int = 5
    epochs: int = 500
    seed: int = 42
    init_range: float = 0.5
    threshold: float = 0.5
    shuffle: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise NonPositiveInput("learning_rate", self.learning_rate)
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.hidden_size < 1:
            raise ValueError(f"hidden_size must be >= 1, got {self.hidden_size}")


def init_model(n_in: int, n_out: int, cfg: TrainConfig) -> MLPModel:
    """Fresh model with uniform weights in +-init_range from the seed.

    Draw order (w1, b1, w2, b2) is part of the determinism contract."""
    rng = np.random.default_rng(cfg.seed)
    r = cfg.init_range
    h = cfg.hidden_size
    return MLPModel(
        w1=rng.uniform(-r, r, size=(h, n_in)),
        b1=rng.uniform(-r, r, size=h),
        w2=rng.uniform(-r, r, size=(n_out, h)),
        b2=rng.uniform(-r, r, size=n_out),
        metadata={"seed": cfg.seed, "hidden_size": h},
    )


def _as_input(model: MLPModel, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (model.layer_sizes[0],):
        raise DimensionMismatch(model.layer_sizes[0], arr.size, "input vector")
    return arr


def forward(model: MLPModel, x) -> np.ndarray:
    """Output activations for one input vector."""
    arr = _as_input(model, x)
    hidden = activate(model.w1 @ arr + model.b1, model.hidden_activation)
    return activate(model.w2 @ hidden + model.b2, model.output_activation)


def _forward_trace(model: MLPModel, x: np.ndarray):
    hidden = activate(model.w1 @ x + model.b1, model.hidden_activation)
    out = activate(model.w2 @ hidden + model.b2, model.output_activation)
    return hidden, out


def _backprop(model: MLPModel, x: np.ndarray, target: np.ndarray):
    """Analytic gradients of E = 1/2 sum (y - t)^2 for one pattern."""
    hidden, out = _forward_trace(model, x)
    delta_out = (out - target) * out * (1.0 - out)
    grad_w2 = np.outer(delta_out, hidden)
    grad_b2 = delta_out
    delta_hidden = (model.w2.T @ delta_out) * hidden * (1.0 - hidden)
    grad_w1 = np.outer(delta_hidden, x)
    grad_b1 = delta_hidden
    sq_err = float(np.sum((out - target) ** 2))
    return (grad_w1, grad_b1, grad_w2, grad_b2), sq_err


def train(
    model: MLPModel,
    dataset: list[tuple[np.ndarray, np.ndarray]],
    cfg: TrainConfig,
) -> tuple[MLPModel, list[float]]:
    """Train in place; returns the model and the per-epoch MSE history.

    Pattern mode: each pair triggers one update, delta_w = -lr * grad +
    momentum * previous delta_w, with the momentum memory carried across
    patterns and epochs. Pairs are visited in dataset order unless
    cfg.shuffle draws a permutation from the seeded generator, so equal
    seeds give bit-identical models. Epoch MSE is the running mean of
    squared errors measured at each pattern's pre-update forward pass.
    """
    if not dataset:
        raise EmptyDataset("training dataset is empty")
    if model.hidden_activation != "sigmoid" or model.output_activation != "sigmoid":
        raise ValueError("training requires sigmoid activations")
    n_in, _, n_out = model.layer_sizes
    pairs = []
    for x, t in dataset:
        xa = np.asarray(x, dtype=np.float64)
        ta = np.asarray(t, dtype=np.float64)
        if xa.shape != (n_in,):
            raise DimensionMismatch(n_in, xa.size, "input vector")
        if ta.shape != (n_out,):
            raise DimensionMismatch(n_out, ta.size, "target vector")
        pairs.append((xa, ta))

    rng = np.random.default_rng(cfg.seed)
    velocity = [np.zeros_like(p) for p in (model.w1, model.b1, model.w2, model.b2)]
    history: list[float] = []
    denom = len(pairs) * n_out
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pairs)) if cfg.shuffle else range(len(pairs))
        sq_err_sum = 0.0
        for i in order:
            x, t = pairs[i]
            grads, sq_err = _backprop(model, x, t)
            sq_err_sum += sq_err
            params = (model.w1, model.b1, model.w2, model.b2)
            for p, g, vel in zip(params, grads, velocity):
                vel *= cfg.momentum
                vel -= cfg.learning_rate * g
                p += vel
        mse = sq_err_sum / denom
        if not np.isfinite(mse):
            raise NonFiniteLoss(epoch)
        history.append(mse)
    model.metadata.update(
        {
            "seed": cfg.seed,
            "epochs": cfg.epochs,
            "learning_rate": cfg.learning_rate,
            "momentum": cfg.momentum,
            "final_mse": history[-1] if history else None,
        }
    )
    return model, history


def predict_binary(model: MLPModel, x, threshold: float = 0.5) -> np.ndarray:
    """Threshold the output activations into a 0/1 vector.

    The result can violate the output layout's one-hot invariants; the
    decoder downstream is responsible for validation."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    return (forward(model, x) >= threshold).astype(np.int64)


def gradient_check(model: MLPModel, sample: tuple, eps: float = 1e-5) -> float:
    """Max relative disagreement between analytic and central-difference
    gradients over every weight and bias, for one (input, target) pair."""
    if eps <= 0:
        raise NonPositiveInput("eps", eps)
    x = np.asarray(sample[0], dtype=np.float64)
    t = np.asarray(sample[1], dtype=np.float64)
    analytic, _ = _backprop(model, x, t)

    def loss() -> float:
        _, out = _forward_trace(model, x)
        return 0.5 * float(np.sum((out - t) ** 2))

    worst = 0.0
    params = (model.w1, model.b1, model.w2, model.b2)
    for p, grad in zip(params, analytic):
        flat_p = p.reshape(-1)
        flat_g = grad.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            up = loss()
            flat_p[i] = orig - eps
            down = loss()
            flat_p[i] = orig
            numeric = (up - down) / (2.0 * eps)
            a = flat_g[i]
            rel = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-12)
            worst = max(worst, rel)
    return worst


def _matrix_to_strings(arr: np.ndarray) -> list:
    if arr.ndim == 1:
        return [repr(float(v)) for v in arr]
    return [[repr(float(v)) for v in row] for row in arr]


def _matrix_from_strings(data: list, shape: tuple, name: str) -> np.ndarray:
    try:
        arr = np.asarray(
            [[float(v) for v in row] for row in data]
            if len(shape) == 2
            else [float(v) for v in data],
            dtype=np.float64,
        )
    except (TypeError, ValueError) as exc:
        raise SchemaMismatch(f"model field {name!r} is not a decimal array") from exc
    if arr.shape != shape:
        raise SchemaMismatch(f"model field {name!r} has shape {arr.shape}, expected {shape}")
    return arr


def save_model(model: MLPModel, path: str):
    """Write the model as JSON; weights as decimal strings that round-trip
    to the identical doubles."""
    doc = {
        "schema": MODEL_SCHEMA,
        "layer_sizes": list(model.layer_sizes),
        "hidden_activation": model.hidden_activation,
        "output_activation": model.output_activation,
        "weights": {
            "w1": _matrix_to_strings(model.w1),
            "b1": _matrix_to_strings(model.b1),
            "w2": _matrix_to_strings(model.w2),
            "b2": _matrix_to_strings(model.b2),
        },
        "metadata": model.metadata,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> MLPModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != MODEL_SCHEMA:
        raise SchemaMismatch("not a model file (missing schema marker)")
    sizes = doc.get("layer_sizes")
    if not isinstance(sizes, list) or len(sizes) != 3:
        raise SchemaMismatch("model layer_sizes must list [inputs, hidden, outputs]")
    n_in, hidden, n_out = sizes
    weights = doc.get("weights", {})
    return MLPModel(
        w1=_matrix_from_strings(weights.get("w1"), (hidden, n_in), "w1"),
        b1=_matrix_from_strings(weights.get("b1"), (hidden,), "b1"),
        w2=_matrix_from_strings(weights.get("w2"), (n_out, hidden), "w2"),
        b2=_matrix_from_strings(weights.get("b2"), (n_out,), "b2"),
        hidden_activation=doc.get("hidden_activation", "sigmoid"),
        output_activation=doc.get("output_activation", "sigmoid"),
        metadata=doc.get("metadata", {}),
    )
