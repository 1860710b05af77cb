"""Minimal fully connected classifier with exact gradients.

tanh hidden layers, linear output logits. Forward passes, the cross-entropy
loss, and analytic gradients with respect to both parameters (training) and
inputs (attack directions) are written out by hand so they can be checked
against finite differences. Weight matrices are stored as (fan_out, fan_in)
and applied as ``z = a @ W.T + b``; all entry points accept a single input
of shape (d,) or a batch of shape (n, d).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import GENERATOR_ID, RngStream, as_state


@dataclass
class LabeledDataset:
    """Points of shape (n, d) with integer class labels of shape (n,)."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels and points must have equal length")
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("labels must be non-negative class indices")

    def __len__(self):
        return self.points.shape[0]


class Classifier:
    """Immutable feedforward classifier: tanh hidden layers, linear logits."""

    def __init__(self, weights, biases, meta: dict | None = None):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias vector per weight matrix")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {i}: bias shape must match weight rows")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i}: incompatible with previous layer")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i}: non-finite parameters")
        self.meta = dict(meta or {})

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_classes(self) -> int:
        return self.weights[-1].shape[0]

    def logits(self, x) -> np.ndarray:
        """One logit per class; softmax of these defines p(y | x)."""
        a = as_state(x, self.input_dim)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if i < last:
                a = np.tanh(a)
        return a

    def log_softmax(self, x) -> np.ndarray:
        z = self.logits(x)
        zmax = np.max(z, axis=-1, keepdims=True)
        shifted = z - zmax
        return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))

    def softmax(self, x) -> np.ndarray:
        return np.exp(self.log_softmax(x))

    def loss(self, x, y) -> float | np.ndarray:
        """Cross-entropy -log p(y | x); batch-aware in x."""
        self._check_label(y)
        return -self.log_softmax(x)[..., y]

    def loss_and_input_grad(self, x, y):
        """Cross-entropy at a single point and its exact input gradient."""
        self._check_label(y)
        x = as_state(x, self.input_dim)
        if x.ndim != 1:
            raise ValueError("loss_and_input_grad expects a single state vector")

        last = len(self.weights) - 1
        acts = [x]
        a = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if i < last:
                a = np.tanh(a)
            acts.append(a)

        z = acts[-1]
        zmax = z.max()
        logp = (z - zmax) - np.log(np.exp(z - zmax).sum())
        loss = -logp[y]

        delta = np.exp(logp)
        delta[y] -= 1.0
        for i in range(last, -1, -1):
            grad_a = delta @ self.weights[i]
            if i > 0:
                delta = grad_a * (1.0 - acts[i] ** 2)
        return float(loss), grad_a

    def _check_label(self, y):
        if not 0 <= int(y) < self.n_classes:
            raise ValueError(f"class index {y} out of range [0, {self.n_classes})")


def init_classifier(sizes, rng: RngStream) -> Classifier:
    """Zero biases; weights uniform in [-a, a] with a = 1/sqrt(fan_in)."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("sizes must list at least input and output dimensions")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        a = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform((fan_out, fan_in)) * 2.0 * a - a)
        biases.append(np.zeros(fan_out))
    meta = {"generator": GENERATOR_ID, "seed": rng.seed, "stream_id": rng.stream_id}
    return Classifier(weights, biases, meta=meta)


def mean_loss(model: Classifier, data: LabeledDataset) -> float:
    logp = model.log_softmax(data.points)
    return float(-logp[np.arange(len(data)), data.labels].mean())


def accuracy(model: Classifier, data: LabeledDataset) -> float:
    pred = np.argmax(model.logits(data.points), axis=-1)
    return float(np.mean(pred == data.labels))


def _batch_grads(model: Classifier, X: np.ndarray, Y: np.ndarray):
    """Mean cross-entropy over the batch and its parameter gradients."""
    n = X.shape[0]
    last = len(model.weights) - 1
    acts = [X]
    a = X
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        a = a @ w.T + b
        if i < last:
            a = np.tanh(a)
        acts.append(a)

    z = acts[-1]
    zmax = z.max(axis=1, keepdims=True)
    logp = (z - zmax) - np.log(np.exp(z - zmax).sum(axis=1, keepdims=True))
    loss = float(-logp[np.arange(n), Y].mean())

    delta = np.exp(logp)
    delta[np.arange(n), Y] -= 1.0
    delta /= n
    grads_w, grads_b = [None] * (last + 1), [None] * (last + 1)
    for i in range(last, -1, -1):
        grads_w[i] = delta.T @ acts[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i]) * (1.0 - acts[i] ** 2)
    return loss, grads_w, grads_b


def train_classifier(
    data: LabeledDataset,
    sizes,
    epochs: int,
    learning_rate: float,
    rng: RngStream,
) -> Classifier:
    """Full-batch gradient descent on mean cross-entropy.

    Deterministic given the stream: the rng is consumed only by the
    initializer. epochs = 0 returns the untouched initialization.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if data.labels.max() >= sizes[-1]:
        raise ValueError("labels exceed the configured class count")
    if data.points.shape[1] != sizes[0]:
        raise ValueError("dataset dimension does not match input size")

    model = init_classifier(sizes, rng)
    for _ in range(int(epochs)):
        _, gw, gb = _batch_grads(model, data.points, data.labels)
        for i in range(len(model.weights)):
            model.weights[i] = model.weights[i] - learning_rate * gw[i]
            model.biases[i] = model.biases[i] - learning_rate * gb[i]
    return Classifier(model.weights, model.biases, meta=model.meta)


def finite_diff_check(model: Classifier, x, y, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference input grads.

    Relative error uses an absolute floor of 1e-12 so an exactly-zero
    gradient compares as error 0.
    """
    if h <= 0:
        raise ValueError("step size h must be positive")
    x = as_state(x, model.input_dim)
    _, grad = model.loss_and_input_grad(x, y)
    worst = 0.0
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        fd = (float(model.loss(x + step, y)) - float(model.loss(x - step, y))) / (2 * h)
        denom = max(abs(grad[i]), abs(fd), 1e-12)
        worst = max(worst, abs(grad[i] - fd) / denom)
    return worst


MODEL_FORMAT = "advlab-classifier-v1"


def save_model(model: Classifier, path, extra: dict | None = None) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "sizes": model.sizes,
        "weights": [w.reshape(-1).tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "generator": model.meta.get("generator", GENERATOR_ID),
        "seed": model.meta.get("seed"),
    }
    doc.update(extra or {})
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_model(path) -> Classifier:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {doc.get('format')!r}")
    sizes = doc["sizes"]
    weights = [
        np.asarray(flat, dtype=np.float64).reshape(fan_out, fan_in)
        for flat, fan_in, fan_out in zip(doc["weights"], sizes[:-1], sizes[1:])
    ]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
    meta = {"generator": doc.get("generator"), "seed": doc.get("seed")}
    return Classifier(weights, biases, meta=meta)
