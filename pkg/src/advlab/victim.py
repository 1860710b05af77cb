"""Victim distributions: a classifier plus target class wrapped as a Gibbs
energy, and the rank/success metrics used to score attacks.

The victim density is proportional to exp(-c * f(x, y_tar)) where f is the
classifier's cross-entropy against the target class. Only the energy
c * f and its input gradient are ever needed; the (intractable) normalizer
is never computed, which is safe everywhere it appears because the callers
only use energy differences.
"""

from __future__ import annotations

import numpy as np

from .netgrad import Classifier
from .numerics import as_state


class VictimDistribution:
    """exp(-c * cross_entropy(x, target)) up to normalization."""

    def __init__(self, model: Classifier, target: int, c: float = 1.0):
        if not 0 <= int(target) < model.n_classes:
            raise ValueError(f"target class {target} out of range")
        if c <= 0:
            raise ValueError("energy scale c must be positive")
        self.model = model
        self.target = int(target)
        self.c = float(c)

    @property
    def dim(self) -> int:
        return self.model.input_dim

    def energy(self, x):
        """c * f(x, y_tar) = -c * log p(y_tar | x); nonnegative, batch-aware."""
        return self.c * self.model.loss(x, self.target)

    def energy_grad(self, x) -> np.ndarray:
        _, grad = self.model.loss_and_input_grad(x, self.target)
        return self.c * grad

    def target_prob(self, x):
        """Raw softmax probability of the target class (independent of c)."""
        return np.exp(self.model.log_softmax(x)[..., self.target])


class QuadraticVictim:
    """Victim stand-in whose energy is an exact isotropic quadratic.

    Its implied Gibbs density is N(mean, variance * I), which gives
    closed-form ground truth for calibrating samplers and estimators.
    """

    def __init__(self, mean, variance: float):
        self.mean = np.asarray(mean, dtype=np.float64)
        if variance <= 0:
            raise ValueError("variance must be positive")
        self.variance = float(variance)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def energy(self, x):
        x = as_state(x, self.dim)
        return np.sum((x - self.mean) ** 2, axis=-1) / (2.0 * self.variance)

    def energy_grad(self, x) -> np.ndarray:
        return (as_state(x, self.dim) - self.mean) / self.variance


class ConstantVictim:
    """Victim with flat energy: contributes nothing to drifts or differences."""

    def __init__(self, value: float = 0.0, dim: int | None = None):
        self.value = float(value)
        self.dim = dim

    def energy(self, x):
        x = as_state(x, self.dim)
        return np.full(x.shape[:-1], self.value) if x.ndim > 1 else self.value

    def energy_grad(self, x) -> np.ndarray:
        return np.zeros_like(as_state(x, self.dim))


def target_rank(model: Classifier, x, y_tar: int) -> int:
    """1 + number of classes with strictly greater logit (ties do not hurt)."""
    if not 0 <= int(y_tar) < model.n_classes:
        raise ValueError(f"target class {y_tar} out of range")
    z = model.logits(as_state(x, model.input_dim))
    if z.ndim != 1:
        raise ValueError("target_rank expects a single state vector")
    return int(1 + np.sum(z > z[int(y_tar)]))


def topk_success(model: Classifier, x, y_tar: int, k: int) -> bool:
    if not 1 <= int(k) <= model.n_classes:
        raise ValueError(f"k must lie in [1, {model.n_classes}]")
    return target_rank(model, x, y_tar) <= int(k)
