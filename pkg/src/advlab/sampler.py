"""Projected Langevin dynamics over the Gibbs energy of a victim-times-distance
product, producing adversarial candidates.

The update is the unadjusted scheme
``x' = project(x + eta * (-grad E)(x) + sqrt(2 eta) * xi)`` with
``E(x) = -log p_dis(x) + vic_energy(x)`` and projection back to the unit box
after every step; no Metropolis correction is applied, so long-chain moments
carry an O(eta) discretization bias that the calibration tests budget for.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .numerics import RngStream, as_state, project_box

INIT_MODES = ("uniform-box", "concept-member", "fixed")


@dataclass(frozen=True)
class LangevinConfig:
    step_size: float = 1e-3
    steps: int = 200_000
    burn_in: int = 10_000
    thinning: int = 10
    init: str = "uniform-box"
    seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ConfigurationError("step_size must be positive")
        if self.steps < 1:
            raise ConfigurationError("steps must be >= 1")
        if not 0 <= self.burn_in < self.steps:
            raise ConfigurationError("burn_in must lie in [0, steps)")
        if not 1 <= self.thinning <= self.steps - self.burn_in:
            raise ConfigurationError("thinning must lie in [1, steps - burn_in]")
        if self.init not in INIT_MODES:
            raise ConfigurationError(f"init must be one of {INIT_MODES}")


class GibbsTarget:
    """Energy E(x) = -log p_dis(x) + vic_energy(x) of the product density."""

    def __init__(self, dist, vic):
        vic_dim = getattr(vic, "dim", None)
        if vic_dim is not None and vic_dim != dist.dim:
            raise ConfigurationError("distance and victim dimensions differ")
        self.dist = dist
        self.vic = vic

    @property
    def dim(self) -> int:
        return self.dist.dim

    def energy(self, x):
        return -self.dist.logpdf(x) + self.vic.energy(x)

    def drift(self, x) -> np.ndarray:
        """-grad E: distance score minus the victim energy gradient."""
        return self.dist.score(x) - self.vic.energy_grad(x)


def default_init_for(dist) -> str:
    """Concept-member starts for kernel mixtures, uniform box otherwise."""
    return "concept-member" if hasattr(dist, "centers") else "uniform-box"


def langevin_step(x, target: GibbsTarget, step_size: float, rng: RngStream) -> np.ndarray:
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    x = as_state(x, target.dim)
    noise = np.sqrt(2.0 * step_size) * rng.normal(x.shape[0])
    return project_box(x + step_size * target.drift(x) + noise)


def _initial_state(target: GibbsTarget, config: LangevinConfig, x0, rng: RngStream):
    if config.init == "fixed":
        if x0 is None:
            raise ConfigurationError("init='fixed' requires an explicit x0")
        return project_box(as_state(x0, target.dim))
    if x0 is not None:
        raise ConfigurationError(f"x0 given but init={config.init!r}")
    if config.init == "uniform-box":
        return rng.uniform(target.dim)
    centers = getattr(target.dist, "centers", None)
    if centers is None:
        raise ConfigurationError("init='concept-member' needs a mixture distance")
    return centers[int(rng.integers(centers.shape[0]))].copy()


def run_chain(
    target: GibbsTarget,
    config: LangevinConfig,
    x0=None,
    stream_id: int = 0,
) -> np.ndarray:
    """Run one chain; return the post-burn-in, thinned states as (n, d).

    Deterministic given (config.seed, stream_id): the stream drives the
    initial state and every noise draw.
    """
    rng = RngStream(config.seed, stream_id)
    x = _initial_state(target, config, x0, rng)
    eta = config.step_size
    scale = np.sqrt(2.0 * eta)
    dim = target.dim
    dist, vic = target.dist, target.vic

    kept = []
    for t in range(config.steps):
        drift = dist.score(x) - vic.energy_grad(x)
        x = project_box(x + eta * drift + scale * rng.normal(dim))
        if t >= config.burn_in and (t - config.burn_in) % config.thinning == 0:
            kept.append(x)
    return np.array(kept)


def write_chain_trace(path, target: GibbsTarget, samples: np.ndarray) -> None:
    """Dump kept states as CSV rows of step index, coordinates, energy."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    energies = target.energy(samples)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["step"] + [f"x{i}" for i in range(samples.shape[1])] + ["energy"])
        for i, (row, e) in enumerate(zip(samples, energies)):
            writer.writerow([i] + [repr(float(v)) for v in row] + [repr(float(e))])
