"""Distance distributions around a point or a concept.

Three exactly-normalized families, each exposing ``logpdf``, its gradient
``score``, and a reparameterized sampler driven by an explicit noise seed:

* isotropic Gaussian around a point,
* factorized Laplace around a point,
* Gaussian kernel mixture over the members of a concept.

Feeding the same :class:`NoiseSeed` to two distributions couples their
samples (common random numbers); mixtures share the component-selection
uniform so coupled mixtures pick matching components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp, ndtr, softmax

from .numerics import RngStream, as_state, in_box, project_box

LOG_2PI = float(np.log(2.0 * np.pi))
MIN_BANDWIDTH = 1e-3


@dataclass(frozen=True)
class Concept:
    """An identified object, represented by a set of in-box exemplar points."""

    id: str
    members: np.ndarray  # (K, d)

    def __post_init__(self):
        m = np.asarray(self.members, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ValueError("a concept needs a non-empty (K, d) member array")
        if not np.all(np.isfinite(m)):
            raise ValueError("concept members must be finite")
        if not in_box(m):
            raise ValueError("concept members must lie in [0, 1]^d")
        object.__setattr__(self, "members", m)

    @property
    def size(self) -> int:
        return self.members.shape[0]

    @property
    def dim(self) -> int:
        return self.members.shape[1]


@dataclass(frozen=True)
class NoiseSeed:
    """Shared noise for reparameterized sampling: one selector uniform in
    [0, 1) plus d standard-normal coordinates."""

    u: float
    z: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.u < 1.0:
            raise ValueError("selector u must lie in [0, 1)")
        object.__setattr__(self, "z", np.asarray(self.z, dtype=np.float64))


def sample_noise(dim: int, rng: RngStream) -> NoiseSeed:
    return NoiseSeed(u=float(rng.uniform()), z=rng.normal(dim))


class IsotropicGaussianDist:
    """N(mean, variance * I), exactly normalized."""

    normalized = True

    def __init__(self, mean, variance: float):
        self.mean = as_state(mean)
        if variance <= 0:
            raise ValueError("variance must be positive")
        self.variance = float(variance)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def stddev(self) -> float:
        return float(np.sqrt(self.variance))

    def logpdf(self, x):
        x = as_state(x, self.dim)
        sq = np.sum((x - self.mean) ** 2, axis=-1)
        return -0.5 * self.dim * (LOG_2PI + np.log(self.variance)) - sq / (2.0 * self.variance)

    def score(self, x) -> np.ndarray:
        return -(as_state(x, self.dim) - self.mean) / self.variance

    def reparam(self, u, z) -> np.ndarray:
        del u  # no component choice to make
        return self.mean + self.stddev * np.asarray(z, dtype=np.float64)


class LaplaceDist:
    """Factorized Laplace: independent per-coordinate scale b around a center."""

    normalized = True

    def __init__(self, center, scale: float):
        self.center = as_state(center)
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def stddev(self) -> float:
        return float(np.sqrt(2.0) * self.scale)

    def logpdf(self, x):
        x = as_state(x, self.dim)
        dev = np.abs(x - self.center)
        return -self.dim * np.log(2.0 * self.scale) - np.sum(dev, axis=-1) / self.scale

    def score(self, x) -> np.ndarray:
        # Subgradient 0 at the kinks keeps the score bounded and symmetric.
        return -np.sign(as_state(x, self.dim) - self.center) / self.scale

    def reparam(self, u, z) -> np.ndarray:
        # Per-coordinate uniforms are derived from z through the normal CDF,
        # then pushed through the Laplace inverse CDF.
        del u
        w = ndtr(np.asarray(z, dtype=np.float64)) - 0.5
        return self.center - self.scale * np.sign(w) * np.log1p(-2.0 * np.abs(w))


class KdeDist:
    """Equal-weight Gaussian kernel mixture over concept members, shared
    isotropic bandwidth h; exactly normalized."""

    normalized = True

    def __init__(self, centers, bandwidth: float):
        c = np.asarray(centers, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("centers must be a non-empty (K, d) array")
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.centers = c
        self.bandwidth = float(bandwidth)

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def stddev(self) -> float:
        return self.bandwidth

    def _component_logpdfs(self, x) -> np.ndarray:
        x = as_state(x, self.dim)
        h2 = self.bandwidth**2
        sq = np.sum((x[..., None, :] - self.centers) ** 2, axis=-1)
        return -0.5 * self.dim * (LOG_2PI + np.log(h2)) - sq / (2.0 * h2)

    def logpdf(self, x):
        comp = self._component_logpdfs(x)
        return logsumexp(comp, axis=-1) - np.log(self.size)

    def score(self, x) -> np.ndarray:
        x = as_state(x, self.dim)
        resp = softmax(self._component_logpdfs(x), axis=-1)
        pull = (self.centers - x[..., None, :]) / self.bandwidth**2
        return np.sum(resp[..., None] * pull, axis=-2)

    def reparam(self, u, z) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        idx = np.minimum((u * self.size).astype(np.int64), self.size - 1)
        return self.centers[idx] + self.bandwidth * z


def reparam_sample(dist, eps: NoiseSeed) -> np.ndarray:
    """Push one noise seed through a distribution's generator."""
    if eps.z.shape[-1] != dist.dim:
        raise ValueError("noise dimension does not match the distribution")
    return dist.reparam(eps.u, eps.z)


def fit_concept_kde(concept: Concept, bandwidth="scott") -> KdeDist:
    """Kernel mixture over the members; bandwidth fixed or Scott-style.

    The Scott rule uses the mean per-coordinate population standard
    deviation scaled by K^(-1/(d+4)), floored at 1e-3 so singleton or
    zero-spread concepts stay non-degenerate.
    """
    if bandwidth == "scott":
        spread = float(np.mean(np.std(concept.members, axis=0)))
        h = spread * concept.size ** (-1.0 / (concept.dim + 4))
        h = max(h, MIN_BANDWIDTH)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("fixed bandwidth must be positive")
    return KdeDist(concept.members, h)


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + offset, used as a cheap augmentation transform."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=np.float64))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=np.float64))

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x) @ self.matrix.T + self.offset


def augment_concept(
    concept: Concept,
    n: int,
    jitter: float,
    transforms: list[AffineMap] | None,
    rng: RngStream,
) -> Concept:
    """Append n synthetic members: random member, random transform (identity
    when none are given), Gaussian jitter, then projection back to the box."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    transforms = list(transforms or [])
    new = []
    for _ in range(int(n)):
        x = concept.members[int(rng.integers(concept.size))]
        if transforms:
            x = transforms[int(rng.integers(len(transforms)))](x)
        if jitter > 0:
            x = x + jitter * rng.normal(concept.dim)
        new.append(project_box(x))
    if not new:
        return Concept(concept.id, concept.members)
    return Concept(concept.id, np.vstack([concept.members, np.array(new)]))


CONCEPT_FORMAT = "advlab-concept-v1"


def save_concept(concept: Concept, path, extra: dict | None = None) -> None:
    doc = {
        "format": CONCEPT_FORMAT,
        "id": concept.id,
        "dimension": concept.dim,
        "members": concept.members.reshape(-1).tolist(),
    }
    doc.update(extra or {})
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_concept(path) -> Concept:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CONCEPT_FORMAT:
        raise ValueError(f"unsupported concept format: {doc.get('format')!r}")
    d = int(doc["dimension"])
    members = np.asarray(doc["members"], dtype=np.float64).reshape(-1, d)
    return Concept(doc["id"], members)
