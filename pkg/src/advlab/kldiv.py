"""KL-divergence tooling: the 1-D Gaussian closed form, a variance-sweep
check of the KL-vs-variance monotonicity claim, a brute-force grid oracle,
and the Monte-Carlo estimator of the KL difference

    delta = KL(d1 || p_vic) - KL(d2 || p_vic)

evaluated through each distribution's reparameterized generator. The victim
normalizer cancels in the difference, so victims only need to expose an
energy; the distance distributions must be exactly normalized, and the
estimator refuses anything that is not.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .distributions import IsotropicGaussianDist
from .errors import ContractViolationError, OracleFailureError
from .numerics import RngStream


@dataclass(frozen=True)
class DeltaEstimate:
    """Monte-Carlo KL-difference estimate with its normal-theory error bar."""

    value: float
    std_err: float
    n: int
    crn: bool
    corrected: bool

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two samples")
        if not np.isfinite(self.std_err) or self.std_err < 0:
            raise ValueError("std_err must be finite and nonnegative")

    def interval95(self) -> tuple[float, float]:
        half = 1.96 * self.std_err
        return (self.value - half, self.value + half)


@dataclass(frozen=True)
class GridOracle:
    """Integration grid for brute-force KL in d <= 2."""

    lower: tuple
    upper: tuple
    resolution: int = 64

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower/upper must be equal-length vectors")
        if lo.shape[0] > 2:
            raise ValueError("grid oracle supports d <= 2 only")
        if not np.all(hi > lo):
            raise ValueError("upper bounds must exceed lower bounds")
        if self.resolution < 16:
            raise ValueError("resolution must be >= 16")
        object.__setattr__(self, "lower", tuple(float(v) for v in lo))
        object.__setattr__(self, "upper", tuple(float(v) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lower)


def padded_grid(dist, pad_sigmas: float = 8.0, resolution: int = 64) -> GridOracle:
    """Grid spanning the distribution's support padded by pad_sigmas * stddev."""
    centers = getattr(dist, "centers", None)
    if centers is None:
        point = getattr(dist, "mean", None)
        if point is None:
            point = dist.center
        centers = np.atleast_2d(point)
    pad = pad_sigmas * dist.stddev
    return GridOracle(
        lower=tuple(centers.min(axis=0) - pad),
        upper=tuple(centers.max(axis=0) + pad),
        resolution=resolution,
    )


def kl_gaussians_closed_form(p: IsotropicGaussianDist, q: IsotropicGaussianDist) -> float:
    """KL(p || q) for 1-D Gaussians."""
    if p.dim != 1 or q.dim != 1:
        raise ValueError("closed form implemented for 1-D Gaussians")
    vp, vq = p.variance, q.variance
    dm = float(p.mean[0] - q.mean[0])
    return float(0.5 * np.log(vq / vp) + (vp + dm * dm) / (2.0 * vq) - 0.5)


def _midpoints(grid: GridOracle, resolution: int):
    axes = []
    cell = 1.0
    for lo, hi in zip(grid.lower, grid.upper):
        h = (hi - lo) / resolution
        axes.append(lo + h * (np.arange(resolution) + 0.5))
        cell *= h
    if grid.dim == 1:
        pts = axes[0][:, None]
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=-1)
    return pts, cell


def _riemann_kl(p, q, grid: GridOracle, resolution: int) -> float:
    pts, cell = _midpoints(grid, resolution)
    lp = np.asarray(p.logpdf(pts), dtype=np.float64)
    lq = np.asarray(q.logpdf(pts), dtype=np.float64)
    w = np.exp(lp)
    integrand = np.where(w > 0.0, w * (lp - lq), 0.0)
    return float(integrand.sum() * cell)


def grid_kl_oracle(
    p,
    q,
    grid: GridOracle,
    tol: float = 1e-4,
    max_refinements: int = 6,
) -> float:
    """Midpoint Riemann sum of integral p log(p/q), refined until two successive
    resolutions agree within tol."""
    for d in (p, q):
        if not getattr(d, "normalized", False):
            raise ContractViolationError("grid oracle needs normalized densities")
    resolution = grid.resolution
    prev = _riemann_kl(p, q, grid, resolution)
    for _ in range(max_refinements):
        resolution *= 2
        cur = _riemann_kl(p, q, grid, resolution)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise OracleFailureError(f"grid KL did not converge below {tol}")


def grid_second_moment(p, mu: float, grid: GridOracle) -> float:
    """E_p[(X - mu)^2] for a 1-D density by midpoint quadrature."""
    if grid.dim != 1:
        raise ValueError("second-moment quadrature is 1-D")
    pts, cell = _midpoints(grid, grid.resolution * 8)
    w = np.exp(np.asarray(p.logpdf(pts), dtype=np.float64))
    return float(np.sum(w * (pts[:, 0] - mu) ** 2) * cell)


def kl_vs_variance_sweep(p, mu: float, var_grid, grid: GridOracle | None = None):
    """KL(p || N(mu, s2)) across a variance grid, plus the second-moment
    threshold below which the KL is guaranteed to be decreasing in s2.

    Gaussian p uses the closed form; anything else goes through the grid
    oracle (required in that case).
    """
    var_grid = [float(v) for v in var_grid]
    if any(v <= 0 for v in var_grid):
        raise ValueError("variance grid must be positive")
    gaussian = isinstance(p, IsotropicGaussianDist)
    if gaussian and p.dim != 1:
        raise ValueError("sweep is 1-D")
    if not gaussian and grid is None:
        raise ValueError("non-Gaussian p needs a GridOracle")

    values = []
    for s2 in var_grid:
        q = IsotropicGaussianDist([mu], s2)
        if gaussian:
            kl = kl_gaussians_closed_form(p, q)
        else:
            kl = grid_kl_oracle(p, q, grid)
        values.append((s2, kl))

    if gaussian:
        threshold = p.variance + float(p.mean[0] - mu) ** 2
    else:
        threshold = grid_second_moment(p, mu, grid)
    return values, threshold


def _require_normalized(dist, name: str):
    if not getattr(dist, "normalized", False):
        raise ContractViolationError(
            f"{name} must be an exactly normalized density; energies and "
            "unnormalized models are not admissible here"
        )


def estimate_delta(
    d1,
    d2,
    vic,
    n: int,
    rng: RngStream,
    crn: bool = True,
    p_share=None,
) -> DeltaEstimate:
    """Monte-Carlo estimate of KL(d1 || p_vic) - KL(d2 || p_vic).

    Per noise draw eps the term is
    [log d1(G1(eps)) + E_vic(G1(eps))] - [log d2(G2(eps)) + E_vic(G2(eps))],
    with the same eps driving both generators when crn is set. Supplying
    p_share subtracts log p_share(G1(eps)) - log p_share(G2(eps)) per draw,
    which cancels shared non-semantic mass without moving the mean when both
    generators load p_share equally in expectation.
    """
    if n < 2:
        raise ValueError("need n >= 2 samples")
    _require_normalized(d1, "d1")
    _require_normalized(d2, "d2")
    if p_share is not None:
        _require_normalized(p_share, "p_share")
    if d1.dim != d2.dim:
        raise ValueError("distance distributions must share a dimension")

    dim = d1.dim
    u1 = rng.uniform(n)
    z1 = rng.normal((n, dim))
    if crn:
        u2, z2 = u1, z1
    else:
        u2 = rng.uniform(n)
        z2 = rng.normal((n, dim))

    x1 = d1.reparam(u1, z1)
    x2 = d2.reparam(u2, z2)
    terms = (np.asarray(d1.logpdf(x1)) + np.asarray(vic.energy(x1))) - (
        np.asarray(d2.logpdf(x2)) + np.asarray(vic.energy(x2))
    )
    if p_share is not None:
        terms = terms - (np.asarray(p_share.logpdf(x1)) - np.asarray(p_share.logpdf(x2)))

    value = float(terms.mean())
    std_err = float(terms.std(ddof=1) / np.sqrt(n))
    return DeltaEstimate(
        value=value, std_err=std_err, n=int(n), crn=bool(crn),
        corrected=p_share is not None,
    )


DELTA_CSV_COLUMNS = ["concept_id", "target_class", "n", "crn", "corrected", "delta_hat", "std_err"]


def write_delta_csv(path, rows) -> None:
    """rows: iterables matching DELTA_CSV_COLUMNS."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(DELTA_CSV_COLUMNS)
        for row in rows:
            writer.writerow(list(row))
