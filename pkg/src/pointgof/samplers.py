"""Random generation of the non-Gibbs point processes.

Homogeneous Poisson, log-Gaussian Cox with exponential covariance
(field simulated on the cell-center grid of the window via dense
Cholesky factorization, points placed uniformly within cells), and
Matern cluster (parents on the dilated window, offspring uniform in a
ball).  Samplers are pure given (window, params, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import CubeWindow, PointPattern
from .rng import RngSeed

_TAG_POISSON = 101
_TAG_LGCP = 102
_TAG_MATERN = 103

#: jitter ladder for the field covariance factorization, relative to sigma2
LGCP_JITTER_START = 1e-10
LGCP_JITTER_MAX = 1e-6


def sample_poisson(window: CubeWindow, rho: float, seed: RngSeed) -> PointPattern:
    """Homogeneous Poisson process of intensity rho on the window."""
    if rho <= 0:
        raise ValueError("intensity rho must be positive")
    g = seed.generator(_TAG_POISSON)
    count = g.poisson(rho * window.volume)
    pts = g.uniform(-window.half_side, window.half_side, size=(count, window.dimension))
    return PointPattern(pts, window, validate=False)


@dataclass(frozen=True)
class LgcpParams:
    """Log-Gaussian Cox parameters: covariance sigma2 * exp(-|h|/scale)
    for the Gaussian field, field mean mu, and grid resolution in cells
    per unit length.  The implied intensity is exp(mu + sigma2/2)."""

    sigma2: float
    scale: float
    mu: float
    grid_resolution: float = 1.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.grid_resolution < 1:
            raise ValueError("grid_resolution must be at least 1 cell per unit")
        if not math.isfinite(self.intensity) or self.intensity <= 0:
            raise ValueError("implied intensity must be positive and finite")

    @property
    def intensity(self) -> float:
        return math.exp(self.mu + self.sigma2 / 2.0)

    @classmethod
    def intensity_one(cls, sigma2: float, scale: float,
                      grid_resolution: float = 1.0) -> "LgcpParams":
        """Parameters with mu = -sigma2/2, i.e. unit intensity."""
        return cls(sigma2, scale, -sigma2 / 2.0, grid_resolution)


_field_cache: dict = {}


def clear_field_cache() -> None:
    """Drop cached LGCP field factors (they can be large)."""
    _field_cache.clear()


def _field_factor(window: CubeWindow, params: LgcpParams):
    """Cell centers and a Cholesky factor of the grid covariance."""
    d = window.dimension
    L = window.side
    m = max(1, int(round(L * params.grid_resolution)))
    key = (d, round(L, 12), m, params.sigma2, params.scale)
    if key in _field_cache:
        return _field_cache[key]
    h = L / m
    axis = -L / 2 + (np.arange(m) + 0.5) * h
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    centers = np.column_stack([ax.ravel() for ax in mesh])
    cov = params.sigma2 * np.exp(-cdist(centers, centers) / params.scale)
    eps = LGCP_JITTER_START * params.sigma2
    factor = None
    while True:
        try:
            factor = np.linalg.cholesky(
                cov + eps * np.eye(len(cov)) if eps > 0 else cov
            )
            break
        except np.linalg.LinAlgError:
            eps = eps * 2 if eps > 0 else LGCP_JITTER_START * params.sigma2
            if eps > LGCP_JITTER_MAX * params.sigma2:
                if len(cov) <= 2048:
                    ev = np.linalg.eigvalsh(cov)
                    detail = f"condition number {ev[-1] / max(ev[0], 1e-300):.3e}"
                else:
                    detail = "condition number unavailable (grid too large)"
                raise np.linalg.LinAlgError(
                    f"field covariance not factorizable after jitter ladder; {detail}"
                )
    while len(_field_cache) >= 2:
        _field_cache.pop(next(iter(_field_cache)))
    _field_cache[key] = (centers, factor, h, m)
    return _field_cache[key]


def sample_lgcp(window: CubeWindow, params: LgcpParams, seed: RngSeed) -> PointPattern:
    """Log-Gaussian Cox process on the window.

    A stationary Gaussian field with exponential covariance is drawn on
    the cell-center grid (dense factorization, reused across calls with
    the same window and parameters); each cell then receives a Poisson
    number of points with rate exp(field) * cell volume, placed
    uniformly within the cell.
    """
    g = seed.generator(_TAG_LGCP)
    d = window.dimension
    if params.sigma2 == 0.0:
        # degenerate field: homogeneous Poisson of intensity exp(mu)
        count = g.poisson(math.exp(params.mu) * window.volume)
        pts = g.uniform(-window.half_side, window.half_side, size=(count, d))
        return PointPattern(pts, window, validate=False)
    centers, factor, h, m = _field_factor(window, params)
    z = params.mu + factor @ g.standard_normal(len(centers))
    counts = g.poisson(np.exp(z) * h**d)
    total = int(counts.sum())
    reps = np.repeat(np.arange(len(centers)), counts)
    pts = centers[reps] + g.uniform(-h / 2, h / 2, size=(total, d))
    return PointPattern(pts, window, validate=False)


@dataclass(frozen=True)
class MaternClusterParams:
    """Matern cluster parameters: Poisson parents of the given intensity,
    a Poisson(mean_offspring) brood per parent, offspring uniform in the
    ball of cluster_radius around the parent.  Implied intensity is
    parent_intensity * mean_offspring."""

    parent_intensity: float
    mean_offspring: float
    cluster_radius: float

    def __post_init__(self):
        if self.parent_intensity <= 0:
            raise ValueError("parent_intensity must be positive")
        if self.mean_offspring <= 0:
            raise ValueError("mean_offspring must be positive")
        if self.cluster_radius <= 0:
            raise ValueError("cluster_radius must be positive")

    @property
    def intensity(self) -> float:
        return self.parent_intensity * self.mean_offspring


def sample_matern_cluster(
    window: CubeWindow, params: MaternClusterParams, seed: RngSeed
) -> PointPattern:
    """Matern cluster process; parents live on the window dilated by the
    cluster radius so retained offspring counts carry no edge bias."""
    g = seed.generator(_TAG_MATERN)
    d = window.dimension
    dilated = window.dilate(params.cluster_radius)
    n_parents = g.poisson(params.parent_intensity * dilated.volume)
    parents = g.uniform(-dilated.half_side, dilated.half_side, size=(n_parents, d))
    broods = g.poisson(params.mean_offspring, size=n_parents)
    total = int(broods.sum())
    centers = np.repeat(parents, broods, axis=0)
    # uniform in the d-ball: direction times radius * U^(1/d)
    normals = g.standard_normal(size=(total, d))
    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = params.cluster_radius * g.random(total) ** (1.0 / d)
    pts = centers + normals / norms * radii[:, None]
    pts = pts[window.contains(pts)] if total else pts.reshape(0, d)
    return PointPattern(pts, window, validate=False)
