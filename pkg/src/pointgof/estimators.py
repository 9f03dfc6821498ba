"""Edge-corrected summary-statistic estimators on a radius grid.

``estimate_k`` is the weighted pair-count estimator
``(1/(n rho^2)) * sum over ordered pairs of 1{0 < |x-y| <= r} e(x, y)``
with one of the five edge corrections; ``brute_force_k`` is its literal
O(N^2) oracle.  ``estimate_pcf`` is the kernel-smoothed pair-correlation
estimator with translation weights and the C^1 Epanechnikov kernel, and
``estimate_nn`` the border-weighted nearest-neighbor distance function.
All are pure functions; pair sums run on the active kernel backend.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry import (
    ROTATION_QUAD_NODES,
    CubeWindow,
    EdgeCorrection,
    PointPattern,
    arc_fraction_inside,
    eroded_volume,
    overlap_volume,
    rotation_averaged_overlap,
    unit_ball_volume,
)

_CORR_ID = {
    EdgeCorrection.NONE: K.CORR_NONE,
    EdgeCorrection.TRANSLATION: K.CORR_TRANSLATION,
    EdgeCorrection.RIGID_MOTION: K.CORR_RIGID,
    EdgeCorrection.BORDER: K.CORR_BORDER,
    EdgeCorrection.ISOTROPIC: K.CORR_ISOTROPIC,
}

#: default pair-correlation bandwidth
PCF_BANDWIDTH = 0.2


@dataclass(frozen=True)
class RGrid:
    """Uniformly spaced, strictly increasing radius grid."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) == 0:
            raise ValueError("grid must be a nonempty 1-d array")
        if vals[0] < 0:
            raise ValueError("grid radii must be nonnegative")
        if len(vals) > 1:
            steps = np.diff(vals)
            if (steps <= 0).any():
                raise ValueError("grid must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise ValueError("grid spacing must be uniform")
        object.__setattr__(self, "values", vals)

    @classmethod
    def standard(cls, R: float, step: float = 0.1) -> "RGrid":
        """The grid {0, step, 2*step, ..., R} (default step 0.1)."""
        count = int(round(R / step))
        if abs(count * step - R) > 1e-9:
            raise ValueError("R must be a multiple of the step")
        return cls(np.arange(count + 1) * step)

    @property
    def step(self) -> float:
        return float(self.values[1] - self.values[0]) if len(self.values) > 1 else 0.0

    @property
    def rmax(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return len(self.values)

    def restrict(self, R: float) -> np.ndarray:
        """Boolean mask of grid points with r <= R (tolerant at R)."""
        return self.values <= R + 1e-9 * max(self.step, 1.0)


@dataclass(frozen=True)
class CurveEstimate:
    """A summary-statistic curve on a radius grid with its metadata."""

    grid: RGrid
    values: np.ndarray
    statistic: str
    correction: EdgeCorrection
    rho: float
    n: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.grid),):
            raise ValueError("values must have one entry per grid point")
        object.__setattr__(self, "values", vals)

    def to_csv(self, path_or_buf) -> None:
        if not hasattr(path_or_buf, "write"):
            with open(path_or_buf, "w") as fh:
                self.to_csv(fh)
            return
        path_or_buf.write(
            f"# statistic={self.statistic} correction={self.correction.value} "
            f"rho={self.rho!r} n={self.n!r}\n"
        )
        path_or_buf.write("r,value\n")
        for r, v in zip(self.grid.values, self.values):
            path_or_buf.write(f"{r!r},{v!r}\n")

    @classmethod
    def from_csv(cls, path_or_buf) -> "CurveEstimate":
        if not hasattr(path_or_buf, "read"):
            with open(path_or_buf) as fh:
                return cls.from_csv(fh)
        header = path_or_buf.readline()
        if not header.startswith("#"):
            raise ValueError("curve CSV must start with a metadata header")
        meta = dict(tok.split("=") for tok in header.lstrip("#").split() if "=" in tok)
        body = path_or_buf.read().split("\n", 1)[1]
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
        return cls(
            RGrid(data[:, 0]),
            data[:, 1],
            meta["statistic"],
            EdgeCorrection.parse(meta["correction"]),
            float(meta["rho"]),
            float(meta["n"]),
        )


def edge_weight(
    correction: EdgeCorrection,
    window: CubeWindow,
    x: np.ndarray,
    y: np.ndarray,
    r: float | None = None,
    rot_nodes: int = ROTATION_QUAD_NODES,
) -> float:
    """The pair weight e(x, y) of the requested correction.

    The border weight depends on x and the query radius ``r`` only; the
    remaining corrections depend on the displacement (translation,
    rigid motion) or on x and |x - y| (isotropic).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = window.volume
    if correction is EdgeCorrection.NONE:
        return 1.0
    if correction is EdgeCorrection.TRANSLATION:
        ov = overlap_volume(window, x - y)
        if ov <= 0:
            raise ValueError("translation weight undefined: shifted windows disjoint")
        return n / ov
    if correction is EdgeCorrection.RIGID_MOTION:
        t = float(np.linalg.norm(x - y))
        return n / rotation_averaged_overlap(window, t, nodes=rot_nodes)
    if correction is EdgeCorrection.BORDER:
        if r is None or r <= 0:
            raise ValueError("border weight requires a positive radius r")
        er = eroded_volume(window, r)
        if er <= 0:
            raise ValueError(f"window too small for radius {r:g}")
        inside = window.boundary_distances(x.reshape(1, -1))[0] >= r
        return float(inside) * n / er
    if correction is EdgeCorrection.ISOTROPIC:
        t = float(np.linalg.norm(x - y))
        frac = arc_fraction_inside(window, x, t)
        if frac <= 0:
            raise ValueError("isotropic weight undefined: circle leaves the window")
        return 1.0 / frac
    raise ValueError(f"unknown correction {correction}")


def _validate_k_inputs(pattern: PointPattern, rho: float, grid: RGrid,
                       correction: EdgeCorrection) -> None:
    if rho <= 0:
        raise ValueError("intensity rho must be positive")
    w = pattern.window
    if correction in (EdgeCorrection.RIGID_MOTION, EdgeCorrection.ISOTROPIC):
        if w.dimension != 2:
            raise ValueError(f"{correction.value} correction requires d = 2")
    if correction is EdgeCorrection.RIGID_MOTION and grid.rmax >= w.side:
        raise ValueError("rigid-motion correction requires max radius < side length")
    if correction is EdgeCorrection.BORDER and eroded_volume(w, grid.rmax) <= 0:
        raise ValueError(f"window too small for radius {grid.rmax:g}")


def estimate_k(
    pattern: PointPattern,
    rho: float,
    grid: RGrid,
    correction: EdgeCorrection = EdgeCorrection.TRANSLATION,
    rot_nodes: int = ROTATION_QUAD_NODES,
) -> CurveEstimate:
    """Edge-corrected empirical K-function on the grid.

    Pairs are enumerated through a spatial grid with cell size equal to
    the largest radius, so the cost is linear in points times neighbors;
    the result equals the brute-force double sum.
    """
    _validate_k_inputs(pattern, rho, grid, correction)
    w = pattern.window
    pos = pattern.points
    n = w.volume
    nc, csize, cell_start, cell_items = K.build_cell_index(pos, w.side, grid.rmax)
    bins = K.pair_weight_bins(
        pos, cell_start, cell_items, nc, csize, w.side, n,
        grid.values, _CORR_ID[correction], rot_nodes,
    )
    if np.isnan(bins).any():
        raise ValueError("isotropic weight undefined: circle leaves the window")
    sums = np.cumsum(bins)[: len(grid)]
    if correction is EdgeCorrection.BORDER:
        eroded = (np.maximum(0.0, w.side - 2.0 * grid.values)) ** w.dimension
        values = np.divide(sums, rho**2 * eroded, out=np.zeros_like(sums),
                           where=eroded > 0)
    else:
        values = sums / (n * rho**2)
    return CurveEstimate(grid, values, "K", correction, rho, n)


def brute_force_k(
    pattern: PointPattern,
    rho: float,
    grid: RGrid,
    correction: EdgeCorrection = EdgeCorrection.TRANSLATION,
    rot_nodes: int = ROTATION_QUAD_NODES,
) -> CurveEstimate:
    """Literal double-sum K estimator (test oracle, no spatial index)."""
    _validate_k_inputs(pattern, rho, grid, correction)
    w = pattern.window
    pos = pattern.points
    n = w.volume
    N = len(pos)
    values = np.zeros(len(grid))
    if N >= 2:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        ii, jj = np.nonzero((dist > 0) & (dist <= grid.rmax))
        pair_d = dist[ii, jj]
        if correction is EdgeCorrection.BORDER:
            bdist = w.boundary_distances(pos)
            for g, r in enumerate(grid.values):
                er = eroded_volume(w, r)
                if er <= 0:
                    continue
                m = (pair_d <= r) & (bdist[ii] >= r)
                values[g] = m.sum() * n / er / (n * rho**2)
        else:
            wts = np.array([
                edge_weight(correction, w, pos[i], pos[j], rot_nodes=rot_nodes)
                for i, j in zip(ii, jj)
            ]) if len(ii) else np.zeros(0)
            for g, r in enumerate(grid.values):
                values[g] = wts[pair_d <= r].sum() / (n * rho**2)
    return CurveEstimate(grid, values, "K", correction, rho, n)


def estimate_pcf(
    pattern: PointPattern,
    rho: float,
    grid: RGrid,
    bandwidth: float = PCF_BANDWIDTH,
) -> CurveEstimate:
    """Kernel pair-correlation estimator with translation weights.

    The kernel is the C^1 Epanechnikov density
    ``f(t) = (3/(4*delta)) * (1 - (t/delta)^2)`` on ``[-delta, delta)``,
    which integrates to one.  Every grid radius must exceed the
    bandwidth so the denominator ``d kappa_d r^(d-1)`` stays away from 0.
    """
    if rho <= 0:
        raise ValueError("intensity rho must be positive")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if grid.values[0] - bandwidth <= 0:
        raise ValueError("all grid radii must exceed the bandwidth")
    w = pattern.window
    pos = pattern.points
    n = w.volume
    d = w.dimension
    nc, csize, cell_start, cell_items = K.build_cell_index(
        pos, w.side, grid.rmax + bandwidth
    )
    sums = K.pcf_bins(
        pos, cell_start, cell_items, nc, csize, w.side, n, grid.values, bandwidth
    )
    denom = n * d * unit_ball_volume(d) * grid.values ** (d - 1) * rho**2
    return CurveEstimate(grid, sums / denom, "pcf", EdgeCorrection.TRANSLATION, rho, n)


def estimate_nn(
    pattern: PointPattern,
    rho: float,
    grid: RGrid,
) -> CurveEstimate:
    """Border-weighted empirical nearest-neighbor distance function."""
    if rho <= 0:
        raise ValueError("intensity rho must be positive")
    w = pattern.window
    if eroded_volume(w, grid.rmax) <= 0:
        raise ValueError(f"window too small for radius {grid.rmax:g}")
    pos = pattern.points
    nc, csize, cell_start, cell_items = K.build_cell_index(pos, w.side, grid.rmax)
    bins = K.nn_diff_bins(
        pos, cell_start, cell_items, nc, csize, w.side, grid.values
    )
    counts = np.cumsum(bins)[: len(grid)]
    eroded = (w.side - 2.0 * grid.values) ** w.dimension
    return CurveEstimate(
        grid, counts / (rho * eroded), "nn", EdgeCorrection.BORDER, rho, w.volume
    )
