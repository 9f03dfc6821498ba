"""Observation windows, point patterns, and edge-correction geometry.

The observation window is always the cube of volume ``n`` centered at
the origin, ``[-L/2, L/2]^d`` with ``L = n**(1/d)``.  All the
deterministic geometry consumed by the edge-corrected estimators lives
here: shifted-cube overlap volumes, erosion volumes, exact
circle-rectangle arc fractions, and the rotation-averaged overlap.
Everything is a pure function of its inputs.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

#: quadrature nodes for the rotation-averaged overlap (full circle)
ROTATION_QUAD_NODES = 720

#: points closer than this fraction of the side length are non-simple
DUPLICATE_TOL_FACTOR = 1e-12


def unit_ball_volume(d: int) -> float:
    """Volume of the d-dimensional unit ball."""
    return math.pi ** (d / 2) / math.gamma(1 + d / 2)


class EdgeCorrection(enum.Enum):
    """The five pair-weighting schemes for the K estimator."""

    NONE = "none"
    TRANSLATION = "translation"
    RIGID_MOTION = "rigid"
    BORDER = "border"
    ISOTROPIC = "isotropic"

    @classmethod
    def parse(cls, name: str) -> "EdgeCorrection":
        key = name.strip().lower()
        aliases = {
            "none": cls.NONE,
            "translation": cls.TRANSLATION,
            "rigid": cls.RIGID_MOTION,
            "rigid_motion": cls.RIGID_MOTION,
            "rigidmotion": cls.RIGID_MOTION,
            "border": cls.BORDER,
            "isotropic": cls.ISOTROPIC,
        }
        if key not in aliases:
            raise ValueError(f"unknown edge correction {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class CubeWindow:
    """Cubical window of volume ``n`` centered at the origin.

    Parameters
    ----------
    dimension : int
        Spatial dimension, at least 1.
    volume : float
        Window volume ``n``; the side length is ``n**(1/dimension)``.
    """

    dimension: int
    volume: float

    def __post_init__(self):
        if int(self.dimension) < 1 or int(self.dimension) != self.dimension:
            raise ValueError("dimension must be a positive integer")
        if not (self.volume > 0 and math.isfinite(self.volume)):
            raise ValueError("volume must be a positive finite real")
        if abs(self.side ** self.dimension - self.volume) > 1e-12 * self.volume:
            raise ValueError("side length does not reproduce the volume")

    @property
    def side(self) -> float:
        return self.volume ** (1.0 / self.dimension)

    @property
    def half_side(self) -> float:
        return 0.5 * self.side

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of ``points`` inside the closed window."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (np.abs(pts) <= self.half_side + 0.0).all(axis=1)

    def boundary_distances(self, points: np.ndarray) -> np.ndarray:
        """Sup-norm distance from each point to the window boundary."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.half_side - np.abs(pts).max(axis=1)

    def dilate(self, margin: float) -> "CubeWindow":
        if margin < 0:
            raise ValueError("margin must be nonnegative")
        side = self.side + 2.0 * margin
        return CubeWindow(self.dimension, side ** self.dimension)


@dataclass(frozen=True)
class PointPattern:
    """A finite simple point set together with its observation window."""

    points: np.ndarray
    window: CubeWindow
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.window.dimension)
        if pts.ndim != 2 or pts.shape[1] != self.window.dimension:
            raise ValueError(
                f"points must have shape (m, {self.window.dimension})"
            )
        pts = np.ascontiguousarray(pts)
        object.__setattr__(self, "points", pts)
        if len(pts) and not self.window.contains(pts).all():
            raise ValueError("some points fall outside the window")
        if self.validate and len(pts) > 1:
            tol = DUPLICATE_TOL_FACTOR * self.window.side
            from scipy.spatial import cKDTree

            pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
            if len(pairs):
                raise ValueError(
                    f"pattern is not simple: {len(pairs)} point pair(s) closer "
                    f"than {tol:g}"
                )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.window.dimension

    def to_csv(self, path_or_buf) -> None:
        """One point per line, comma-separated, ``# d=<d> n=<n>`` header."""
        header = f"# d={self.window.dimension} n={self.window.volume!r}\n"
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(header)
            np.savetxt(path_or_buf, self.points, delimiter=",", fmt="%.17g")
        else:
            with open(path_or_buf, "w") as fh:
                self.to_csv(fh)

    @classmethod
    def from_csv(cls, path_or_buf, validate: bool = True) -> "PointPattern":
        """Load a pattern; re-centers coordinates if the file used a
        non-centered bounding window."""
        if not hasattr(path_or_buf, "read"):
            with open(path_or_buf) as fh:
                return cls.from_csv(fh, validate=validate)
        first = path_or_buf.readline()
        if not first.startswith("#"):
            raise ValueError("pattern CSV must start with a '# d=.. n=..' header")
        fields = dict(
            tok.split("=") for tok in first.lstrip("#").split() if "=" in tok
        )
        try:
            d = int(fields["d"])
            n = float(fields["n"])
        except (KeyError, ValueError) as exc:
            raise ValueError("malformed pattern header") from exc
        window = CubeWindow(d, n)
        body = path_or_buf.read()
        pts = (
            np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
            if body.strip()
            else np.empty((0, d))
        )
        if len(pts) and not window.contains(pts).all():
            # accept files with the window anchored elsewhere: translate so
            # the bounding box is centered
            center = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
            pts = pts - center
            if not window.contains(pts).all():
                raise ValueError("points do not fit the declared window")
        return cls(pts, window, validate=validate)


def overlap_volume(window: CubeWindow, v: np.ndarray) -> float:
    """Volume of the window intersected with its translate by ``v``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != window.dimension:
        raise ValueError("shift vector dimension mismatch")
    if not np.isfinite(v).all():
        raise ValueError("shift vector must be finite")
    edges = np.maximum(0.0, window.side - np.abs(v))
    return float(np.prod(edges))


def eroded_volume(window: CubeWindow, s: float) -> float:
    """Volume of the window eroded by a ball of radius ``s``."""
    if s < 0:
        raise ValueError("erosion radius must be nonnegative")
    return float(max(0.0, window.side - 2.0 * s) ** window.dimension)


def _excluded_arcs(cx: float, cy: float, half: float, radius: float):
    """Angular intervals (mod 2*pi) of the circle lying outside the square."""
    out = []
    # (distance to side, direction angle of the outward normal)
    for dist, theta in (
        (half - cx, 0.0),
        (half - cy, 0.5 * math.pi),
        (half + cx, math.pi),
        (half + cy, 1.5 * math.pi),
    ):
        c = dist / radius
        if c < 1.0:
            alpha = math.acos(max(-1.0, c))
            out.append((theta - alpha, theta + alpha))
    return out


def arc_fraction_inside(window: CubeWindow, center: np.ndarray, radius: float) -> float:
    """Fraction of the circle about ``center`` lying inside the window.

    Exact in the plane: the part of the circle beyond each window side is
    an arc, and the union of the (up to four) excluded arcs is merged
    analytically.  Returns a value in ``[0, 1]``; the isotropic edge
    weight is its reciprocal.
    """
    if window.dimension != 2:
        raise ValueError("arc fraction is implemented for d = 2 only")
    if radius <= 0:
        raise ValueError("radius must be positive")
    cx, cy = (float(x) for x in np.asarray(center, dtype=float).reshape(-1))
    half = window.half_side
    if abs(cx) > half or abs(cy) > half:
        raise ValueError("circle center must lie inside the window")
    arcs = _excluded_arcs(cx, cy, half, radius)
    if not arcs:
        return 1.0
    twopi = 2.0 * math.pi
    arcs = sorted((a % twopi, a % twopi + (b - a)) for a, b in arcs)
    merged = []
    for a, b in arcs:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    excluded = sum(b - a for a, b in merged)
    overhang = merged[-1][1] - twopi
    if overhang > 0.0:
        # the part wrapping past 2*pi may double-count leading intervals
        for a, b in merged[:-1]:
            excluded -= max(0.0, min(b, overhang) - min(a, overhang))
    excluded = min(excluded, twopi)
    return max(0.0, 1.0 - excluded / twopi)


def rotation_averaged_overlap(
    window: CubeWindow, t: float, nodes: int = ROTATION_QUAD_NODES
) -> float:
    """Average of ``overlap_volume`` over all rotations of a shift of
    length ``t``, by trapezoidal quadrature on the circle.

    The closed form in the plane is ``L**2 - 4*L*t/pi + t**2/pi``; the
    quadrature default of 720 nodes matches it to better than 1e-6
    relative.
    """
    if window.dimension != 2:
        raise ValueError("rotation average is implemented for d = 2 only")
    L = window.side
    if not (0 <= t < L):
        raise ValueError(f"shift length must satisfy 0 <= t < L = {L:g}")
    if nodes < 4:
        raise ValueError("need at least 4 quadrature nodes")
    theta = np.arange(nodes) * (2.0 * math.pi / nodes)
    vals = (L - t * np.abs(np.cos(theta))) * (L - t * np.abs(np.sin(theta)))
    # periodic integrand: the trapezoid rule reduces to the plain mean
    return float(vals.mean())
