"""d-dimensional Euclidean primitives: points, balls, volumes, rescaling.

The ambient dimension is a runtime parameter; points are plain float64
arrays. Balls are open, so tangent balls do not intersect. Unit-ball
volumes are computed in the log domain via log-gamma so that dimensions
in the thousands remain usable downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


def as_point(coords, dim: int | None = None) -> np.ndarray:
    """Validate and return a point as a 1-d float64 array."""
    p = np.asarray(coords, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"point must be a 1-d coordinate sequence, got shape {p.shape}")
    if dim is not None and p.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


@dataclass(frozen=True, eq=False)
class Ball:
    """Open Euclidean ball with a positive radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class SplitPoint:
    """Point of dimension d >= 3 split into its leading plane and tail parts."""

    head: np.ndarray  # first two coordinates
    tail: np.ndarray  # remaining d-2 coordinates

    def __post_init__(self):
        h = as_point(self.head, 2)
        t = np.atleast_1d(np.asarray(self.tail, dtype=np.float64))
        if t.size < 1 or not np.all(np.isfinite(t)):
            raise ValueError("tail must be a non-empty finite coordinate sequence")
        h.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "head", h)
        object.__setattr__(self, "tail", t)

    def join(self) -> np.ndarray:
        return np.concatenate([self.head, self.tail])


def split_point(p) -> SplitPoint:
    p = as_point(p)
    if p.size < 3:
        raise ValueError("splitting requires dimension >= 3")
    return SplitPoint(p[:2], p[2:])


def log_unit_ball_volume(d: int) -> float:
    """log of the d-dimensional unit-ball volume, pi^(d/2) / Gamma(d/2 + 1)."""
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1.0))


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d (underflows to 0.0 for very large d)."""
    return math.exp(log_unit_ball_volume(d))


def distance(a, b) -> float:
    a = as_point(a)
    b = as_point(b, a.size)
    return float(np.linalg.norm(a - b))


def balls_intersect(a: Ball, b: Ball) -> bool:
    """Whether two open balls overlap (strict: tangency is not overlap)."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return distance(a.center, b.center) < a.radius + b.radius


def rescale(b: Ball, a: float) -> Ball:
    """Scale center and radius by a common factor a > 0."""
    a = float(a)
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError(f"scale factor must be positive and finite, got {a}")
    return Ball(b.center * a, b.radius * a)
