"""Marked Poisson sampling on rectangular boxes with deterministic streams.

Every random draw is keyed by (seed, replicate, atom index) through a
SeedSequence spawn key, so replicates parallelize with no shared state and
the output is a pure function of its arguments.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .geometry import Ball
from .measures import ModelParams

MAX_EXPECTED_POINTS = 1.0e8


class SizingError(RuntimeError):
    """A requested simulation would exceed the practical point budget."""


def _zigzag(k: int) -> int:
    k = int(k)
    return 2 * k if k >= 0 else -2 * k - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the given (seed, key...) counter tuple."""
    ss = np.random.SeedSequence(entropy=_zigzag(seed), spawn_key=tuple(_zigzag(k) for k in key))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class BoxWindow:
    """Axis-aligned observation box [0, L_1] x ... x [0, L_d].

    Sampling happens on the box dilated by `padding` on every side, so the
    restriction to the core box is free of boundary deficit. In torus mode
    the padding is zero and distances wrap modulo the side lengths.
    """

    sides: tuple[float, ...]
    padding: float = 0.0
    torus: bool = False

    def __post_init__(self):
        sides = tuple(float(s) for s in self.sides)
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "padding", float(self.padding))
        if len(sides) < 1 or any(not (s > 0.0 and math.isfinite(s)) for s in sides):
            raise ValueError(f"window sides must be positive, got {sides}")
        if self.padding < 0.0:
            raise ValueError(f"padding must be >= 0, got {self.padding}")
        if self.torus and self.padding != 0.0:
            raise ValueError("torus windows take no padding")

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def lo(self) -> np.ndarray:
        return np.full(self.dimension, -self.padding)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.sides) + self.padding

    @property
    def core_volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def padded_volume(self) -> float:
        return float(np.prod(np.array(self.sides) + 2.0 * self.padding))


def cube_window(dimension: int, side: float, padding: float = 0.0, torus: bool = False) -> BoxWindow:
    return BoxWindow(tuple([float(side)] * int(dimension)), padding=padding, torus=torus)


@dataclass
class BallConfiguration:
    """A sampled ball system: centers (n, d), radii (n,), and its provenance."""

    window: BoxWindow
    centers: np.ndarray
    radii: np.ndarray
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, self.window.dimension)
        self.radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        if self.radii.shape[0] != self.centers.shape[0]:
            raise ValueError("centers and radii must have matching lengths")

    @property
    def n_balls(self) -> int:
        return self.centers.shape[0]

    @property
    def max_radius(self) -> float:
        return float(self.radii.max()) if self.n_balls else 0.0

    def ball(self, i: int) -> Ball:
        return Ball(self.centers[i], self.radii[i])


def sample_boolean_model(
    params: ModelParams, window: BoxWindow, seed: int, replicate: int = 0
) -> BallConfiguration:
    """Sample the Boolean model restricted to the padded window.

    Each atom (r, m) contributes a Poisson(intensity * m * |padded window|)
    number of centers, uniform in the padded window and independent across
    atoms. Requires padding >= max atom radius (exactness of the core
    restriction) unless the window is a torus.
    """
    if window.dimension != params.dimension:
        raise ValueError(
            f"window dimension {window.dimension} != model dimension {params.dimension}"
        )
    rmax = params.measure.max_radius
    if not window.torus and window.padding < rmax:
        raise ValueError(
            f"padding {window.padding} is smaller than the largest radius {rmax}"
        )
    vol = window.core_volume if window.torus else window.padded_volume
    lo, hi = (np.zeros(window.dimension), np.array(window.sides)) if window.torus else (window.lo, window.hi)

    centers_parts = []
    radii_parts = []
    for k, (radius, mass) in enumerate(params.measure.atoms):
        mean = params.intensity * mass * vol
        if mean > MAX_EXPECTED_POINTS:
            raise SizingError(
                f"expected count {mean:.3g} for atom radius {radius} exceeds "
                f"{MAX_EXPECTED_POINTS:.0e}"
            )
        rng = stream(seed, replicate, k)
        n = int(rng.poisson(mean))
        pts = lo + rng.random((n, window.dimension)) * (hi - lo)
        centers_parts.append(pts)
        radii_parts.append(np.full(n, radius))
    centers = np.concatenate(centers_parts) if centers_parts else np.empty((0, window.dimension))
    radii = np.concatenate(radii_parts) if radii_parts else np.empty(0)
    return BallConfiguration(window, centers, radii, seed=seed, replicate=replicate)


def write_csv(config: BallConfiguration, fh: IO[str]) -> None:
    """One row per ball: x_1, ..., x_d, radius."""
    writer = csv.writer(fh, lineterminator="\n")
    d = config.window.dimension
    writer.writerow([f"x_{i + 1}" for i in range(d)] + ["radius"])
    for c, r in zip(config.centers, config.radii):
        writer.writerow([repr(float(v)) for v in c] + [repr(float(r))])
