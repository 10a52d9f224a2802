"""Discrete radius measures and their scalar functionals.

A radius measure is a finite list of (radius, mass) atoms with distinct
positive radii and positive masses. Everything the simulator needs from
the measure reduces to moments, which are computed in the log domain so
that quantities like rho^d stay usable at large d.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .geometry import log_unit_ball_volume

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RadiusMeasure:
    """Finite discrete measure on (0, inf): tuple of (radius, mass) atoms."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(r), float(m)) for r, m in self.atoms)
        if len(atoms) == 0:
            raise ValueError("measure must have at least one atom")
        radii = [r for r, _ in atoms]
        if len(set(radii)) != len(radii):
            raise ValueError("atom radii must be distinct")
        for r, m in atoms:
            if not (r > 0.0 and math.isfinite(r)):
                raise ValueError(f"atom radius must be positive and finite, got {r}")
            if not (m > 0.0 and math.isfinite(m)):
                raise ValueError(f"atom mass must be positive and finite, got {m}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for r, _ in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def max_radius(self) -> float:
        return float(self.radii.max())

    def scaled(self, a: float) -> "RadiusMeasure":
        """Image of the measure under r -> a*r (masses unchanged)."""
        a = float(a)
        if not (a > 0.0 and math.isfinite(a)):
            raise ValueError(f"scale factor must be positive, got {a}")
        return RadiusMeasure(tuple((r * a, m) for r, m in self.atoms))

    def to_json(self) -> str:
        # repr() gives the shortest exact decimal round-trip for floats
        return json.dumps([{"radius": repr(r), "mass": repr(m)} for r, m in self.atoms])

    @classmethod
    def from_json(cls, text: str) -> "RadiusMeasure":
        data = json.loads(text)
        return cls(tuple((float(item["radius"]), float(item["mass"])) for item in data))


def dirac(radius: float, mass: float = 1.0) -> RadiusMeasure:
    return RadiusMeasure(((radius, mass),))


def scale_measure(nu: RadiusMeasure, a: float) -> RadiusMeasure:
    return nu.scaled(a)


def log_moment(nu: RadiusMeasure, d: int) -> float:
    """log of sum_i mass_i * radius_i^d."""
    d = int(d)
    if d < 0:
        raise ValueError(f"moment order must be >= 0, got {d}")
    terms = np.log(nu.masses) + d * np.log(nu.radii)
    return float(logsumexp(terms))


def moment(nu: RadiusMeasure, d: int) -> float:
    """sum_i mass_i * radius_i^d (inf on overflow; use log_moment for large d)."""
    lm = log_moment(nu, d)
    return math.exp(lm) if lm < 709.0 else math.inf


@dataclass(frozen=True)
class ModelParams:
    """Dimension, intensity multiplier and radius measure of a Boolean model."""

    dimension: int
    intensity: float
    measure: RadiusMeasure

    def __post_init__(self):
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "intensity", float(self.intensity))
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")
        if not (self.intensity > 0.0 and math.isfinite(self.intensity)):
            raise ValueError(f"intensity must be positive and finite, got {self.intensity}")


def covered_volume(p: ModelParams) -> float:
    """Stationary density: probability that a fixed point is covered."""
    exponent = p.intensity * math.exp(
        log_unit_ball_volume(p.dimension) + log_moment(p.measure, p.dimension)
    )
    return -math.expm1(-exponent)


def log_normalized_intensity(p: ModelParams) -> float:
    """log of lambda * v_d * 2^d * moment(nu, d)."""
    d = p.dimension
    return (
        math.log(p.intensity)
        + log_unit_ball_volume(d)
        + d * LOG2
        + log_moment(p.measure, d)
    )


def normalized_intensity(p: ModelParams) -> float:
    """Scale-invariant reparametrization lambda * v_d * int (2r)^d nu(dr)."""
    lv = log_normalized_intensity(p)
    return math.exp(lv) if lv < 709.0 else math.inf


def theorem_range(rho: float) -> bool:
    """Whether the radius ratio lies in the interval the analytic results cover."""
    return 1.0 < rho < 2.0


def make_mu_d(rho: float, d: int) -> RadiusMeasure:
    """Two-atom measure with atoms (1, 1) and (rho, rho^-d).

    The second mass balances the per-type covered-point densities: in the
    driven Boolean model both radius types cover a fixed point at the same
    Poisson rate in every dimension. Requires rho > 1; ratios >= 2 are
    permitted but outside the supported analysis range (see theorem_range).
    """
    rho = float(rho)
    d = int(d)
    if rho <= 1.0:
        raise ValueError(f"radius ratio must be > 1, got {rho}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return RadiusMeasure(((1.0, 1.0), (rho, rho ** (-d))))


def log_two_type_intensities(kappa: float, rho: float, d: int) -> tuple[float, float]:
    """Logs of the two driving intensities kappa^d/(v_d 2^d) and kappa^d/(v_d (2 rho)^d)."""
    kappa, rho, d = float(kappa), float(rho), int(d)
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if rho <= 1.0:
        raise ValueError(f"radius ratio must be > 1, got {rho}")
    log_lam1 = d * math.log(kappa) - log_unit_ball_volume(d) - d * LOG2
    return log_lam1, log_lam1 - d * math.log(rho)


def two_type_intensities(kappa: float, rho: float, d: int) -> tuple[float, float]:
    """Intensities of the small- and large-radius center processes."""
    l1, lr = log_two_type_intensities(kappa, rho, d)
    return math.exp(l1), math.exp(lr)
