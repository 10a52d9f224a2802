"""Monte Carlo threshold estimation from box-crossing frequencies.

The threshold proxy is the intensity at which the crossing probability of a
fixed cube (side L in units of the largest radius, padded by that radius)
reaches one half; it is located by doubling/halving to a bracket followed
by bisection. Normalized outputs and covered volumes derive from the
estimate by exact algebra.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import log_unit_ball_volume
from .measures import ModelParams, RadiusMeasure, log_moment
from .percolation import crossing
from .sampling import BoxWindow, cube_window, sample_boolean_model


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    frequency: float
    stderr: float
    replicates: int


@dataclass
class ThresholdEstimate:
    """Bisection result with its evaluation trace and derived quantities."""

    dimension: int
    measure: RadiusMeasure
    window_side: float  # L, in units of the largest radius
    replicates: int  # per frequency evaluation
    seed: int
    lam_hat: float
    lam_lo: float
    lam_hi: float
    stderr: float
    curve: list[CurvePoint] = field(default_factory=list)
    finite_size_warning: bool = False

    @property
    def log_lambda_tilde(self) -> float:
        d = self.dimension
        return (
            math.log(self.lam_hat)
            + log_unit_ball_volume(d)
            + d * math.log(2.0)
            + log_moment(self.measure, d)
        )

    @property
    def lambda_tilde(self) -> float:
        return math.exp(self.log_lambda_tilde)

    @property
    def lambda_tilde_stderr(self) -> float:
        return self.lambda_tilde * self.stderr / self.lam_hat

    @property
    def c_hat(self) -> float:
        return -math.expm1(-self.lambda_tilde / 2.0**self.dimension)

    @property
    def c_hat_stderr(self) -> float:
        scale = self.lambda_tilde / 2.0**self.dimension
        return math.exp(-scale) * scale * self.stderr / self.lam_hat


def isotonic(values) -> np.ndarray:
    """Pool-adjacent-violators projection onto nondecreasing sequences."""
    vals = [float(v) for v in values]
    weights = [1.0] * len(vals)
    out_v: list[float] = []
    out_w: list[float] = []
    for v, w in zip(vals, weights):
        out_v.append(v)
        out_w.append(w)
        while len(out_v) > 1 and out_v[-2] > out_v[-1]:
            v2, w2 = out_v.pop(), out_w.pop()
            v1, w1 = out_v.pop(), out_w.pop()
            out_v.append((v1 * w1 + v2 * w2) / (w1 + w2))
            out_w.append(w1 + w2)
    expanded = []
    for v, w in zip(out_v, out_w):
        expanded.extend([v] * int(round(w)))
    return np.array(expanded)


def threshold_window(dimension: int, nu: RadiusMeasure, side: float) -> BoxWindow:
    """Cube of side L (units of the largest radius), padded by that radius."""
    rmax = nu.max_radius
    return cube_window(dimension, side * rmax, padding=rmax)


def crossing_frequency(
    params: ModelParams,
    window: BoxWindow,
    replicates: int,
    seed: int,
    tag: int = 0,
    threads: int = 1,
) -> CurvePoint:
    """Fraction of independent samples whose clusters span axis 0."""

    def count(rep_range) -> int:
        hits = 0
        for rep in rep_range:
            config = sample_boolean_model(params, window, seed, replicate=tag * 1_000_000 + rep)
            hits += int(crossing(config, axis=0))
        return hits

    reps = int(replicates)
    if threads <= 1:
        hits = count(range(reps))
    else:
        chunks = [range(k, reps, threads) for k in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(count, chunks))
    freq = hits / reps
    stderr = math.sqrt(max(freq * (1.0 - freq), 0.25 / reps) / reps)
    return CurvePoint(lam=params.intensity, frequency=freq, stderr=stderr, replicates=reps)


def crossing_curve(
    dimension: int,
    nu: RadiusMeasure,
    lam_grid,
    side: float = 30.0,
    replicates: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> list[CurvePoint]:
    """Crossing frequency at each grid intensity (strictly increasing grid)."""
    lams = [float(x) for x in lam_grid]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("intensity grid must be strictly increasing")
    window = threshold_window(dimension, nu, side)
    return [
        crossing_frequency(
            ModelParams(dimension, lam, nu), window, replicates, seed, tag=k, threads=threads
        )
        for k, lam in enumerate(lams)
    ]


def _slope_near(curve: list[CurvePoint], lam_hat: float) -> float:
    """Weighted linear slope of frequency vs intensity on informative points."""
    pts = [p for p in curve if 0.1 <= p.frequency <= 0.9]
    if len(pts) < 2:
        pts = sorted(curve, key=lambda p: abs(p.lam - lam_hat))[:3]
    lam = np.array([p.lam for p in pts])
    f = np.array([p.frequency for p in pts])
    w = np.array([1.0 / max(p.stderr, 1e-6) ** 2 for p in pts])
    lbar = np.average(lam, weights=w)
    fbar = np.average(f, weights=w)
    denom = np.sum(w * (lam - lbar) ** 2)
    if denom <= 0.0:
        return math.inf
    return float(np.sum(w * (lam - lbar) * (f - fbar)) / denom)


def bisect_threshold(
    dimension: int,
    nu: RadiusMeasure,
    side: float = 30.0,
    target: float = 0.5,
    rel_tol: float = 0.01,
    replicates: int = 400,
    seed: int = 0,
    threads: int = 1,
    max_doublings: int = 60,
) -> ThresholdEstimate:
    """Locate the intensity whose crossing frequency is the target level.

    Starts from the intensity with unit normalized value, brackets the
    target by doubling or halving, then bisects until the bracket is within
    rel_tol of the midpoint. The standard error combines the binomial noise
    through the fitted curve slope with the final bracket width.
    """
    window = threshold_window(dimension, nu, side)
    d = dimension
    lam0 = math.exp(-(log_unit_ball_volume(d) + d * math.log(2.0) + log_moment(nu, d)))
    curve: list[CurvePoint] = []
    tag = 0

    def freq_at(lam: float) -> float:
        nonlocal tag
        point = crossing_frequency(
            ModelParams(d, lam, nu), window, replicates, seed, tag=tag, threads=threads
        )
        tag += 1
        curve.append(point)
        return point.frequency

    lam = lam0
    f = freq_at(lam)
    lo = hi = lam
    if f < target:
        for _ in range(max_doublings):
            lo = lam
            lam *= 2.0
            f = freq_at(lam)
            if f >= target:
                hi = lam
                break
        else:
            raise RuntimeError(f"failed to bracket the threshold above {lam}")
    else:
        for _ in range(max_doublings):
            hi = lam
            lam /= 2.0
            f = freq_at(lam)
            if f < target:
                lo = lam
                break
        else:
            raise RuntimeError(f"failed to bracket the threshold below {lam}")
    while hi - lo > rel_tol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if freq_at(mid) < target:
            lo = mid
        else:
            hi = mid
    lam_hat = 0.5 * (lo + hi)
    slope = _slope_near(curve, lam_hat)
    binom = math.sqrt(target * (1.0 - target) / replicates)
    noise = binom / slope if slope > 0.0 and math.isfinite(slope) else (hi - lo)
    stderr = math.sqrt(noise**2 + (0.5 * (hi - lo)) ** 2)
    est = ThresholdEstimate(
        dimension=d,
        measure=nu,
        window_side=side,
        replicates=replicates,
        seed=seed,
        lam_hat=lam_hat,
        lam_lo=lo,
        lam_hi=hi,
        stderr=stderr,
        curve=curve,
    )
    est.finite_size_warning = est.lambda_tilde <= 1.0
    return est


def mixture_measure(alpha: float, rho: float) -> RadiusMeasure:
    """(1 - alpha) mass at radius 1 plus alpha/rho^2 mass at radius rho."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if rho <= 1.0:
        raise ValueError(f"rho must be > 1, got {rho}")
    atoms = []
    if alpha < 1.0:
        atoms.append((1.0, 1.0 - alpha))
    if alpha > 0.0:
        atoms.append((float(rho), alpha / rho**2))
    return RadiusMeasure(tuple(atoms))


def mixture_sweep(
    dimension: int,
    rho: float,
    alphas,
    side: float = 30.0,
    rel_tol: float = 0.01,
    replicates: int = 400,
    seed: int = 0,
    threads: int = 1,
) -> list[dict]:
    """Threshold estimate per mixture weight; one output row per alpha."""
    rows = []
    for k, alpha in enumerate(alphas):
        nu = mixture_measure(alpha, rho)
        est = bisect_threshold(
            dimension,
            nu,
            side=side,
            rel_tol=rel_tol,
            replicates=replicates,
            seed=seed + k,
            threads=threads,
        )
        rows.append(
            {
                "d": dimension,
                "rho": float(rho),
                "alpha": float(alpha),
                "lambda_hat": est.lam_hat,
                "lambda_lo": est.lam_lo,
                "lambda_hi": est.lam_hi,
                "lambda_tilde": est.lambda_tilde,
                "c_hat": est.c_hat,
                "L": side,
                "replicates": replicates,
                "seed": seed + k,
                "estimate": est,
            }
        )
    return rows
