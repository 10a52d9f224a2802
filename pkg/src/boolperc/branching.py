"""Two-type (and single-type) Galton-Watson analysis with Poisson offspring.

The offspring-mean matrix of the two-type comparison process is stored and
manipulated entirely in the log domain: its off-diagonal entries involve
factors like ((1+rho)/2)^d that overflow floats long before the dimensions
of interest. Type index 0 is the radius-1 type, index 1 the large-radius
type.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import stream

TYPE_SMALL = 0  # radius 1
TYPE_LARGE = 1  # radius rho

CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class MeanMatrix2:
    """2x2 offspring-mean matrix, entries kept as logs (-inf encodes 0)."""

    log_entries: np.ndarray  # shape (2, 2); [i][j] = log mean type-j offspring of type-i parent

    def __post_init__(self):
        le = np.asarray(self.log_entries, dtype=np.float64).reshape(2, 2)
        if np.any(np.isnan(le)) or np.any(le == np.inf):
            raise ValueError("log mean entries must be finite or -inf")
        le.setflags(write=False)
        object.__setattr__(self, "log_entries", le)

    def linear(self) -> np.ndarray:
        """Entry values; overflows to inf for logs beyond float range."""
        return np.exp(self.log_entries)

    def entry(self, i: int, j: int) -> float:
        return float(math.exp(self.log_entries[i, j]))


def mean_matrix(kappa: float, rho: float, d: int) -> MeanMatrix2:
    """Offspring means: a type-r parent begets type-s children at rate
    lambda_s * v_d * (r + s)^d, which factors as kappa^d times a matrix with
    unit diagonal and off-diagonal entries ((1+rho)/(2 rho))^d, ((1+rho)/2)^d.
    """
    kappa, rho, d = float(kappa), float(rho), int(d)
    if kappa <= 0.0 or rho <= 0.0 or d < 1:
        raise ValueError(f"need kappa > 0, rho > 0, d >= 1; got {kappa}, {rho}, {d}")
    base = d * math.log(kappa)
    off_small = d * (math.log1p(rho) - math.log(2.0) - math.log(rho))
    off_large = d * (math.log1p(rho) - math.log(2.0))
    return MeanMatrix2(
        np.array([[base, base + off_small], [base + off_large, base]])
    )


def _log_abs_diff(a: float, b: float) -> float:
    """log|e^a - e^b| (-inf when equal)."""
    if a == b:
        return -math.inf
    hi, lo = max(a, b), min(a, b)
    return hi + math.log1p(-math.exp(lo - hi))


def perron_root_log(m: MeanMatrix2) -> float:
    """log of the largest eigenvalue of a nonnegative 2x2 matrix.

    Uses (a+d)/2 + sqrt(((a-d)/2)^2 + bc) on log-scale quantities so the
    result is exact even when entries are far outside float range.
    """
    le = m.log_entries
    la, lb, lc, ld = le[0, 0], le[0, 1], le[1, 0], le[1, 1]
    log_s = np.logaddexp(la, ld) - math.log(2.0)
    log_q = _log_abs_diff(la, ld) - math.log(2.0)
    log_disc = 0.5 * np.logaddexp(2.0 * log_q, lb + lc)
    return float(np.logaddexp(log_s, log_disc))


def perron_root(m: MeanMatrix2) -> float:
    """Largest eigenvalue (inf when the log value exceeds float range)."""
    lr = perron_root_log(m)
    return math.exp(lr) if lr < 709.0 else math.inf


def kappa_critical(rho: float) -> float:
    """Boundary value 2 sqrt(rho) / (1 + rho); equals 1 only at rho = 1."""
    rho = float(rho)
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    return 2.0 * math.sqrt(rho) / (1.0 + rho)


def classify(kappa: float, rho: float, d: int, tol: float = CRITICAL_TOL) -> str:
    """Extinction classification from the sign of log perron root."""
    lr = perron_root_log(mean_matrix(kappa, rho, d))
    if abs(lr) <= tol:
        return "critical"
    return "subcritical" if lr < 0.0 else "supercritical"


def mean_total_progeny(means, root_type: int = TYPE_LARGE) -> float:
    """Expected total population (root included) of a subcritical process.

    For a scalar mean m < 1 this is 1/(1-m); for a 2x2 mean matrix it is
    the root-type entry of (I - M)^-1 applied to the all-ones vector.
    """
    if isinstance(means, MeanMatrix2):
        if perron_root_log(means) >= 0.0:
            raise ValueError("mean total progeny requires a subcritical matrix")
        m = means.linear()
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries overflow the linear domain")
        totals = np.linalg.solve(np.eye(2) - m, np.ones(2))
        return float(totals[root_type])
    m = float(means)
    if not 0.0 <= m < 1.0:
        raise ValueError(f"scalar offspring mean must be in [0, 1), got {m}")
    return 1.0 / (1.0 - m)


@dataclass
class GWOutcome:
    """Totals of one simulated branching run."""

    total: int
    generations: list[tuple[int, int]]  # (type-0 count, type-1 count) per generation
    extinct: bool
    truncated: bool


def simulate_gw(means, root_type: int = TYPE_LARGE, seed: int = 0, cap: int = 10_000_000) -> GWOutcome:
    """Simulate total progeny with Poisson offspring counts.

    Accepts a scalar mean (single type) or a MeanMatrix2. Only per-type
    counts are tracked: summing the Poisson offspring over the parents of a
    generation is again Poisson with the aggregated mean. Runs whose total
    hits `cap` stop with the truncation flag set instead of erroring.
    """
    if cap <= 0:
        raise ValueError(f"cap must be positive, got {cap}")
    rng = stream(seed)
    if isinstance(means, MeanMatrix2):
        m = means.linear()
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries overflow the linear domain; cannot simulate")
        pop = np.zeros(2, dtype=np.int64)
        pop[root_type] = 1
    else:
        m = np.array([[float(means), 0.0], [0.0, 0.0]])
        if not np.isfinite(m[0, 0]) or m[0, 0] < 0.0:
            raise ValueError(f"invalid scalar mean {means}")
        pop = np.array([1, 0], dtype=np.int64)
        root_type = TYPE_SMALL
    total = int(pop.sum())
    generations = [(int(pop[0]), int(pop[1]))]
    truncated = False
    while pop.any():
        rates = pop @ m
        pop = rng.poisson(rates).astype(np.int64)
        if pop.any():
            generations.append((int(pop[0]), int(pop[1])))
            total += int(pop.sum())
        if total >= cap:
            truncated = True
            break
    return GWOutcome(total=total, generations=generations, extinct=not truncated, truncated=truncated)
