"""Supercritical embedding machinery: cells, regions, and oriented percolation.

The construction splits R^d into a distinguished plane and a d-2
dimensional tail. Around a seed ball, two thin annular shells in the tail
(crossed with 1/sqrt(d)-sized plane squares) host the radius-1 and the
large-radius points of a two-hop link; the second shell is further cut by
a half-angle pi/4 cone about the first point's tail direction. All volumes
are exact and kept in logs. A directed lattice whose edges open when the
two-hop event occurs in the matching forward cell turns repeated two-hop
links into arbitrarily long alternating ball chains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .geometry import Ball, log_unit_ball_volume
from .measures import log_two_type_intensities
from .sampling import SizingError, stream

SQRT2 = math.sqrt(2.0)
COS_HALF_ANGLE = SQRT2 / 2.0  # cone half-angle pi/4
MAX_EXPECTED_POINTS = 1.0e6


class DegenerateRegionError(ValueError):
    """Shell radii collapse (inner radius <= 0) at this dimension."""


@dataclass(frozen=True)
class EmbeddingGeometry:
    """Dimension, radius ratio and intensity scale of the embedding."""

    dimension: int
    rho: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "kappa", float(self.kappa))
        if self.dimension < 3:
            raise ValueError(f"embedding requires dimension >= 3, got {self.dimension}")
        if self.rho <= 1.0:
            raise ValueError(f"radius ratio must be > 1, got {self.rho}")
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")

    @property
    def u(self) -> float:
        """Contact distance 1 + rho of the two ball types."""
        return 1.0 + self.rho

    @property
    def tail_dim(self) -> int:
        return self.dimension - 2

    # annular shell radii in the tail space; thickness 1/d, offset 6/d and 7/d
    @property
    def c1_outer(self) -> float:
        return self.u - 6.0 / self.dimension

    @property
    def c1_inner(self) -> float:
        return self.u - 7.0 / self.dimension

    @property
    def c2_outer(self) -> float:
        return SQRT2 * self.u - 6.0 / self.dimension

    @property
    def c2_inner(self) -> float:
        return SQRT2 * self.u - 7.0 / self.dimension

    @property
    def shells_valid(self) -> bool:
        return self.c1_inner > 0.0 and self.c2_inner > 0.0

    @property
    def tails_disjoint(self) -> bool:
        """Whether the two annular shells cannot intersect."""
        return self.c1_outer <= self.c2_inner

    @property
    def theorem_range(self) -> bool:
        return 1.0 < self.rho < 2.0

    def _require_shells(self) -> None:
        if not self.shells_valid:
            raise DegenerateRegionError(
                f"inner shell radius <= 0 at d={self.dimension}, rho={self.rho}"
            )


@lru_cache(maxsize=None)
def log_cone_fraction(m: int) -> float:
    """log of the solid-angle fraction of a half-angle pi/4 cone in R^m.

    Equals the fraction of the unit-ball volume inside the cone. Computed
    from the colatitude integral of sin^(m-2), rescaled by its maximum so
    the quadrature stays in range for m in the thousands.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"tail dimension must be >= 1, got {m}")
    if m == 1:
        return math.log(0.5)
    k = m - 2
    theta = math.pi / 4.0
    log_st = math.log(math.sin(theta))

    def scaled(phi):
        return math.exp(k * (math.log(math.sin(phi)) - log_st)) if phi > 0.0 else float(k == 0)

    val, _ = integrate.quad(scaled, 0.0, theta, epsabs=1e-14, epsrel=1e-12, limit=200)
    log_num = k * log_st + math.log(val)
    # full integral of sin^(m-2) over (0, pi)
    from scipy.special import gammaln

    log_den = 0.5 * math.log(math.pi) + float(gammaln(0.5 * (m - 1)) - gammaln(0.5 * m))
    return log_num - log_den


def _log_sub(a: float, b: float) -> float:
    """log(e^a - e^b) for a > b."""
    if b >= a:
        raise ValueError("log_sub needs a > b")
    return a + math.log1p(-math.exp(b - a))


@dataclass(frozen=True)
class RegionVolumes:
    """Log volumes of the embedding regions at one dimension."""

    log_c1: float  # plane square x first shell
    log_c2: float  # plane square x second shell
    log_d2pp: float  # second shell cut by the cone (tail factor only)
    log_d2: float  # plane square x cone-cut shell
    log_s_cone: float  # unit-ball cone sector in the tail space
    log_c1pp: float  # first shell, tail factor only
    log_c2pp: float  # second shell, tail factor only


def region_volumes(g: EmbeddingGeometry) -> RegionVolumes:
    """Exact region volumes; raises DegenerateRegionError below d = 4.

    The cone-cut shell factorizes as (shell radial mass) x (unit cone
    sector): both annulus and cone scale homogeneously, and the sector is a
    fixed solid-angle fraction of the ball. The sector value is checked
    against its rigorous cone/cylinder sandwich before returning.
    """
    d, m = g.dimension, g.tail_dim
    if d < 4:
        raise DegenerateRegionError(f"region volumes need d >= 4, got {d}")
    g._require_shells()
    log_vm = log_unit_ball_volume(m)
    log_shell1 = _log_sub(m * math.log(g.c1_outer), m * math.log(g.c1_inner))
    log_shell2 = _log_sub(m * math.log(g.c2_outer), m * math.log(g.c2_inner))
    log_s = log_vm + log_cone_fraction(m)
    log_c1pp = log_vm + log_shell1
    log_c2pp = log_vm + log_shell2
    log_d2pp = log_shell2 + log_s
    log_d = math.log(d)
    volumes = RegionVolumes(
        log_c1=log_c1pp - log_d,
        log_c2=log_c2pp - log_d,
        log_d2pp=log_d2pp,
        log_d2=log_d2pp - log_d,
        log_s_cone=log_s,
        log_c1pp=log_c1pp,
        log_c2pp=log_c2pp,
    )
    # cone sector must sit between its inscribed cone and bounding cylinder
    lo = log_unit_ball_volume(d - 3) + (d - 2) * math.log(COS_HALF_ANGLE) - math.log(d - 2)
    hi = log_unit_ball_volume(d - 3) + (d - 3) * math.log(COS_HALF_ANGLE)
    if not (lo - 1e-9 <= log_s <= hi + 1e-9):
        raise RuntimeError(
            f"cone sector volume violates its sandwich at d={d}: {lo} <= {log_s} <= {hi}"
        )
    return volumes


@dataclass(frozen=True)
class InclusionCertificate:
    """Closed-form margins plus sampled validation of the region inclusions."""

    inclus1: bool  # every shell-1 point is within contact range of every seed point
    inclus2: bool  # every cone-cut shell-2 point is within contact range of its shell-1 point
    margin1: float  # contact-distance^2 minus the worst-case bound (positive = certified)
    margin2: float
    sampled_pairs: int
    counterexamples1: int
    counterexamples2: int


def _sample_rect(rng: np.random.Generator, n: int, xlo, xhi, ylo, yhi) -> np.ndarray:
    out = rng.random((n, 2))
    out[:, 0] = xlo + out[:, 0] * (xhi - xlo)
    out[:, 1] = ylo + out[:, 1] * (yhi - ylo)
    return out


def _sample_sphere(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    v = rng.standard_normal((n, m))
    v /= np.sqrt(np.einsum("ij,ij->i", v, v))[:, None]
    return v


def _sample_ball(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    return _sample_sphere(rng, n, m) * (rng.random(n) ** (1.0 / m))[:, None]


def _sample_annulus_radii(rng: np.random.Generator, n: int, m: int, r_in: float, r_out: float) -> np.ndarray:
    """Radii with density proportional to r^(m-1) on [r_in, r_out], log-stably."""
    gap = m * (math.log(r_in) - math.log(r_out)) if r_in > 0.0 else -math.inf
    w = math.exp(gap)
    u = rng.random(n)
    return r_out * np.exp(np.log(w + u * (1.0 - w)) / m)


def _sample_annulus(rng: np.random.Generator, n: int, m: int, r_in: float, r_out: float) -> np.ndarray:
    return _sample_sphere(rng, n, m) * _sample_annulus_radii(rng, n, m, r_in, r_out)[:, None]


def _sample_cap_cos(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """cos(phi) with phi in [0, pi/4] distributed proportionally to sin^(m-2).

    Works on s = sin^2(phi) in [0, 1/2], target density s^((m-3)/2) (1-s)^(-1/2):
    propose from the pure power law by inverse CDF, accept with the bounded
    factor sqrt(0.5 / (1 - s)).
    """
    if m == 1:
        return np.ones(n)
    out = np.empty(n)
    filled = 0
    power = 2.0 / (m - 1)
    while filled < n:
        todo = n - filled
        s = 0.5 * rng.random(todo) ** power
        accept = rng.random(todo) < np.sqrt(0.5 / (1.0 - s))
        got = s[accept]
        out[filled : filled + got.size] = got
        filled += got.size
    return np.sqrt(1.0 - out)


def _orthonormal_to(rng: np.random.Generator, units: np.ndarray) -> np.ndarray:
    """Per-row random unit vector orthogonal to the given unit rows (m >= 2)."""
    w = rng.standard_normal(units.shape)
    w -= np.einsum("ij,ij->i", w, units)[:, None] * units
    norms = np.linalg.norm(w, axis=1)
    bad = np.nonzero(norms < 1e-12)[0]
    for i in bad:
        for k in range(units.shape[1]):
            e = np.zeros(units.shape[1])
            e[k] = 1.0
            e -= (e @ units[i]) * units[i]
            if np.linalg.norm(e) > 1e-6:
                w[i] = e
                norms[i] = np.linalg.norm(e)
                break
    return w / norms[:, None]


def certify_inclusions(
    g: EmbeddingGeometry, sample_pairs: int = 0, seed: int = 0
) -> InclusionCertificate:
    """Evaluate the two worst-case inclusion inequalities, optionally sampling.

    Inclusion 1: the seed cell's square has plane diameter^2 at most 8/d and
    the shell-1 tail norm is at most the outer radius, so the worst case is
    8/d + (outer radius)^2 against the squared contact distance. Inclusion 2
    combines the square diameter 2/d, both outer radii, and the cone's
    guaranteed inner product at the inner radii. When sample_pairs > 0 the
    claims are additionally validated on uniformly sampled point pairs.
    """
    g._require_shells()
    d, m, u = g.dimension, g.tail_dim, g.u
    u2 = u * u
    margin1 = u2 - (8.0 / d + g.c1_outer**2)
    worst2 = (
        2.0 / d
        + g.c1_outer**2
        + g.c2_outer**2
        - 2.0 * g.c1_inner * g.c2_inner * COS_HALF_ANGLE
    )
    margin2 = u2 - worst2
    counter1 = counter2 = 0
    done = 0
    if sample_pairs > 0:
        sqd = 1.0 / math.sqrt(d)
        chunk = 10_000
        rng = stream(seed, 101)
        while done < sample_pairs:
            n = min(chunk, sample_pairs - done)
            # inclusion 1: seed point y in the base cell (tail 0), z in shell 1
            yp = _sample_rect(rng, n, -sqd, sqd, -sqd, 0.0)
            zp = _sample_rect(rng, n, 0.0, sqd, 0.0, sqd)
            ztail = _sample_annulus(rng, n, m, g.c1_inner, g.c1_outer)
            d2 = np.sum((zp - yp) ** 2, axis=1) + np.sum(ztail**2, axis=1)
            counter1 += int(np.count_nonzero(d2 >= u2))
            # inclusion 2: y in shell 1, z in the cone-cut shell 2 around y's tail
            yp = _sample_rect(rng, n, 0.0, sqd, 0.0, sqd)
            ytail = _sample_annulus(rng, n, m, g.c1_inner, g.c1_outer)
            zp = _sample_rect(rng, n, 0.0, sqd, 0.0, sqd)
            radii = _sample_annulus_radii(rng, n, m, g.c2_inner, g.c2_outer)
            ynorm = np.linalg.norm(ytail, axis=1)
            axes = ytail / ynorm[:, None]
            if m == 1:
                ztail = axes * radii[:, None]
            else:
                cosphi = _sample_cap_cos(rng, n, m)
                sinphi = np.sqrt(1.0 - cosphi**2)
                perp = _orthonormal_to(rng, axes)
                ztail = (cosphi[:, None] * axes + sinphi[:, None] * perp) * radii[:, None]
            d2 = np.sum((zp - yp) ** 2, axis=1) + np.sum((ztail - ytail) ** 2, axis=1)
            counter2 += int(np.count_nonzero(d2 >= u2))
            done += n
    return InclusionCertificate(
        inclus1=margin1 > 0.0,
        inclus2=margin2 > 0.0,
        margin1=margin1,
        margin2=margin2,
        sampled_pairs=done,
        counterexamples1=counter1,
        counterexamples2=counter2,
    )


@dataclass(frozen=True)
class BranchParameters:
    """Log scalars of the one-step lower bound."""

    log_alpha1: float  # mean first-hop candidate count
    log_alpha2: float  # mean second-hop count per first-hop point
    log_eta: float  # mean count of first-hop points with a surviving branch
    log_interference: float  # mean overlap loss between sibling branch targets


def branch_parameters(g: EmbeddingGeometry) -> BranchParameters:
    rv = region_volumes(g)
    log_lam1, log_lamr = log_two_type_intensities(g.kappa, g.rho, g.dimension)
    log_a1 = log_lam1 + rv.log_c1
    log_a2 = log_lamr + rv.log_d2
    if log_a2 < -37.0:
        # 1 - exp(-a) == a to double precision here
        log_survive = log_a2
    else:
        log_survive = math.log(-math.expm1(-math.exp(min(log_a2, 709.0))))
    return BranchParameters(
        log_alpha1=log_a1,
        log_alpha2=log_a2,
        log_eta=log_a1 + log_survive,
        log_interference=log_a1 + (rv.log_d2pp - rv.log_c2pp),
    )


def rate_limits(rho: float, kappa: float) -> dict[str, float]:
    """Large-d growth rates of the four branch parameters (per dimension)."""
    u = 1.0 + float(rho)
    k = float(kappa)
    return {
        "alpha1": math.log(k * u / 2.0),
        "alpha2": math.log(k * u / (2.0 * rho)),
        "eta": math.log(k * k * u * u / (4.0 * rho)),
        "interference": math.log(k * u / (2.0 * SQRT2)),
    }


def rate_slopes(rho: float, kappa: float, d: int, delta: int = 20) -> dict[str, float]:
    """Empirical log-rates: centered differences of the log parameters in d."""
    if d - delta < 8:
        raise ValueError(f"need d - delta >= 8, got d={d}, delta={delta}")
    hi = branch_parameters(EmbeddingGeometry(d + delta, rho, kappa))
    lo = branch_parameters(EmbeddingGeometry(d - delta, rho, kappa))
    span = 2.0 * delta
    return {
        "alpha1": (hi.log_alpha1 - lo.log_alpha1) / span,
        "alpha2": (hi.log_alpha2 - lo.log_alpha2) / span,
        "eta": (hi.log_eta - lo.log_eta) / span,
        "interference": (hi.log_interference - lo.log_interference) / span,
    }


# --- Monte Carlo of the two-hop link event ---------------------------------


@dataclass(frozen=True)
class GPlusEstimate:
    p_hat: float
    stderr: float
    replicates: int
    truncation_radius: float  # tail window radius; farther points cannot matter
    mean_count_small: float
    mean_count_large: float


def _default_seed_point(g: EmbeddingGeometry) -> np.ndarray:
    x0 = np.zeros(g.dimension)
    x0[1] = -0.5 / math.sqrt(g.dimension)
    return x0


def _two_hop_witness(
    rng: np.random.Generator,
    g: EmbeddingGeometry,
    anchor: np.ndarray,
    rect: tuple[float, float, float, float],
    means: tuple[float, float],
    trunc: float,
):
    """Sample both point types in rect x tail-ball(anchor, trunc) and return
    the lexicographically smallest two-hop witness pair, or None.

    A witness is (x1, x2) with x1 of the radius-1 process within contact
    range of the anchor and x2 of the large-radius process within contact
    range of x1. The tail truncation is lossless: any point that could
    participate lies within 2(1+rho) of the anchor tail.
    """
    d, m, u = g.dimension, g.tail_dim, g.u
    mean1, meanr = means
    n1 = int(rng.poisson(mean1))
    x1 = np.empty((n1, d))
    x1[:, :2] = _sample_rect(rng, n1, *rect)
    x1[:, 2:] = anchor[2:] + trunc * _sample_ball(rng, n1, m)
    nr = int(rng.poisson(meanr))
    x2 = np.empty((nr, d))
    x2[:, :2] = _sample_rect(rng, nr, *rect)
    x2[:, 2:] = anchor[2:] + trunc * _sample_ball(rng, nr, m)
    if n1 == 0 or nr == 0:
        return None
    first = x1[np.sum((x1 - anchor) ** 2, axis=1) < u * u]
    if first.shape[0] == 0:
        return None
    d2 = np.sum((x2[:, None, :] - first[None, :, :]) ** 2, axis=2)
    linked = d2 < u * u
    valid2 = np.nonzero(linked.any(axis=1))[0]
    if valid2.size == 0:
        return None
    order2 = valid2[np.lexsort(x2[valid2, ::-1].T)]
    pick2 = order2[0]
    partners = np.nonzero(linked[pick2])[0]
    pick1 = partners[np.lexsort(first[partners, ::-1].T)][0]
    return first[pick1].copy(), x2[pick2].copy()


def _slab_means(g: EmbeddingGeometry, area: float, trunc: float) -> tuple[float, float]:
    log_lam1, log_lamr = log_two_type_intensities(g.kappa, g.rho, g.dimension)
    log_tail = log_unit_ball_volume(g.tail_dim) + g.tail_dim * math.log(trunc)
    mean1 = math.exp(log_lam1 + math.log(area) + log_tail)
    meanr = math.exp(log_lamr + math.log(area) + log_tail)
    if mean1 + meanr > MAX_EXPECTED_POINTS:
        raise SizingError(
            f"expected {mean1 + meanr:.3g} points per cell at d={g.dimension}, "
            f"kappa={g.kappa}; direct simulation refused"
        )
    return mean1, meanr


def estimate_g_plus(
    g: EmbeddingGeometry, x0=None, replicates: int = 1000, seed: int = 0
) -> GPlusEstimate:
    """Monte Carlo frequency of the two-hop link event from a seed point.

    The forward cell is the plane square (0,1)^2 / sqrt(d) crossed with the
    full tail space, truncated to the ball of radius 2(1+rho) around the
    seed's tail coordinates (sufficient: no farther point can satisfy the
    contact conditions). The result does not depend on the seed's tail
    position by translation invariance.
    """
    d = g.dimension
    sqd = 1.0 / math.sqrt(d)
    x0 = _default_seed_point(g) if x0 is None else np.asarray(x0, dtype=np.float64)
    if x0.shape != (d,):
        raise ValueError(f"seed point must have {d} coordinates")
    if not (-sqd < x0[0] < sqd and -sqd < x0[1] < 0.0):
        raise ValueError("seed point must lie in the base cell")
    trunc = 2.0 * g.u
    means = _slab_means(g, area=1.0 / d, trunc=trunc)
    rect = (0.0, sqd, 0.0, sqd)
    hits = 0
    for rep in range(int(replicates)):
        rng = stream(seed, rep)
        if _two_hop_witness(rng, g, x0, rect, means, trunc) is not None:
            hits += 1
    p_hat = hits / replicates
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / replicates)
    return GPlusEstimate(
        p_hat=p_hat,
        stderr=stderr,
        replicates=int(replicates),
        truncation_radius=trunc,
        mean_count_small=means[0],
        mean_count_large=means[1],
    )


# --- oriented percolation on the directed triangular half-lattice ----------


def lattice_sites(level: int) -> range:
    """First coordinates of the sites at the given level."""
    return range(-level, level + 1, 2)


@dataclass
class OrientedLattice:
    """Edge states and per-site anchor points of one oriented run."""

    n_max: int
    edges: dict  # (a, n, side) -> bool, side in {-1, +1}
    anchors: dict  # (a, n) -> ndarray | None (None encodes the virtual site)

    def is_open(self, a: int, n: int, side: int) -> bool:
        return self.edges.get((a, n, side), False)


@dataclass
class OrientedOutcome:
    survival: bool
    reached_level: int
    leftmost_path: list  # [(a, n), ...] lexicographically smallest open path
    chain: list | None  # alternating Ball chain (embedded mode)
    chain_sites: list | None
    chain_verified: bool | None
    lattice: OrientedLattice
    mode: str
    p_floor: float


def _reachable_by_level(lat: OrientedLattice) -> list[set]:
    reach = [set() for _ in range(lat.n_max + 1)]
    reach[0].add(0)
    for n in range(lat.n_max):
        if not reach[n]:
            break
        for a in reach[n]:
            for side in (-1, 1):
                if lat.is_open(a, n, side):
                    reach[n + 1].add(a + side)
    return reach


def _leftmost_path(lat: OrientedLattice, reach: list[set], top: int) -> list:
    good = [set() for _ in range(top + 1)]
    good[top] = set(reach[top])
    for n in range(top - 1, -1, -1):
        for a in reach[n]:
            if (lat.is_open(a, n, -1) and a - 1 in good[n + 1]) or (
                lat.is_open(a, n, 1) and a + 1 in good[n + 1]
            ):
                good[n].add(a)
    path = [(0, 0)]
    a = 0
    for n in range(top):
        if lat.is_open(a, n, -1) and a - 1 in good[n + 1]:
            a -= 1
        else:
            a += 1
        path.append((a, n + 1))
    return path


def _verify_chain(chain: list, rho: float) -> bool:
    if not chain:
        return False
    for idx, ball in enumerate(chain):
        want = rho if idx % 2 == 0 else 1.0
        if ball.radius != want:
            return False
    for a, b in zip(chain[:-1], chain[1:]):
        if not (np.linalg.norm(a.center - b.center) < a.radius + b.radius):
            return False
    return True


def _simulate_bernoulli(p: float, n_max: int, seed: int) -> OrientedLattice:
    rng = stream(seed)
    edges = {}
    for n in range(n_max):
        for a in lattice_sites(n):
            edges[(a, n, -1)] = bool(rng.random() < p)
            edges[(a, n, 1)] = bool(rng.random() < p)
    return OrientedLattice(n_max=n_max, edges=edges, anchors={})


def _sample_root(g: EmbeddingGeometry, seed: int, sqd: float) -> np.ndarray:
    """Lexicographically smallest large-radius point in the base cell.

    The cell's tail extent is infinite; it is explored in concentric tail
    shells of geometrically growing radius so the restriction stays exact.
    The first shell is sized for about eight expected points.
    """
    d, m = g.dimension, g.tail_dim
    _, log_lamr = log_two_type_intensities(g.kappa, g.rho, g.dimension)
    area = 2.0 / d
    log_base = log_lamr + math.log(area) + log_unit_ball_volume(m)
    r_first = max(2.0 * g.u, math.exp((math.log(8.0) - log_base) / m))
    rng = stream(seed, 3)
    r_prev = 0.0
    r_next = r_first
    for _ in range(200):
        mean = math.exp(log_base + m * math.log(r_next)) - (
            math.exp(log_base + m * math.log(r_prev)) if r_prev > 0.0 else 0.0
        )
        if mean > MAX_EXPECTED_POINTS:
            raise SizingError("root cell point budget exceeded")
        n = int(rng.poisson(mean))
        if n:
            pts = np.empty((n, d))
            pts[:, :2] = _sample_rect(rng, n, -sqd, sqd, -sqd, 0.0)
            if r_prev > 0.0:
                pts[:, 2:] = _sample_annulus(rng, n, m, r_prev, r_next)
            else:
                pts[:, 2:] = r_next * _sample_ball(rng, n, m)
            return pts[np.lexsort(pts[:, ::-1].T)][0].copy()
        r_prev, r_next = r_next, 2.0 * r_next
    raise RuntimeError("no root point found; intensity is numerically zero")


def _simulate_embedded(
    g: EmbeddingGeometry, p_floor: float, n_max: int, seed: int
) -> tuple[OrientedLattice, dict, dict]:
    d = g.dimension
    sqd = 1.0 / math.sqrt(d)
    trunc = 2.0 * g.u
    means = _slab_means(g, area=1.0 / d, trunc=trunc)
    edges: dict = {}
    witnesses: dict = {}
    providers: dict = {}
    anchors: dict = {(0, 0): _sample_root(g, seed, sqd)}
    for n in range(n_max):
        for a in lattice_sites(n):
            anchor = anchors[(a, n)]
            if anchor is None:
                rng = stream(seed, 1, n, a)
                edges[(a, n, -1)] = bool(rng.random() < p_floor)
                edges[(a, n, 1)] = bool(rng.random() < p_floor)
                continue
            for side in (-1, 1):
                rng = stream(seed, 2, n, a, 0 if side < 0 else 1)
                xlo = (a - 1) * sqd if side < 0 else a * sqd
                rect = (xlo, xlo + sqd, n * sqd, (n + 1) * sqd)
                witness = _two_hop_witness(rng, g, anchor, rect, means, trunc)
                edges[(a, n, side)] = witness is not None
                if witness is not None:
                    witnesses[(a, n, side)] = witness
        for b in lattice_sites(n + 1):
            from_left = witnesses.get((b - 1, n, 1))
            from_right = witnesses.get((b + 1, n, -1))
            if from_left is not None:
                anchors[(b, n + 1)] = from_left[1]
                providers[(b, n + 1)] = ((b - 1, n), 1)
            elif from_right is not None:
                anchors[(b, n + 1)] = from_right[1]
                providers[(b, n + 1)] = ((b + 1, n), -1)
            else:
                anchors[(b, n + 1)] = None
    return OrientedLattice(n_max=n_max, edges=edges, anchors=anchors), witnesses, providers


def simulate_oriented(
    p_floor: float,
    n_max: int,
    seed: int = 0,
    mode: str = "bernoulli",
    geometry: EmbeddingGeometry | None = None,
) -> OrientedOutcome:
    """Run one oriented-percolation pass to level n_max.

    In bernoulli mode every edge opens independently with probability
    p_floor. In embedded mode edges out of anchored sites open exactly when
    the two-hop link event occurs in the matching forward cell (with the
    lexicographically smallest witness recorded); orphaned sites become
    virtual and use independent p_floor coins. Each anchored site traces
    back through its anchor-providing edges, so the deepest anchored site
    yields an alternating ball chain which is re-verified before returning.
    """
    if not 0.0 <= p_floor <= 1.0:
        raise ValueError(f"p_floor must be in [0, 1], got {p_floor}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if mode == "bernoulli":
        lattice = _simulate_bernoulli(p_floor, n_max, seed)
        witnesses, providers = {}, {}
    elif mode == "embedded":
        if geometry is None:
            raise ValueError("embedded mode requires an EmbeddingGeometry")
        lattice, witnesses, providers = _simulate_embedded(geometry, p_floor, n_max, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    reach = _reachable_by_level(lattice)
    top = max(n for n, sites in enumerate(reach) if sites)
    survival = top == n_max and bool(reach[n_max])
    path = _leftmost_path(lattice, reach, top)
    chain = chain_sites = None
    verified = None
    if mode == "embedded":
        site = (min(reach[top]), top)
        chain_sites = [site]
        while chain_sites[0] != (0, 0):
            parent, _side = providers[chain_sites[0]]
            chain_sites.insert(0, parent)
        chain = [Ball(lattice.anchors[(0, 0)], geometry.rho)]
        for prev, cur in zip(chain_sites[:-1], chain_sites[1:]):
            parent, side = providers[cur]
            x1, x2 = witnesses[(parent[0], parent[1], side)]
            chain.append(Ball(x1, 1.0))
            chain.append(Ball(x2, geometry.rho))
        verified = _verify_chain(chain, geometry.rho)
    return OrientedOutcome(
        survival=survival,
        reached_level=top,
        leftmost_path=path,
        chain=chain,
        chain_sites=chain_sites,
        chain_verified=verified,
        lattice=lattice,
        mode=mode,
        p_floor=float(p_floor),
    )


def bernoulli_survival(p: float, n_max: int, runs: int, seed: int = 0) -> tuple[float, float]:
    """Survival frequency to level n_max over independent bernoulli runs."""
    survived = 0
    for run in range(int(runs)):
        rng = stream(seed, run)
        reach = np.ones(1, dtype=bool)
        alive = True
        for n in range(n_max):
            k = n + 1
            left = rng.random(k) < p
            right = rng.random(k) < p
            nxt = np.zeros(k + 1, dtype=bool)
            nxt[:-1] = reach & left
            nxt[1:] |= reach & right
            reach = nxt
            if not reach.any():
                alive = False
                break
        survived += int(alive)
    freq = survived / runs
    return freq, math.sqrt(max(freq * (1.0 - freq), 1e-300) / runs)
