"""Connectivity analysis of ball configurations.

Clusters are computed with union-find over candidate pairs produced by a
uniform cell grid whose cell side is the maximum ball diameter, so any two
overlapping balls sit in the same or adjacent cells. Crossing of the core
box is the finite-volume percolation proxy. The generation-by-generation
peeling around a deterministic root ball mirrors the branching-process
comparison used by the two-type analysis.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .geometry import Ball
from .sampling import BallConfiguration, BoxWindow


class UnionFind:
    """Array-based disjoint sets with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


@dataclass
class ClusterLabeling:
    """Partition of ball indices into overlap-connected clusters."""

    labels: np.ndarray  # cluster id per ball, ids in [0, n_clusters)
    n_clusters: int
    sizes: np.ndarray  # ball count per cluster id

    def same_cluster(self, i: int, j: int) -> bool:
        return bool(self.labels[i] == self.labels[j])


class CellGrid:
    """Uniform grid over ball centers for neighbor-candidate queries.

    With cell side >= the maximum ball diameter, any overlapping pair lies
    in cells at Chebyshev distance <= 1. On a torus the cell counts are
    floored so cells are at least that large, and neighbors wrap around.
    """

    def __init__(self, centers: np.ndarray, cell_size: float, torus_sides=None):
        self.centers = centers
        self.cell_size = float(cell_size)
        self.torus_sides = None if torus_sides is None else np.asarray(torus_sides, float)
        self.dim = centers.shape[1] if centers.ndim == 2 else 0
        if self.torus_sides is not None:
            self.n_cells = np.maximum(1, np.floor(self.torus_sides / self.cell_size).astype(int))
            self.cell_len = self.torus_sides / self.n_cells
            keys = np.floor(centers / self.cell_len).astype(int) % self.n_cells
        else:
            keys = np.floor(centers / self.cell_size).astype(int)
        self.cells: dict[tuple, list[int]] = {}
        for i, key in enumerate(map(tuple, keys.tolist())):
            self.cells.setdefault(key, []).append(i)

    def _wrap(self, key: tuple) -> tuple:
        if self.torus_sides is None:
            return key
        return tuple(int(k) % int(n) for k, n in zip(key, self.n_cells))

    def candidate_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs (i, j) living in the same or adjacent cells."""
        left: list[int] = []
        right: list[int] = []
        offsets = itertools.product((-1, 0, 1), repeat=self.dim)
        # keep one representative of each +/- offset pair; zero handled per cell
        half = [off for off in offsets if off > tuple([0] * self.dim)]
        cells = self.cells
        for key, idx in cells.items():
            k = len(idx)
            for a in range(k):
                ia = idx[a]
                for b in range(a + 1, k):
                    left.append(ia)
                    right.append(idx[b])
            for off in half:
                nkey = self._wrap(tuple(c + o for c, o in zip(key, off)))
                if nkey == key:
                    continue
                other = cells.get(nkey)
                if other is not None:
                    for i in idx:
                        for j in other:
                            left.append(i)
                            right.append(j)
        i = np.array(left, dtype=int)
        j = np.array(right, dtype=int)
        if self.torus_sides is not None and i.size:
            # small tori can alias a neighbor through both directions
            lo = np.minimum(i, j)
            hi = np.maximum(i, j)
            uniq = np.unique(np.stack([lo, hi], axis=1), axis=0)
            i, j = uniq[:, 0], uniq[:, 1]
        return i, j

    def near(self, point: np.ndarray, reach: float) -> np.ndarray:
        """Indices of balls in cells within Chebyshev range ceil(reach/cell)."""
        if not self.cells:
            return np.empty(0, dtype=int)
        if self.torus_sides is not None:
            key = tuple(np.floor(point / self.cell_len).astype(int) % self.n_cells)
        else:
            key = tuple(np.floor(point / self.cell_size).astype(int))
        span = int(math.ceil(reach / self.cell_size))
        found: list[int] = []
        for off in itertools.product(range(-span, span + 1), repeat=self.dim):
            idx = self.cells.get(self._wrap(tuple(k + o for k, o in zip(key, off))))
            if idx is not None:
                found.extend(idx)
        return np.unique(np.array(found, dtype=int)) if found else np.empty(0, dtype=int)


def _pair_dist2(config: BallConfiguration, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    delta = config.centers[i] - config.centers[j]
    if config.window.torus:
        sides = np.array(config.window.sides)
        delta = np.abs(delta)
        delta = np.minimum(delta, sides - delta)
    return np.einsum("ij,ij->i", delta, delta)


def _grid_for(config: BallConfiguration) -> CellGrid:
    cell = 2.0 * config.max_radius if config.n_balls else 1.0
    torus_sides = config.window.sides if config.window.torus else None
    return CellGrid(config.centers, cell, torus_sides=torus_sides)


def build_clusters(config: BallConfiguration) -> ClusterLabeling:
    """Union-find partition equal to the transitive closure of ball overlap."""
    n = config.n_balls
    uf = UnionFind(n)
    if n:
        i, j = _grid_for(config).candidate_pairs()
        if i.size:
            rsum = config.radii[i] + config.radii[j]
            hit = _pair_dist2(config, i, j) < rsum * rsum
            for a, b in zip(i[hit], j[hit]):
                uf.union(int(a), int(b))
    roots = np.array([uf.find(k) for k in range(n)], dtype=int)
    uniq, labels = np.unique(roots, return_inverse=True) if n else (np.empty(0, int), np.empty(0, int))
    sizes = np.bincount(labels, minlength=len(uniq)) if n else np.empty(0, int)
    return ClusterLabeling(labels=labels, n_clusters=len(uniq), sizes=sizes)


def _face_touch(config: BallConfiguration, axis: int) -> tuple[np.ndarray, np.ndarray]:
    c = config.centers[:, axis]
    r = config.radii
    side = config.window.sides[axis]
    return np.abs(c) < r, np.abs(c - side) < r


def crossing(config: BallConfiguration, axis: int = 0, labeling: ClusterLabeling | None = None) -> bool:
    """Whether one cluster pierces both opposite faces of the core box."""
    if config.window.torus:
        raise ValueError("crossing is defined for padded boxes, not tori")
    if axis < 0 or axis >= config.window.dimension:
        raise ValueError(f"axis {axis} out of range for dimension {config.window.dimension}")
    if config.n_balls == 0:
        return False
    lab = labeling if labeling is not None else build_clusters(config)
    low, high = _face_touch(config, axis)
    return bool(np.intersect1d(lab.labels[low], lab.labels[high]).size > 0)


def _touches_core_boundary(window: BoxWindow, center: np.ndarray, radius: float) -> bool:
    sides = np.array(window.sides)
    inside = np.all(center - radius >= 0.0) and np.all(center + radius <= sides)
    if inside:
        return False
    gap = np.maximum(np.maximum(-center, center - sides), 0.0)
    return float(np.linalg.norm(gap)) < radius


def alternating_depths(config: BallConfiguration, root: Ball) -> np.ndarray:
    """Shortest alternating depth per ball (-1 for unreachable).

    Depth-n balls must carry the n-th alternating radius: the root (depth
    0) has the large radius, odd depths are radius-1 balls, even depths
    large-radius balls. A ball's radius fixes its depth parity, so a single
    visited set yields exact shortest alternating depths.
    """
    rho = root.radius
    present = set(float(r) for r in np.unique(config.radii))
    if not present <= {1.0, rho}:
        raise ValueError(
            f"configuration radii {sorted(present)} are not the two alternating types (1, {rho})"
        )
    depths = np.full(config.n_balls, -1, dtype=int)
    if config.n_balls == 0:
        return depths
    grid = _grid_for(config)
    rmax = config.max_radius
    frontier_centers = [np.asarray(root.center)]
    frontier_radii = [rho]
    depth = 0
    while frontier_centers:
        depth += 1
        want = 1.0 if depth % 2 == 1 else rho
        next_centers, next_radii = [], []
        for c, r in zip(frontier_centers, frontier_radii):
            cand = grid.near(c, r + rmax)
            if not cand.size:
                continue
            cand = cand[(depths[cand] < 0) & (config.radii[cand] == want)]
            if not cand.size:
                continue
            delta = config.centers[cand] - c
            d2 = np.einsum("ij,ij->i", delta, delta)
            rsum = r + config.radii[cand]
            for h in cand[d2 < rsum * rsum]:
                depths[h] = depth
                next_centers.append(config.centers[h])
                next_radii.append(float(config.radii[h]))
        frontier_centers, frontier_radii = next_centers, next_radii
    return depths


def alternating_path(config: BallConfiguration, root: Ball) -> tuple[bool, int]:
    """(some alternating chain reaches the core-box boundary, max depth)."""
    depths = alternating_depths(config, root)
    reached = depths >= 0
    if not reached.any():
        return False, 0
    touches = any(
        _touches_core_boundary(config.window, config.centers[i], float(config.radii[i]))
        for i in np.nonzero(reached)[0]
    )
    return touches, int(depths[reached].max())


@dataclass
class GenealogyReport:
    """Per-generation ball counts by radius around a deterministic root."""

    generation_counts: list[dict[float, int]]  # index 1 = first generation
    total: int  # descendants of the root, all generations
    truncated: bool

    @property
    def depth(self) -> int:
        return len(self.generation_counts)


def generation_index(
    config: BallConfiguration, root: Ball, max_generations: int = 10_000
) -> np.ndarray:
    """First generation claiming each ball (-1 unreached), by layered peeling."""
    n = config.n_balls
    gen = np.full(n, -1, dtype=int)
    if n == 0:
        return gen
    grid = _grid_for(config)
    rmax = config.max_radius
    frontier = None  # indices of current generation; None means the root itself
    for level in range(1, max_generations + 1):
        if frontier is None:
            seeds = [(np.asarray(root.center), root.radius)]
        else:
            seeds = [(config.centers[k], float(config.radii[k])) for k in frontier]
        new = []
        for c, r in seeds:
            cand = grid.near(c, r + rmax)
            if not cand.size:
                continue
            cand = cand[gen[cand] < 0]
            if not cand.size:
                continue
            delta = config.centers[cand] - c
            d2 = np.einsum("ij,ij->i", delta, delta)
            rsum = r + config.radii[cand]
            hits = cand[d2 < rsum * rsum]
            gen[hits] = level
            new.extend(int(h) for h in hits)
        if not new:
            break
        frontier = new
    return gen


def genealogy(
    config: BallConfiguration, root: Ball, max_generations: int = 10_000
) -> GenealogyReport:
    """Peel balls into generations by first contact with the previous one.

    Generation 1 holds the balls overlapping the root; generation n the
    balls overlapping generation n-1 that no earlier generation claimed.
    The report is flagged truncated when the generation cap is hit with a
    live frontier, or when any claimed ball sits close enough to the padded
    boundary that unsampled balls could have extended the genealogy.
    """
    n = config.n_balls
    if n == 0:
        return GenealogyReport([], 0, False)
    gen = generation_index(config, root, max_generations)
    reached = np.nonzero(gen >= 0)[0]
    if reached.size == 0:
        return GenealogyReport([], 0, False)
    depth = int(gen[reached].max())
    generations: list[dict[float, int]] = []
    for level in range(1, depth + 1):
        counts: dict[float, int] = {}
        for k in np.nonzero(gen == level)[0]:
            counts[float(config.radii[k])] = counts.get(float(config.radii[k]), 0) + 1
        generations.append(counts)
    lo, hi = config.window.lo, config.window.hi
    margin = np.minimum(
        (config.centers[reached] - lo).min(axis=1), (hi - config.centers[reached]).min(axis=1)
    )
    truncated = bool(np.any(margin < config.radii[reached] + config.max_radius))
    if depth == max_generations:
        truncated = True
    return GenealogyReport(generations, int(reached.size), truncated)


def write_cluster_csv(config: BallConfiguration, fh: IO[str], axis: int = 0) -> None:
    """One row per cluster: cluster id, size, crossing flag."""
    lab = build_clusters(config)
    if config.window.torus:
        spanning = np.zeros(lab.n_clusters, dtype=bool)
    else:
        low, high = _face_touch(config, axis)
        spanning = np.zeros(lab.n_clusters, dtype=bool)
        both = np.intersect1d(lab.labels[low], lab.labels[high])
        spanning[both] = True
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["cluster_id", "size", "crossing"])
    for cid in range(lab.n_clusters):
        writer.writerow([cid, int(lab.sizes[cid]), int(spanning[cid])])
