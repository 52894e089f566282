"""Synthetic datasets: interleaved moons, noisy k-NN graphs, sampled constraints."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import GraphValidationError
from .graph import WeightedGraph
from .merge import ConstraintSet

__all__ = [
    "LabeledPointCloud",
    "four_moons",
    "knn_graph",
    "erdos_renyi_graph",
    "noisy_knn",
    "sample_constraints",
]


@dataclass
class LabeledPointCloud:
    points: np.ndarray  # (n, 2)
    labels: np.ndarray  # (n,) ints


def four_moons(n: int, noise_sd: float = 0.1, seed: int = 0) -> LabeledPointCloud:
    """Four interleaved half-annuli: two up-facing, two down-facing.

    Moons 0 and 2 open downward (upper arcs), moons 1 and 3 open upward
    and sit shifted into their partner's arch; the second pair is offset
    horizontally so the four arcs form an interlocking chain. Points get
    iid Gaussian coordinate noise. Sizes split as evenly as possible.
    """
    if n < 4:
        raise GraphValidationError("four moons need at least four points")
    rng = np.random.default_rng(seed)
    sizes = [n // 4 + (1 if i < n % 4 else 0) for i in range(4)]
    points = []
    labels = []
    for moon, size in enumerate(sizes):
        t = rng.uniform(0.0, np.pi, size)
        offset = 2.5 * (moon // 2)
        if moon % 2 == 0:  # up-facing arc
            xs = offset + np.cos(t)
            ys = np.sin(t)
        else:  # down-facing arc, tucked under the previous one
            xs = offset + 1.0 - np.cos(t)
            ys = 0.5 - np.sin(t)
        pts = np.column_stack([xs, ys])
        if noise_sd > 0:
            pts = pts + rng.normal(0.0, noise_sd, pts.shape)
        points.append(pts)
        labels.append(np.full(size, moon, dtype=np.int64))
    return LabeledPointCloud(points=np.vstack(points), labels=np.concatenate(labels))


def _as_points(cloud) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, LabeledPointCloud) else cloud
    return np.asarray(pts, dtype=np.float64)


def knn_graph(cloud, k: int) -> WeightedGraph:
    """Symmetrized k-nearest-neighbor graph with unit weights."""
    points = _as_points(cloud)
    n = points.shape[0]
    if not 1 <= k < n:
        raise GraphValidationError("k must be in [1, n)")
    tree = cKDTree(points)
    _, nbr = tree.query(points, k=k + 1)
    src = np.repeat(np.arange(n), k)
    dst = nbr[:, 1:].ravel()  # drop self-matches in column 0
    keep = src != dst  # guard against duplicate points
    return _unit_union(n, [(src[keep], dst[keep])])


def erdos_renyi_graph(n: int, p: float, seed) -> WeightedGraph:
    """G(n, p): each of the C(n,2) pairs is an edge independently with prob p.

    Sampled as a Binomial edge count plus a uniform without-replacement
    draw of pair indices, which is distribution-identical and avoids
    materializing all C(n,2) coin flips.
    """
    if not 0 <= p <= 1:
        raise GraphValidationError("edge probability must be in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    total = n * (n - 1) // 2
    count = int(rng.binomial(total, p)) if p < 1 else total
    if count == 0:
        return WeightedGraph(n)
    flat = rng.choice(total, size=count, replace=False)
    # invert the row-major upper-triangle enumeration: index t -> pair (i, j)
    offsets = np.concatenate([[0], np.cumsum(n - 1 - np.arange(n - 1))])
    i = np.searchsorted(offsets, flat, side="right") - 1
    j = flat - offsets[i] + i + 1
    return _unit_union(n, [(i, j)])


def _unit_union(n, pairs) -> WeightedGraph:
    """Union of edge sets with all weights forced to 1 (duplicates deduped)."""
    us = np.concatenate([np.asarray(p[0], dtype=np.int64) for p in pairs])
    vs = np.concatenate([np.asarray(p[1], dtype=np.int64) for p in pairs])
    lo, hi = np.minimum(us, vs), np.maximum(us, vs)
    uniq = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return WeightedGraph(n, uniq[:, 0], uniq[:, 1], np.ones(uniq.shape[0]))


def noisy_knn(cloud, k_g: int, l_g: float, seed: int = 0) -> WeightedGraph:
    """Symmetrized k_g-NN graph unioned with G(n, l_g/n) noise edges.

    All edges have weight 1; an edge present in both parts stays weight 1.
    """
    points = _as_points(cloud)
    n = points.shape[0]
    base = knn_graph(points, k_g)
    rng = np.random.default_rng(seed)
    noise = erdos_renyi_graph(n, l_g / n, rng)
    return _unit_union(n, [(base.u, base.v), (noise.u, noise.v)])


def sample_constraints(labels, m: int, seed: int = 0) -> ConstraintSet:
    """Reveal the labels of m seeded-random vertices as pairwise constraints.

    The m vertices are drawn without replacement; every same-label pair
    becomes a must-link and every cross-label pair a cannot-link, with
    automatic weights (the clique expansion of the revealed labels).
    """
    labels = np.asarray(labels).ravel()
    n = labels.size
    if not 0 <= m <= n:
        raise GraphValidationError("m must be between 0 and n")
    rng = np.random.default_rng(seed)
    ids = np.sort(rng.choice(n, size=m, replace=False))
    return ConstraintSet.from_labeled_vertices(ids, labels[ids])
