"""Turning embeddings into vertex partitions: threshold sweeps and k-means."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from . import graph as graphmod
from .errors import GraphValidationError, IllPosedProblemError
from .graph import DegreeVector, WeightedGraph
from .operators import LaplacianOperator

__all__ = ["Partition", "SweepResult", "cheeger_sweep", "kmeans",
           "refine_per_component_sweep"]


@dataclass
class Partition:
    """Cluster labels in 0..k-1, every cluster nonempty."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.k < 1:
            raise GraphValidationError("partition needs k >= 1")
        counts = np.bincount(self.labels, minlength=self.k)
        if self.labels.min(initial=0) < 0 or self.labels.max(initial=0) >= self.k:
            raise GraphValidationError("labels out of range for k")
        if counts.size > self.k or np.any(counts[: self.k] == 0):
            raise GraphValidationError("every cluster must be nonempty")

    def cluster(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.labels == i)


@dataclass
class SweepResult:
    """Best threshold cut of a value-ordered sweep, plus its certificate.

    ``mask`` marks the best prefix S by the ratio cut_G(S)/cut_H(S);
    ``ratio`` is that minimum; ``demand_ratio`` is the corresponding
    minimum of cut_G/cut_K over prefixes (K the demand graph of G's
    degrees); ``certificate`` = ratio * demand_ratio / 4 is a lower bound
    on the pencil's second eigenvalue.
    """

    mask: np.ndarray
    ratio: float
    demand_ratio: float
    certificate: float
    prefix_size: int

    def to_partition(self) -> Partition:
        return Partition(labels=self.mask.astype(np.int64), k=2)


def cheeger_sweep(
    g: WeightedGraph,
    h_op: LaplacianOperator,
    x: np.ndarray,
    deg: Optional[DegreeVector] = None,
) -> SweepResult:
    """Sweep the n-1 prefixes of the value-sorted vertex order.

    Vertices are sorted by x; for each proper prefix S the ratio
    cut_G(S)/cut_H(S) is evaluated (prefixes with cut_H = 0 are skipped)
    and the minimizer returned, ties broken toward smaller cut_G and then
    smaller prefix. All n-1 prefix cuts are computed in O(m + n) via
    difference arrays, so the sweep is linear after the sort.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    n = g.n
    if x.shape[0] != n:
        raise GraphValidationError("sweep vector length does not match graph")
    if n < 2:
        raise GraphValidationError("sweep needs at least two vertices")
    if np.max(x) == np.min(x):
        raise GraphValidationError("sweep vector is constant; nothing to threshold")
    if deg is None:
        deg = g.degree_vector()

    order = np.argsort(x, kind="stable")
    cuts_g = graphmod.prefix_cut_profile(g, order)
    cuts_h = h_op.prefix_cuts(order)
    cuts_k = graphmod.demand_prefix_profile(deg, order)

    valid = cuts_h > 0
    if not valid.any():
        raise IllPosedProblemError(
            "every sweep prefix has zero constraint cut; the denominator side "
            "cannot rank thresholds"
        )
    ratios = np.where(valid, cuts_g / np.where(valid, cuts_h, 1.0), np.inf)
    best = np.lexsort((np.arange(n - 1), cuts_g, ratios))[0]

    valid_k = cuts_k > 0
    demand_ratio = float(np.min(cuts_g[valid_k] / cuts_k[valid_k]))

    mask = np.zeros(n, dtype=bool)
    mask[order[: best + 1]] = True
    ratio = float(ratios[best])
    return SweepResult(
        mask=mask,
        ratio=ratio,
        demand_ratio=demand_ratio,
        certificate=ratio * demand_ratio / 4.0,
        prefix_size=int(best + 1),
    )


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-squared-weighted seeding: spread initial centers apart."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    dist2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = dist2.sum()
        if total > 0:
            probs = dist2 / total
            idx = int(rng.choice(n, p=probs))
        else:
            idx = int(rng.integers(n))
        centers[i] = points[idx]
        dist2 = np.minimum(dist2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int):
    """Standard Lloyd iterations; returns (labels, centers, objective, history)."""
    k = centers.shape[0]
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    history = []
    for _ in range(max_iter):
        dist2 = cdist(points, centers, metric="sqeuclidean")
        new_labels = np.argmin(dist2, axis=1)
        closest = dist2[np.arange(points.shape[0]), new_labels]
        # Re-seed any emptied cluster at the point farthest from its center.
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(closest))
                new_labels[far] = c
                closest[far] = 0.0
        history.append(float(closest.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            centers[c] = points[members].mean(axis=0)
    dist2 = cdist(points, centers, metric="sqeuclidean")
    objective = float(dist2[np.arange(points.shape[0]), labels].sum())
    return labels, centers, objective, history


def kmeans(
    points: np.ndarray,
    k: int,
    restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
    include: Optional[np.ndarray] = None,
    threads: int = 1,
) -> Partition:
    """Best-of-``restarts`` k-means, deterministic for a fixed seed.

    ``include`` optionally masks the rows that participate in seeding and
    centroid updates; excluded rows are assigned to their nearest final
    centroid afterwards. Restarts draw from independent child streams of
    the seed, so the result is identical whether they run sequentially or
    on a thread pool.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if include is None:
        include = np.ones(n, dtype=bool)
    active = points[include]
    if k < 1:
        raise GraphValidationError("k must be at least 1")
    if np.unique(active, axis=0).shape[0] < k:
        raise GraphValidationError(
            f"k={k} exceeds the number of distinct points available"
        )
    seeds = np.random.SeedSequence(seed).spawn(restarts)

    def one_restart(i):
        rng = np.random.default_rng(seeds[i])
        centers = _seed_centers(active, k, rng)
        labels, centers, objective, _ = _lloyd(active, centers, max_iter)
        return objective, i, labels, centers

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_restart, range(restarts)))
    else:
        results = [one_restart(i) for i in range(restarts)]
    _, _, best_labels, best_centers = min(results, key=lambda t: (t[0], t[1]))

    labels = np.empty(n, dtype=np.int64)
    labels[include] = best_labels
    rest = ~include
    if rest.any():
        dist2 = cdist(points[rest], best_centers, metric="sqeuclidean")
        labels[rest] = np.argmin(dist2, axis=1)
    return Partition(labels=labels, k=k)


def _cluster_prefix_phis(g, h_op, members_order):
    """cut_G/cut_H of every proper prefix of a cluster ordering.

    The cluster's vertices are placed first in a global ordering, so the
    first ``m-1`` prefix cuts are cuts of prefix-vs-everything-else.
    """
    others = np.setdiff1d(np.arange(g.n), members_order, assume_unique=False)
    full_order = np.concatenate([members_order, others])
    upto = members_order.size - 1
    cg = graphmod.prefix_cut_profile(g, full_order)[:upto]
    ch = h_op.prefix_cuts(full_order)[:upto]
    return np.where(ch > 0, cg / np.where(ch > 0, ch, 1.0), np.inf)


def refine_per_component_sweep(
    partition: Partition,
    row_norms: np.ndarray,
    g: WeightedGraph,
    h_op: LaplacianOperator,
) -> Partition:
    """Optionally split clusters by sweeping them in embedding-length order.

    Each cluster's vertices are ordered by their embedding row norm; for
    every proper prefix S the split (S, C\\S) is scored by the larger of
    the two parts' badness cut_G/cut_H (measured against the whole rest
    of the graph), and the best split replaces the cluster only if it
    beats the cluster's own badness. Deterministic; never merges.
    """
    row_norms = np.asarray(row_norms, dtype=np.float64).ravel()
    labels = partition.labels.copy()
    next_label = partition.k
    for c in range(partition.k):
        members = np.flatnonzero(partition.labels == c)
        if members.size < 2:
            continue
        order_in = members[np.lexsort((members, row_norms[members]))]
        whole_g = graphmod.cut(g, members)
        whole_h = h_op.cut(members)
        whole = whole_g / whole_h if whole_h > 0 else np.inf

        phi_fwd = _cluster_prefix_phis(g, h_op, order_in)
        phi_bwd = _cluster_prefix_phis(g, h_op, order_in[::-1])
        # the size-i prefix pairs with the reversed ordering's size-(m-i) prefix
        scores = np.maximum(phi_fwd, phi_bwd[::-1])
        best = int(np.argmin(scores))
        if scores[best] < whole:
            split = order_in[: best + 1]
            labels[split] = next_label
            next_label += 1
    return Partition(labels=labels, k=next_label)
