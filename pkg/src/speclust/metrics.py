"""Partition quality measures: Rand index, per-cluster badness, brute force."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GraphValidationError
from .graph import WeightedGraph, cut
from .operators import LaplacianOperator
from .partition import Partition

__all__ = ["rand_index", "QualityReport", "badness", "brute_force_phi"]


def rand_index(a, b) -> float:
    """Fraction of vertex pairs on which two labelings agree.

    A pair agrees if it is co-clustered in both labelings or separated in
    both. Label ids themselves are irrelevant. Returns 1.0 for fewer than
    two points (no pairs to disagree on).
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise GraphValidationError("labelings must have equal length")
    n = a.size
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def pairs2(counts):
        return int((counts * (counts - 1) // 2).sum())

    total = n * (n - 1) // 2
    same_both = pairs2(contingency)
    same_a = pairs2(contingency.sum(axis=1))
    same_b = pairs2(contingency.sum(axis=0))
    agreements = total + 2 * same_both - same_a - same_b
    return agreements / total


@dataclass
class QualityReport:
    """Per-cluster badness plus optional external scores."""

    per_cluster_badness: np.ndarray
    max_badness: float
    rand_index: Optional[float] = None
    certificate: Optional[float] = None
    warnings: list = field(default_factory=list)


def badness(g: WeightedGraph, h_op: LaplacianOperator, partition: Partition,
            ground_truth=None, certificate: Optional[float] = None) -> QualityReport:
    """Score a partition: badness of cluster C is cut_G(C) / cut_H(C).

    A cluster whose constraint cut is zero has badness +inf (it separates
    nothing the constraints care about); this is reported, not raised.
    """
    phis = np.empty(partition.k)
    warnings = []
    for c in range(partition.k):
        members = partition.cluster(c)
        cg = cut(g, members)
        ch = h_op.cut(members)
        if ch > 0:
            phis[c] = cg / ch
        else:
            phis[c] = np.inf
            warnings.append(f"cluster {c} has zero constraint cut; badness is +inf")
    ri = None
    if ground_truth is not None:
        ri = rand_index(ground_truth, partition.labels)
    return QualityReport(
        per_cluster_badness=phis,
        max_badness=float(np.max(phis)),
        rand_index=ri,
        certificate=certificate,
        warnings=warnings,
    )


def brute_force_phi(g: WeightedGraph, h_op: LaplacianOperator, max_n: int = 20):
    """Exact minimum of cut_G(S)/cut_H(S) over all proper bipartitions.

    Exponential enumeration, refused above ``max_n`` vertices. Subsets
    with cut_H = 0 are skipped. Returns (value, boolean mask of the
    minimizer); ties resolve to the lowest subset index, so the result is
    deterministic.
    """
    n = g.n
    if n > max_n:
        raise GraphValidationError(f"brute force is limited to n <= {max_n}")
    if n < 2:
        raise GraphValidationError("need at least two vertices")
    count = 1 << (n - 1)  # vertex n-1 always on the complement side
    subset_ids = np.arange(1, count, dtype=np.uint64)
    member = np.zeros((count - 1, n), dtype=bool)
    for bit in range(n - 1):
        member[:, bit] = (subset_ids >> np.uint64(bit)) & np.uint64(1) != 0

    cut_g = np.zeros(count - 1)
    for u, v, w in zip(g.u, g.v, g.w):
        cut_g += w * (member[:, u] != member[:, v])
    cut_h = np.zeros(count - 1)
    if h_op.graph is not None:
        hg = h_op.graph
        for u, v, w in zip(hg.u, hg.v, hg.w):
            cut_h += w * (member[:, u] != member[:, v])
    if h_op.has_rank_one:
        d, vol = h_op.deg.d, h_op.deg.vol
        vol_s = member @ d
        cut_h += h_op.scale * vol_s * (vol - vol_s) / vol

    valid = cut_h > 0
    if not valid.any():
        raise GraphValidationError("no bipartition has a positive constraint cut")
    ratios = np.where(valid, cut_g / np.where(valid, cut_h, 1.0), np.inf)
    best = int(np.argmin(ratios))
    return float(ratios[best]), member[best].copy()
