"""Folding must-link / cannot-link constraints into a pair of Laplacians.

Must-link pairs are added as edges to the data graph (numerator side G);
cannot-link pairs form the sparse part of the denominator side H, which
additionally carries a scaled complete "demand" graph K_ij = d_i d_j/vol
as a rank-one-corrected term. Minimizing x^T L_G x / x^T L_H x then
trades off data smoothness + must-links against cannot-link separation
+ balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    ConstraintConflictError,
    DisconnectedGraphError,
    GraphValidationError,
)
from .graph import DegreeVector, WeightedGraph, is_connected
from .operators import LaplacianOperator

# Constraint weights are floored here so the merged graphs always satisfy
# the strictly-positive-weight invariant.
WEIGHT_FLOOR = 1e-12

Pair = Tuple[int, int, Optional[float]]


@dataclass
class ConstraintSet:
    """Must-link and cannot-link vertex pairs with optional weights.

    Each entry is ``(u, v, w)`` with ``w=None`` meaning "use the
    degree-based automatic weight at merge time".
    """

    ml: List[Pair] = field(default_factory=list)
    cl: List[Pair] = field(default_factory=list)

    @classmethod
    def from_labeled_vertices(cls, ids, labels) -> "ConstraintSet":
        """Expand labeled vertices into all pairwise constraints.

        Same-label pairs become must-links, different-label pairs become
        cannot-links, enumerated over sorted vertex ids (i < j), all with
        automatic weights.
        """
        ids = np.asarray(ids, dtype=np.int64).ravel()
        labels = np.asarray(labels).ravel()
        if ids.shape != labels.shape:
            raise GraphValidationError("ids and labels must have equal length")
        if np.unique(ids).size != ids.size:
            raise GraphValidationError("labeled vertex ids must be distinct")
        order = np.argsort(ids)
        ids, labels = ids[order], labels[order]
        out = cls()
        for i in range(ids.size):
            for j in range(i + 1, ids.size):
                pair = (int(ids[i]), int(ids[j]), None)
                (out.ml if labels[i] == labels[j] else out.cl).append(pair)
        return out

    def __len__(self) -> int:
        return len(self.ml) + len(self.cl)

    def is_empty(self) -> bool:
        return not self.ml and not self.cl


@dataclass(frozen=True)
class MergedProblem:
    """The two Laplacian sides of the constrained problem.

    Attributes
    ----------
    g : WeightedGraph
        Data graph plus must-link edges (numerator side).
    h_sparse : WeightedGraph
        Cannot-link edges only (may be empty).
    h_scale : float
        Coefficient of the demand graph K inside H.
    deg : DegreeVector
        Degrees of the *data* graph, which define K.
    """

    g: WeightedGraph
    h_sparse: WeightedGraph
    h_scale: float
    deg: DegreeVector

    def lg_operator(self) -> LaplacianOperator:
        return LaplacianOperator.from_graph(self.g)

    def lh_operator(self) -> LaplacianOperator:
        return LaplacianOperator(
            self.g.n, graph=self.h_sparse, rank_one=(self.h_scale, self.deg)
        )


def auto_weight(deg: DegreeVector, u: int, v: int) -> float:
    """Degree-based constraint weight d_u d_v / (d_min d_max)."""
    d = deg.d
    if not (0 <= u < deg.n and 0 <= v < deg.n):
        raise GraphValidationError("constraint endpoint out of range")
    dmin = float(d.min())
    if dmin <= 0 or d[u] <= 0 or d[v] <= 0:
        if d[u] <= 0:
            culprit = u
        elif d[v] <= 0:
            culprit = v
        else:
            culprit = int(np.flatnonzero(d <= 0)[0])
        raise GraphValidationError(
            f"vertex {culprit} is isolated (zero degree); automatic "
            "constraint weights need strictly positive degrees"
        )
    return float(d[u]) * float(d[v]) / (dmin * float(d.max()))


def _canonical_pairs(pairs) -> set:
    return {(min(u, v), max(u, v)) for u, v, _ in pairs}


def check_conflicts(constraints: ConstraintSet) -> None:
    """Raise if any pair is both must-link and cannot-link."""
    clash = _canonical_pairs(constraints.ml) & _canonical_pairs(constraints.cl)
    if clash:
        sample = sorted(clash)[:5]
        raise ConstraintConflictError(
            f"{len(clash)} pair(s) appear as both must-link and cannot-link, "
            f"e.g. {sample}"
        )


def _constraint_edges(pairs, deg: DegreeVector, n: int):
    u = np.empty(len(pairs), dtype=np.int64)
    v = np.empty(len(pairs), dtype=np.int64)
    w = np.empty(len(pairs), dtype=np.float64)
    for i, (a, b, weight) in enumerate(pairs):
        if not (0 <= a < n and 0 <= b < n):
            raise GraphValidationError(f"constraint endpoint out of range: ({a}, {b})")
        if a == b:
            raise GraphValidationError(f"constraint pair may not be a self-pair: {a}")
        if weight is None:
            weight = auto_weight(deg, a, b)
        elif not np.isfinite(weight) or weight <= 0:
            raise GraphValidationError(f"constraint weight must be positive: {weight}")
        u[i], v[i], w[i] = a, b, max(float(weight), WEIGHT_FLOOR)
    return u, v, w


def merge(
    g_data: WeightedGraph,
    constraints: ConstraintSet,
    demand_normalization: str = "min-edge",
) -> MergedProblem:
    """Combine a data graph and constraints into the two problem Laplacians.

    Parameters
    ----------
    g_data : WeightedGraph
        Connected data affinity graph.
    constraints : ConstraintSet
        Must-link / cannot-link pairs; ``None`` weights get the automatic
        degree-based weight.
    demand_normalization : str
        How the demand graph K is scaled inside H. ``"min-edge"``
        (default) divides K by its minimum off-diagonal entry and then by
        n, so the lightest implicit edge has weight 1/n; ``"volume"``
        uses plain K/n.

    Returns
    -------
    MergedProblem
        With G = data + must-links, H = cannot-links + h_scale * K.
    """
    n = g_data.n
    if n < 2:
        raise GraphValidationError("merging needs at least two vertices")
    if not is_connected(g_data):
        raise DisconnectedGraphError(
            "data graph is disconnected; restrict to the largest component "
            "(speclust.graph.largest_component) before merging"
        )
    check_conflicts(constraints)
    deg = g_data.degree_vector()

    ml_u, ml_v, ml_w = _constraint_edges(constraints.ml, deg, n)
    g = WeightedGraph(
        n,
        np.concatenate([g_data.u, ml_u]),
        np.concatenate([g_data.v, ml_v]),
        np.concatenate([g_data.w, ml_w]),
    )

    cl_u, cl_v, cl_w = _constraint_edges(constraints.cl, deg, n)
    h_sparse = WeightedGraph(n, cl_u, cl_v, cl_w)

    if demand_normalization == "min-edge":
        two_smallest = np.partition(deg.d, 1)[:2]
        min_k = float(two_smallest[0]) * float(two_smallest[1]) / deg.vol
        h_scale = 1.0 / (n * min_k)
    elif demand_normalization == "volume":
        h_scale = 1.0 / n
    else:
        raise GraphValidationError(
            f"unknown demand normalization: {demand_normalization!r}"
        )

    return MergedProblem(g=g, h_sparse=h_sparse, h_scale=h_scale, deg=deg)
