"""Weighted undirected graphs and the cut/quadratic-form primitives built on them.

Graphs are stored coalesced: one canonical record per undirected edge
(u < v, duplicates summed), plus a cached CSR adjacency with both
directions materialized so matvecs and degree sums are single linear
scans. All quadratic forms and cuts are computed edge-wise from the
coalesced arrays; no dense matrix is ever formed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import GraphValidationError


@dataclass(frozen=True)
class DegreeVector:
    """Vertex degrees ``d`` (weighted) together with their sum ``vol``."""

    d: np.ndarray
    vol: float

    @property
    def n(self) -> int:
        return self.d.shape[0]


def _coalesce(n, u, v, w):
    """Canonicalize edge arrays: u < v, groups sorted by (u, v, w), duplicates summed.

    Sorting duplicate groups by weight as well makes the result bitwise
    independent of input order.
    """
    u = np.asarray(u, dtype=np.int64).ravel()
    v = np.asarray(v, dtype=np.int64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    if not (u.shape == v.shape == w.shape):
        raise GraphValidationError("edge arrays u, v, w must have equal length")
    if u.size == 0:
        return u, v, w
    if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n:
        raise GraphValidationError(f"edge endpoint out of range for n={n}")
    if np.any(u == v):
        raise GraphValidationError("self-loops are not allowed")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise GraphValidationError("edge weights must be finite and positive")
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    order = np.lexsort((w, hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    new_group = np.empty(lo.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    starts = np.flatnonzero(new_group)
    w_sum = np.add.reduceat(w, starts)
    return lo[starts], hi[starts], w_sum


class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with positive edge weights.

    Parameters
    ----------
    n : int
        Number of vertices. May exceed the largest endpoint (isolated
        vertices are allowed); a graph with no edges is valid.
    u, v, w : array_like
        Parallel edge arrays. Endpoints are canonicalized to u < v and
        duplicate pairs are coalesced by summing their weights.
    """

    __slots__ = ("n", "u", "v", "w", "_adj", "_deg")

    def __init__(self, n: int, u=(), v=(), w=()):
        n = int(n)
        if n <= 0:
            raise GraphValidationError("graph needs at least one vertex")
        self.n = n
        self.u, self.v, self.w = _coalesce(n, u, v, w)
        self._adj = None
        self._deg = None

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Build from an iterable of (u, v, w) triples."""
        edges = list(edges)
        if not edges:
            return cls(n)
        arr = np.asarray(edges, dtype=np.float64)
        return cls(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2])

    @property
    def num_edges(self) -> int:
        return self.u.size

    def adjacency(self) -> sp.csr_array:
        """Symmetric CSR adjacency with both edge directions materialized."""
        if self._adj is None:
            rows = np.concatenate([self.u, self.v])
            cols = np.concatenate([self.v, self.u])
            vals = np.concatenate([self.w, self.w])
            self._adj = sp.csr_array(
                (vals, (rows, cols)), shape=(self.n, self.n), dtype=np.float64
            )
        return self._adj

    def degree_vector(self) -> DegreeVector:
        """Weighted degrees d_i = sum_j w_ij and their total vol = sum_i d_i."""
        if self._deg is None:
            d = np.zeros(self.n)
            np.add.at(d, self.u, self.w)
            np.add.at(d, self.v, self.w)
            self._deg = DegreeVector(d=d, vol=float(d.sum()))
        return self._deg

    def __repr__(self):  # pragma: no cover - debugging nicety
        return f"WeightedGraph(n={self.n}, m={self.num_edges})"


def as_mask(n: int, subset) -> np.ndarray:
    """Normalize a vertex subset (bool mask or index array) to a bool mask."""
    s = np.asarray(subset)
    if s.dtype == bool:
        if s.shape != (n,):
            raise GraphValidationError(f"boolean mask must have shape ({n},)")
        return s
    s = s.astype(np.int64).ravel()
    if s.size and (s.min() < 0 or s.max() >= n):
        raise GraphValidationError("vertex index out of range")
    mask = np.zeros(n, dtype=bool)
    mask[s] = True
    return mask


def laplacian_quadratic(g: WeightedGraph, x) -> float:
    """sum_{edges {i,j}} w_ij (x_i - x_j)^2, computed edge-wise."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != g.n:
        raise GraphValidationError("vector length does not match vertex count")
    diff = x[g.u] - x[g.v]
    return float(np.dot(g.w, diff * diff))


def cut(g: WeightedGraph, subset) -> float:
    """Total weight of edges with exactly one endpoint in the subset."""
    mask = as_mask(g.n, subset)
    crossing = mask[g.u] != mask[g.v]
    return float(g.w[crossing].sum())


def demand_cut(deg: DegreeVector, subset) -> float:
    """Cut of the complete demand graph K_ij = d_i d_j / vol: vol(S) vol(S̄) / vol."""
    mask = as_mask(deg.n, subset)
    vol_s = float(deg.d[mask].sum())
    return vol_s * (deg.vol - vol_s) / deg.vol


def prefix_cut_profile(g: WeightedGraph, order) -> np.ndarray:
    """Cuts of all n-1 proper prefixes of a vertex ordering, in O(m + n).

    ``out[i-1]`` is the cut separating the first ``i`` vertices of
    ``order`` from the rest, obtained from per-edge difference arrays:
    an edge whose endpoints sit at sorted positions a < b crosses
    exactly the prefixes of size a+1 .. b.
    """
    order = np.asarray(order, dtype=np.int64)
    n = g.n
    if order.shape != (n,):
        raise GraphValidationError("order must be a permutation of all vertices")
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    pu, pv = pos[g.u], pos[g.v]
    a = np.minimum(pu, pv)
    b = np.maximum(pu, pv)
    enter = np.bincount(a + 1, weights=g.w, minlength=n + 1)
    leave = np.bincount(b + 1, weights=g.w, minlength=n + 1)
    return np.cumsum(enter - leave)[1:n]


def demand_prefix_profile(deg: DegreeVector, order) -> np.ndarray:
    """Demand-graph cuts of all n-1 proper prefixes of a vertex ordering."""
    order = np.asarray(order, dtype=np.int64)
    vol_s = np.cumsum(deg.d[order])[:-1]
    return vol_s * (deg.vol - vol_s) / deg.vol


def connected_components(g: WeightedGraph):
    """(number of components, per-vertex component labels)."""
    ncomp, labels = csgraph.connected_components(g.adjacency(), directed=False)
    return int(ncomp), labels


def is_connected(g: WeightedGraph) -> bool:
    return connected_components(g)[0] == 1


def largest_component(g: WeightedGraph):
    """Restrict to the largest connected component.

    Returns
    -------
    (sub, index) : WeightedGraph, ndarray
        ``index[i]`` is the original vertex id of the subgraph's vertex i.
    """
    ncomp, labels = connected_components(g)
    if ncomp == 1:
        return g, np.arange(g.n, dtype=np.int64)
    sizes = np.bincount(labels, minlength=ncomp)
    keep_label = int(np.argmax(sizes))
    index = np.flatnonzero(labels == keep_label).astype(np.int64)
    remap = -np.ones(g.n, dtype=np.int64)
    remap[index] = np.arange(index.size)
    sel = (labels[g.u] == keep_label) & (labels[g.v] == keep_label)
    sub = WeightedGraph(index.size, remap[g.u[sel]], remap[g.v[sel]], g.w[sel])
    return sub, index
