"""Matrix-free Laplacian operators and preconditioned conjugate-gradient solves.

An operator here is L = L_sparse + scale * (D_d - d d^T / vol): the
Laplacian of a weighted graph plus an optional rank-one-corrected
"demand" part built from a degree vector d (the Laplacian of the
complete graph K_ij = d_i d_j / vol). Both parts annihilate constant
vectors, so every operator maps into (and is consistent on) the
orthogonal complement of the all-ones vector.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import graph as graphmod
from .errors import (
    DisconnectedGraphError,
    GraphValidationError,
    IterativeSolveError,
)
from .graph import DegreeVector, WeightedGraph

__all__ = [
    "LaplacianOperator",
    "Preconditioner",
    "JacobiPreconditioner",
    "GaussSeidelPreconditioner",
    "AggregationPreconditioner",
    "build_preconditioner",
    "solve",
]

# Relative diagonal shift used inside preconditioners only (never in the
# operator itself), guarding zero-degree rows.
PRECONDITIONER_SHIFT = 1e-10


class LaplacianOperator:
    """Symmetric PSD operator ``L_sparse + scale * (D_d - d d^T / vol)``.

    Parameters
    ----------
    n : int
        Dimension.
    graph : WeightedGraph, optional
        Sparse part (its Laplacian). ``None`` means no sparse part.
    rank_one : (float, DegreeVector), optional
        ``(scale, d)`` for the demand part. ``None`` means absent.
    """

    __slots__ = ("n", "graph", "scale", "deg", "_diag")

    def __init__(self, n, graph=None, rank_one=None):
        self.n = int(n)
        if graph is not None and graph.n != self.n:
            raise GraphValidationError("graph size does not match operator dimension")
        self.graph = graph
        if rank_one is None:
            self.scale, self.deg = 0.0, None
        else:
            scale, deg = rank_one
            if deg.n != self.n:
                raise GraphValidationError("degree vector size does not match operator")
            if scale < 0:
                raise GraphValidationError("rank-one scale must be nonnegative")
            self.scale, self.deg = float(scale), deg
            if self.scale == 0.0:
                self.deg = None
        self._diag = None

    @classmethod
    def from_graph(cls, g: WeightedGraph) -> "LaplacianOperator":
        return cls(g.n, graph=g)

    @classmethod
    def demand(cls, deg: DegreeVector, scale: float = 1.0) -> "LaplacianOperator":
        return cls(deg.n, rank_one=(scale, deg))

    @property
    def has_rank_one(self) -> bool:
        return self.deg is not None

    def is_zero(self) -> bool:
        no_edges = self.graph is None or self.graph.num_edges == 0
        return no_edges and not self.has_rank_one

    def apply(self, x: np.ndarray) -> np.ndarray:
        """L @ x for a vector (n,) or block (n, k)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n:
            raise GraphValidationError("operand length does not match operator")
        out = np.zeros_like(x)
        if self.graph is not None and self.graph.num_edges:
            adj = self.graph.adjacency()
            d = self.graph.degree_vector().d
            if x.ndim == 1:
                out += d * x - adj @ x
            else:
                out += d[:, None] * x - adj @ x
        if self.has_rank_one:
            d, vol = self.deg.d, self.deg.vol
            if x.ndim == 1:
                out += self.scale * (d * x - d * (d @ x / vol))
            else:
                out += self.scale * (d[:, None] * x - np.outer(d, d @ x) / vol)
        return out

    def quadratic(self, x) -> float:
        """x^T L x, accumulated edge-wise (plus the closed-form demand term)."""
        x = np.asarray(x, dtype=np.float64).ravel()
        total = 0.0
        if self.graph is not None:
            total += graphmod.laplacian_quadratic(self.graph, x)
        if self.has_rank_one:
            d, vol = self.deg.d, self.deg.vol
            total += self.scale * (float(d @ (x * x)) - float(d @ x) ** 2 / vol)
        return total

    def cut(self, subset) -> float:
        """Cut value of a vertex subset under this operator's edge weights."""
        total = 0.0
        if self.graph is not None:
            total += graphmod.cut(self.graph, subset)
        if self.has_rank_one:
            total += self.scale * graphmod.demand_cut(self.deg, subset)
        return total

    def prefix_cuts(self, order) -> np.ndarray:
        """Cuts of all n-1 proper prefixes of a vertex ordering (vectorized)."""
        out = np.zeros(self.n - 1)
        if self.graph is not None:
            out += graphmod.prefix_cut_profile(self.graph, order)
        if self.has_rank_one:
            out += self.scale * graphmod.demand_prefix_profile(self.deg, order)
        return out

    def diagonal(self) -> np.ndarray:
        if self._diag is None:
            diag = np.zeros(self.n)
            if self.graph is not None:
                diag += self.graph.degree_vector().d
            if self.has_rank_one:
                d, vol = self.deg.d, self.deg.vol
                diag += self.scale * (d - d * d / vol)
            self._diag = diag
        return self._diag

    def sparse_laplacian(self) -> sp.csr_array:
        """CSR Laplacian of the sparse part only (rank-one part excluded)."""
        if self.graph is None or self.graph.num_edges == 0:
            return sp.csr_array((self.n, self.n), dtype=np.float64)
        adj = self.graph.adjacency()
        d = self.graph.degree_vector().d
        return (sp.diags_array(d) - adj).tocsr()

    def dense(self) -> np.ndarray:
        """Dense n x n assembly; intended for small problems only."""
        out = np.zeros((self.n, self.n))
        if self.graph is not None and self.graph.num_edges:
            out += self.sparse_laplacian().toarray()
        if self.has_rank_one:
            d, vol = self.deg.d, self.deg.vol
            out += self.scale * (np.diag(d) - np.outer(d, d) / vol)
        return out


class Preconditioner:
    """Approximate inverse of a Laplacian operator restricted to 1-perp."""

    def apply(self, r: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


class JacobiPreconditioner(Preconditioner):
    """Diagonal scaling z = r / (diag + shift), shift = 1e-10 * mean(diag)."""

    def __init__(self, op: LaplacianOperator):
        diag = op.diagonal()
        shift = PRECONDITIONER_SHIFT * float(diag.mean())
        if diag.max() <= 0:
            raise GraphValidationError("operator has an all-zero diagonal")
        self._inv = 1.0 / (diag + shift)

    def apply(self, r):
        if r.ndim == 1:
            return self._inv * r
        return self._inv[:, None] * r


class GaussSeidelPreconditioner(Preconditioner):
    """Symmetric Gauss-Seidel sweep M = (D+L) D^-1 (D+L)^T on the sparse part.

    The rank-one demand part, if any, is not represented; the sweep is
    still a valid SPD preconditioner for the full operator.
    """

    def __init__(self, op: LaplacianOperator):
        diag = op.diagonal()
        shift = PRECONDITIONER_SHIFT * float(diag.mean()) if diag.max() > 0 else 1.0
        lap = op.sparse_laplacian() + sp.diags_array(np.full(op.n, shift))
        lap = lap.tocsr()
        self._d = lap.diagonal()
        self._lower = sp.tril(lap, k=0, format="csr")
        self._upper = sp.triu(lap, k=0, format="csr")
        for tri in (self._lower, self._upper):  # triangular solver wants cint
            tri.indices = tri.indices.astype(np.int32)
            tri.indptr = tri.indptr.astype(np.int32)

    def apply(self, r):
        if r.ndim == 1:
            t = spla.spsolve_triangular(self._lower, r, lower=True)
            return spla.spsolve_triangular(self._upper, self._d * t, lower=False)
        return np.column_stack([self.apply(r[:, j]) for j in range(r.shape[1])])


class AggregationPreconditioner(Preconditioner):
    """Multilevel smoothed-aggregation V-cycle on the sparse Laplacian part.

    Deterministic for a fixed matrix; the all-ones near-null candidate is
    supplied explicitly. Requires the optional pyamg dependency.
    """

    def __init__(self, op: LaplacianOperator):
        import pyamg  # deferred: optional dependency

        lap = op.sparse_laplacian().tocsr()
        diag = op.diagonal()
        shift = PRECONDITIONER_SHIFT * float(diag.mean()) if diag.max() > 0 else 1.0
        lap = sp.csr_matrix(lap + sp.diags_array(np.full(op.n, shift)))
        lap.indices = lap.indices.astype(np.int32)  # pyamg requires 32-bit indices
        lap.indptr = lap.indptr.astype(np.int32)
        ml = pyamg.smoothed_aggregation_solver(
            lap, B=np.ones((op.n, 1)), max_coarse=100
        )
        self._M = ml.aspreconditioner(cycle="V")

    def apply(self, r):
        if r.ndim == 1:
            return self._M @ r
        return np.column_stack([self._M @ r[:, j] for j in range(r.shape[1])])


def build_preconditioner(op: LaplacianOperator, kind: str = "jacobi") -> Preconditioner:
    """Construct a preconditioner for a Laplacian operator.

    ``kind`` is one of ``"jacobi"`` (default), ``"gauss_seidel"``,
    ``"aggregation"`` (pyamg smoothed aggregation), or ``"none"``.
    """
    if kind == "jacobi":
        return JacobiPreconditioner(op)
    if kind == "gauss_seidel":
        return GaussSeidelPreconditioner(op)
    if kind == "aggregation":
        return AggregationPreconditioner(op)
    if kind == "none":
        return None
    raise GraphValidationError(f"unknown preconditioner kind: {kind!r}")


def default_max_iter(n: int) -> int:
    return int(10 * math.sqrt(n)) + 200


def _project_constants(x: np.ndarray) -> np.ndarray:
    x -= x.mean(axis=0)
    return x


def _pcg(apply_a: Callable, b: np.ndarray, M: Optional[Preconditioner],
         tol: float, max_iter: int, x0: Optional[np.ndarray] = None):
    """Projected preconditioned CG on 1-perp.

    Returns (x, relative_residual, iterations, converged). The right-hand
    side and every preconditioned direction are projected onto the
    complement of constants, where the operator is positive definite.
    """
    b = _project_constants(np.array(b, dtype=np.float64))
    bnorm = float(np.linalg.norm(b))
    n = b.shape[0]
    if bnorm == 0.0:
        return np.zeros(n), 0.0, 0, True
    if x0 is not None:
        x = _project_constants(np.array(x0, dtype=np.float64))
        r = b - apply_a(x)
    else:
        x = np.zeros(n)
        r = b.copy()
    relres = float(np.linalg.norm(r)) / bnorm
    if relres <= tol:
        return x, relres, 0, True
    z = M.apply(r) if M is not None else r.copy()
    _project_constants(z)
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        ap = apply_a(p)
        pap = float(p @ ap)
        if pap <= 0.0 or not np.isfinite(pap):
            break  # loss of positive-definiteness: report as failure below
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        relres = float(np.linalg.norm(r)) / bnorm
        if relres <= tol:
            return _project_constants(x), relres, it, True
        z = M.apply(r) if M is not None else r.copy()
        _project_constants(z)
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    return _project_constants(x), relres, max_iter, False


def solve(op: LaplacianOperator, b, tol: float = 1e-8,
          max_iter: Optional[int] = None, preconditioner="jacobi",
          x0=None) -> np.ndarray:
    """Solve L x = b on the complement of constants, returning x with x·1=0.

    Parameters
    ----------
    op : LaplacianOperator
        Must be positive definite on 1-perp (sparse part connected, or a
        positive rank-one demand part present).
    b : array_like
        Right-hand side; its mean is projected out (the consistent part).
    tol : float
        Relative residual target ||r|| <= tol * ||b||.
    max_iter : int, optional
        Defaults to 10*sqrt(n) + 200.
    preconditioner : str or Preconditioner or None
        A kind name for :func:`build_preconditioner`, or an instance.

    Raises
    ------
    IterativeSolveError
        If the tolerance is not met within ``max_iter`` iterations; the
        error carries the final relative residual.
    DisconnectedGraphError
        If the operator is structurally singular on 1-perp.
    """
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.shape[0] != op.n:
        raise GraphValidationError("right-hand side length does not match operator")
    if not op.has_rank_one:
        if op.graph is None or not graphmod.is_connected(op.graph):
            raise DisconnectedGraphError(
                "operator is singular beyond constants: the graph is disconnected; "
                "restrict to the largest component or add a demand regularizer"
            )
    if max_iter is None:
        max_iter = default_max_iter(op.n)
    if isinstance(preconditioner, str) or preconditioner is None:
        M = build_preconditioner(op, preconditioner or "none")
    else:
        M = preconditioner
    x, relres, iters, ok = _pcg(op.apply, b, M, tol, max_iter, x0=x0)
    if not ok:
        raise IterativeSolveError(
            f"PCG did not reach tol={tol:g} within {iters} iterations "
            f"(relative residual {relres:.3e})",
            residual=relres,
            iterations=iters,
        )
    return x
