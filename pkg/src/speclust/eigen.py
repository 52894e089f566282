"""Generalized eigensolvers for pencils of Laplacians (L_G x = lambda L_H x).

Both sides are positive semidefinite and annihilate constants; L_H may be
singular well beyond constants (its sparse part is usually a tiny
constraint graph). The finite eigenvalues of the pencil restricted to the
complement of the all-ones vector are the reciprocals of the positive
eigenvalues of the *reversed* pencil L_H y = mu L_G y, which is the form
both paths below solve: the dense path reduces to a basis of 1-perp and
calls LAPACK once; the iterative path is a preconditioned locally-optimal
block method whose Rayleigh-Ritz step solves the reversed projected
pencil, so a singular L_H never needs factorizing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import graph as graphmod
from .errors import (
    DisconnectedGraphError,
    GraphValidationError,
    IllPosedProblemError,
)
from .operators import (
    LaplacianOperator,
    Preconditioner,
    _pcg,
    build_preconditioner,
)

__all__ = ["EigenSolution", "dense_generalized_eigs", "generalized_eigs", "block_size"]


@dataclass
class EigenSolution:
    """k smallest finite pencil eigenpairs.

    ``values`` ascending; ``vectors`` columns are L_H-orthonormal and
    orthogonal to constants; ``residuals`` holds the final per-column
    relative residuals ||L_G x - lambda L_H x|| / (||L_G x|| + |lambda| ||L_H x||).
    ``converged`` is False when the iterative solver hit its cap; the
    partial solution is still returned.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool


def block_size(k: int) -> int:
    """Iteration block size: k wanted plus max(2, ceil(k/2)) guard columns."""
    return k + max(2, math.ceil(k / 2))


def _finite_eigenvalue_count(b_op: LaplacianOperator) -> int:
    """dim of the pencil's finite spectrum = (n-1) - dim(null L_H ∩ 1-perp)."""
    n = b_op.n
    if b_op.is_zero():
        return 0
    has_sparse = b_op.graph is not None and b_op.graph.num_edges > 0
    if b_op.has_rank_one:
        dz = b_op.deg.d == 0
        if not dz.any():
            return n - 1
        if not has_sparse:
            return n - 1 - int(dz.sum())
        ncomp, labels = graphmod.connected_components(b_op.graph)
        zero_comps = sum(1 for c in range(ncomp) if np.all(dz[labels == c]))
        return n - 1 - zero_comps
    ncomp, _ = graphmod.connected_components(b_op.graph)
    return n - ncomp


def _check_pencil(a_op: LaplacianOperator, b_op: LaplacianOperator, k: int) -> None:
    if a_op.n != b_op.n:
        raise GraphValidationError("pencil sides have different dimensions")
    if k < 1:
        raise GraphValidationError("k must be at least 1")
    if k > a_op.n - 1:
        raise GraphValidationError(f"k={k} exceeds the n-1={a_op.n - 1} available pairs")
    if not a_op.has_rank_one:
        if a_op.graph is None or not graphmod.is_connected(a_op.graph):
            raise DisconnectedGraphError(
                "numerator graph is disconnected, so the pencil is degenerate; "
                "restrict to the largest component first"
            )
    if b_op.is_zero():
        raise IllPosedProblemError(
            "denominator operator is identically zero: no constraints and no "
            "demand term, so eigenvalue ratios are undefined"
        )
    avail = _finite_eigenvalue_count(b_op)
    if avail < k:
        raise IllPosedProblemError(
            f"denominator operator has only {avail} finite eigenvalue(s) on the "
            f"complement of constants but k={k} were requested; add constraints "
            "or a demand term"
        )


def _ones_complement_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the complement of the all-ones vector."""
    return sla.null_space(np.ones((1, n)))


def dense_generalized_eigs(
    a_op: LaplacianOperator, b_op: LaplacianOperator, k: int
) -> EigenSolution:
    """Direct dense solve; intended for small n and as the reference path.

    Projects both operators onto an orthonormal basis of 1-perp, solves
    the reversed pencil B' y = mu A' y with a single LAPACK call (A' is
    positive definite there), and maps the k largest mu back to the k
    smallest finite eigenvalues lambda = 1/mu.
    """
    _check_pencil(a_op, b_op, k)
    n = a_op.n
    q = _ones_complement_basis(n)
    a_proj = q.T @ (a_op.dense() @ q)
    b_proj = q.T @ (b_op.dense() @ q)
    mu, y = sla.eigh(b_proj, a_proj)
    mu = np.clip(mu, 0.0, None)
    positive = mu > max(mu[-1], 0.0) * 1e-12
    if positive.sum() < k:
        raise IllPosedProblemError(
            f"only {int(positive.sum())} numerically finite eigenvalue(s) found, "
            f"but k={k} were requested"
        )
    sel = np.flatnonzero(positive)[-k:][::-1]  # largest mu -> smallest lambda
    values = 1.0 / mu[sel]
    vectors = q @ (y[:, sel] / np.sqrt(mu[sel]))  # L_H-orthonormal columns
    residuals = _relative_residuals(a_op, b_op, vectors, values)
    return EigenSolution(
        values=values,
        vectors=vectors,
        residuals=residuals,
        iterations=0,
        converged=True,
    )


def _relative_residuals(a_op, b_op, x, values) -> np.ndarray:
    ax = a_op.apply(x)
    bx = b_op.apply(x)
    num = np.linalg.norm(ax - bx * values, axis=0)
    den = np.linalg.norm(ax, axis=0) + np.abs(values) * np.linalg.norm(bx, axis=0)
    return num / np.where(den > 0, den, 1.0)


def _rayleigh_ritz(ga: np.ndarray, gb: np.ndarray, want: int):
    """Smallest finite Ritz pairs of the projected pencil (ga, gb).

    Solves the reversed problem gb z = mu ga z (ga is PD because the
    basis is orthonormal inside 1-perp) and keeps the ``want`` largest
    positive mu. Returns (theta ascending, coefficient matrix with
    L_H-orthonormal columns).
    """
    ga = 0.5 * (ga + ga.T)
    gb = 0.5 * (gb + gb.T)
    mu, z = sla.eigh(gb, ga)
    mu = np.clip(mu, 0.0, None)
    positive = mu > max(mu[-1], 0.0) * 1e-12
    count = min(want, int(positive.sum()))
    if count == 0:
        return np.empty(0), np.empty((ga.shape[0], 0))
    sel = np.flatnonzero(positive)[-count:][::-1]
    theta = 1.0 / mu[sel]
    coeffs = z[:, sel] / np.sqrt(mu[sel])
    return theta, coeffs


def _orthonormalize(s: np.ndarray):
    """Column basis of span(s) via pivoted QR with a relative rank cutoff."""
    q, r, _ = sla.qr(s, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return s[:, :0]
    rank = int(np.count_nonzero(diag > diag[0] * 1e-12))
    return q[:, :rank]


def generalized_eigs(
    a_op: LaplacianOperator,
    b_op: LaplacianOperator,
    k: int,
    preconditioner="jacobi",
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
    inner_tol: float = 1e-2,
    inner_max_iter: Optional[int] = None,
) -> EigenSolution:
    """Preconditioned locally-optimal block iteration for the k smallest pairs.

    Each sweep preconditions the residual block with approximate
    L_G-solves (PCG with the given preconditioner), augments the current
    Ritz block with those directions plus the previous block, and
    re-solves the projected pencil on that subspace. Constants are
    projected out of every direction, so the whole iteration lives in
    1-perp where the numerator operator is definite.

    Parameters
    ----------
    preconditioner : str or Preconditioner or None
        Preconditioner for the *inner* L_G solves (kind name or instance).
    tol : float
        Relative residual target per eigenpair (see EigenSolution).
    max_iter : int
        Outer iteration cap; on hitting it the partial solution is
        returned with ``converged=False`` rather than raising.
    inner_tol, inner_max_iter
        Inner PCG relative tolerance (default 1e-2) and cap (default
        2*sqrt(n) + 20); inexact solves only steer the subspace, so loose
        settings are fine.
    """
    _check_pencil(a_op, b_op, k)
    n = a_op.n
    m = min(block_size(k), n - 1)
    if isinstance(preconditioner, str) or preconditioner is None:
        prec = build_preconditioner(a_op, preconditioner or "none")
    else:
        prec = preconditioner
    if inner_max_iter is None:
        inner_max_iter = int(2 * math.sqrt(n)) + 20

    rng = np.random.default_rng(seed)
    x = rng.random((n, m))
    x -= x.mean(axis=0)
    x = _orthonormalize(x)

    def precondition(block):
        out = np.empty_like(block)
        for j in range(block.shape[1]):
            out[:, j], _, _, _ = _pcg(
                a_op.apply, block[:, j], prec, inner_tol, inner_max_iter
            )
        return out

    ax = a_op.apply(x)
    bx = b_op.apply(x)
    theta, coeffs = _rayleigh_ritz(x.T @ ax, x.T @ bx, m)
    x, ax, bx = x @ coeffs, ax @ coeffs, bx @ coeffs
    x_prev = None
    iterations = 0
    converged = False

    for iterations in range(1, max_iter + 1):
        residual_block = ax - bx * theta
        num = np.linalg.norm(residual_block, axis=0)
        den = np.linalg.norm(ax, axis=0) + np.abs(theta) * np.linalg.norm(bx, axis=0)
        res = num / np.where(den > 0, den, 1.0)
        if theta.size >= k and np.all(res[:k] <= tol):
            converged = True
            break
        active = res > tol
        w = precondition(residual_block[:, active])
        w -= w.mean(axis=0)
        blocks = [x, w] if x_prev is None else [x, w, x_prev]
        basis = _orthonormalize(np.hstack(blocks))
        if basis.shape[1] == 0:
            break
        a_basis = a_op.apply(basis)
        b_basis = b_op.apply(basis)
        theta, coeffs = _rayleigh_ritz(basis.T @ a_basis, basis.T @ b_basis, m)
        if theta.size == 0:
            raise IllPosedProblemError(
                "denominator operator vanished on the whole search space"
            )
        x_prev = x
        x = basis @ coeffs
        ax = a_basis @ coeffs
        bx = b_basis @ coeffs

    keep = min(k, theta.size)
    values = theta[:keep]
    vectors = x[:, :keep]
    residuals = _relative_residuals(a_op, b_op, vectors, values)
    return EigenSolution(
        values=values,
        vectors=vectors,
        residuals=residuals,
        iterations=iterations,
        converged=converged,
    )
