"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's own numerical paths:
dense Laplacians are assembled entry by entry, demand matrices come from
the rank-one closed form, and pencil eigenvalues are computed with the QZ
decomposition (scipy.linalg.eig on a generalized pair) on an explicit
basis of the complement of the constant vector.  The package itself never
uses QZ, so agreement is meaningful.
"""

import numpy as np
import pytest
import scipy.linalg as sla

from speclust.graph import WeightedGraph


# ---------------------------------------------------------------------------
# dense oracles


def dense_laplacian(g: WeightedGraph) -> np.ndarray:
    """Entry-by-entry dense Laplacian of a weighted graph."""
    lap = np.zeros((g.n, g.n))
    for u, v, w in zip(g.u, g.v, g.w):
        lap[u, u] += w
        lap[v, v] += w
        lap[u, v] -= w
        lap[v, u] -= w
    return lap


def dense_demand(d, scale: float = 1.0) -> np.ndarray:
    """Dense Laplacian of the demand graph K_ij = d_i d_j / vol."""
    d = np.asarray(d, dtype=np.float64)
    return scale * (np.diag(d) - np.outer(d, d) / d.sum())


def ones_complement(n: int) -> np.ndarray:
    """Orthonormal basis Q of span{1}^perp, as columns."""
    return sla.null_space(np.ones((1, n)))


def oracle_pencil_eigs(a: np.ndarray, b: np.ndarray, k: int):
    """k smallest finite eigenpairs of A x = lam B x restricted to 1^perp.

    Uses the QZ route (generalized nonsymmetric eig) so it shares no code
    with the package's symmetric solvers. Returns (values, vectors) with
    vectors lifted back to R^n (not normalized in any particular way).
    """
    n = a.shape[0]
    q = ones_complement(n)
    w, vr = sla.eig(q.T @ a @ q, q.T @ b @ q)
    finite = np.isfinite(w.real) & np.isfinite(w.imag)
    finite &= np.abs(w.imag) <= 1e-8 * (1.0 + np.abs(w.real))
    vals = w.real[finite]
    vecs = vr[:, finite].real
    # PSD pencil: clip rounding noise below zero, then sort ascending
    keep = vals > -1e-8 * max(1.0, np.abs(vals).max(initial=1.0))
    vals, vecs = vals[keep], vecs[:, keep]
    order = np.argsort(vals)[:k]
    if order.size < k:
        raise AssertionError(
            f"oracle found only {order.size} finite eigenvalues, wanted {k}"
        )
    return np.maximum(vals[order], 0.0), q @ vecs[:, order]


def quadratic_form(mat: np.ndarray, x: np.ndarray) -> float:
    return float(x @ (mat @ x))


# ---------------------------------------------------------------------------
# random instance factories


def random_connected_graph(rng: np.random.Generator, n: int,
                           extra: float = 1.5, weight_span: float = 1.0):
    """Random connected graph: random spanning tree plus ~extra*n edges.

    Weights are log-uniform over ``weight_span`` decades around 1.
    """
    u = list(range(1, n))
    v = [int(rng.integers(0, i)) for i in range(1, n)]  # attach to an earlier vertex
    m_extra = int(extra * n)
    if m_extra:
        a = rng.integers(0, n, size=m_extra)
        b = rng.integers(0, n, size=m_extra)
        ok = a != b
        u.extend(a[ok].tolist())
        v.extend(b[ok].tolist())
    w = 10.0 ** rng.uniform(-weight_span / 2, weight_span / 2, size=len(u))
    return WeightedGraph(n, u, v, w)


def random_edge_graph(rng: np.random.Generator, n: int, m: int,
                      weight_span: float = 0.5):
    """m random (possibly coalescing) edges on n vertices; may be disconnected."""
    u, v = [], []
    while len(u) < m:
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        if a != b:
            u.append(a)
            v.append(b)
    w = 10.0 ** rng.uniform(-weight_span / 2, weight_span / 2, size=m)
    return WeightedGraph(n, u, v, w)


def centered_random_vector(rng: np.random.Generator, d: np.ndarray) -> np.ndarray:
    """Random vector projected to x . d = 0 (and guaranteed nonconstant)."""
    while True:
        x = rng.standard_normal(d.shape[0])
        x -= (d @ x) / d.sum()
        if np.max(x) - np.min(x) > 1e-9:
            return x


# ---------------------------------------------------------------------------
# canonical fixtures


@pytest.fixture
def two_triangles():
    """Two unit triangles bridged by a weight-0.1 edge; the classic k=2 case.

    Vertices 0-2 and 3-5 are the triangles, edge (2,3) has weight 0.1.
    """
    edges = [
        (0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
        (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0),
        (2, 3, 0.1),
    ]
    return WeightedGraph.from_edges(6, edges)


@pytest.fixture
def path3():
    """Path 0-1-2 with unit weights: degrees (1, 2, 1)."""
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def weighted_grid(side: int, rng: np.random.Generator,
                  weight_span: float = 3.0) -> WeightedGraph:
    """side x side grid graph with log-uniform random edge weights."""
    idx = np.arange(side * side).reshape(side, side)
    u = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    v = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    w = 10.0 ** rng.uniform(-weight_span / 2, weight_span / 2, size=u.size)
    return WeightedGraph(side * side, u, v, w)
