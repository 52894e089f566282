import numpy as np
import pytest

from speclust.embedding import compute_embedding
from speclust.eigen import dense_generalized_eigs
from speclust.errors import DegenerateEigenvectorError, GraphValidationError
from speclust.graph import DegreeVector, WeightedGraph
from speclust.operators import LaplacianOperator
from speclust.partition import kmeans

from conftest import random_connected_graph, random_edge_graph


def unit_edge_operator(n, u, v):
    return LaplacianOperator.from_graph(WeightedGraph(n, [u], [v], [1.0]))


def reconstruct_raw(result):
    return result.coords * result.row_norms[:, None]


# ---------------------------------------------------------------------------
# the two normalization steps


def test_degree_centering_two_points():
    deg = DegreeVector(d=np.array([1.0, 1.0]), vol=2.0)
    result = compute_embedding(np.array([1.0, 0.0]), unit_edge_operator(2, 0, 1), deg)
    raw = reconstruct_raw(result)
    # x - (x.d / 1.d) 1 = (0.5, -0.5), which already has unit edge energy
    assert np.allclose(raw[:, 0], [0.5, -0.5], atol=1e-15)
    assert np.isclose(raw[:, 0] @ deg.d, 0.0, atol=1e-15)
    assert np.allclose(result.coords[:, 0], [1.0, -1.0])
    assert np.allclose(result.row_norms, [0.5, 0.5])


def test_columns_have_unit_constraint_energy():
    rng = np.random.default_rng(0)
    g = random_connected_graph(rng, 12)
    h = random_edge_graph(rng, 12, 8)
    lh = LaplacianOperator(12, graph=h, rank_one=(0.2, g.degree_vector()))
    x = rng.standard_normal((12, 3))
    result = compute_embedding(x, lh, g.degree_vector())
    raw = reconstruct_raw(result)
    for j in range(3):
        assert np.isclose(lh.quadratic(raw[:, j]), 1.0, rtol=1e-10)
        assert np.isclose(raw[:, j] @ g.degree_vector().d, 0.0, atol=1e-8)


def test_representative_invariance():
    rng = np.random.default_rng(1)
    g = random_connected_graph(rng, 10)
    h = random_edge_graph(rng, 10, 6)
    lh = LaplacianOperator(10, graph=h, rank_one=(0.1, g.degree_vector()))
    x = rng.standard_normal((10, 2))
    shifted = x + np.array([5.0, -11.0])  # add a different constant per column
    a = compute_embedding(x, lh, g.degree_vector())
    b = compute_embedding(shifted, lh, g.degree_vector())
    assert np.allclose(a.coords, b.coords, atol=1e-12)
    assert np.allclose(a.row_norms, b.row_norms, atol=1e-12)


def test_rows_have_unit_norm():
    rng = np.random.default_rng(2)
    g = random_connected_graph(rng, 15)
    lh = LaplacianOperator.demand(g.degree_vector())
    x = rng.standard_normal((15, 4))
    result = compute_embedding(x, lh, g.degree_vector())
    norms = np.linalg.norm(result.coords, axis=1)
    nz = result.row_norms > 0
    assert np.all(np.abs(norms[nz] - 1.0) <= 1e-12)


def test_row_norms_reconstruct_raw_energies():
    rng = np.random.default_rng(3)
    g = random_connected_graph(rng, 9)
    lh = LaplacianOperator.demand(g.degree_vector())
    x = rng.standard_normal((9, 3))
    result = compute_embedding(x, lh, g.degree_vector())
    raw = reconstruct_raw(result)
    assert np.allclose(result.row_norms**2, (raw**2).sum(axis=1), rtol=1e-12)


# ---------------------------------------------------------------------------
# edge cases


def test_zero_row_preserved_with_zero_norm(path3):
    deg = path3.degree_vector()  # d = (1, 2, 1)
    x = np.array([-1.0, 0.0, 1.0])  # already d-centered; middle row is zero
    result = compute_embedding(x, unit_edge_operator(3, 0, 2), deg)
    assert result.row_norms[1] == 0.0
    assert np.array_equal(result.coords[1], np.zeros(1))
    assert np.allclose(np.linalg.norm(result.coords[[0, 2]], axis=1), 1.0)


def test_null_space_column_raises_degenerate(path3=None):
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    lh = unit_edge_operator(4, 0, 1)
    x = np.array([1.0, 1.0, 4.0, 6.0])  # constant across the only H edge
    with pytest.raises(DegenerateEigenvectorError, match="column 0"):
        compute_embedding(x, lh, g.degree_vector())


def test_size_mismatch_rejected(path3):
    deg = path3.degree_vector()
    with pytest.raises(GraphValidationError):
        compute_embedding(np.zeros((5, 2)), unit_edge_operator(3, 0, 2), deg)


# ---------------------------------------------------------------------------
# end to end: embedding rows separate the planted structure


def test_two_triangle_embedding_recovers_clusters(two_triangles):
    lg = LaplacianOperator.from_graph(two_triangles)
    deg = two_triangles.degree_vector()
    lh = LaplacianOperator.demand(deg)
    sol = dense_generalized_eigs(lg, lh, 2)
    emb = compute_embedding(sol.vectors, lh, deg)
    part = kmeans(emb.coords, 2, restarts=5, seed=0,
                  include=emb.row_norms > 0)
    assert part.labels[0] == part.labels[1] == part.labels[2]
    assert part.labels[3] == part.labels[4] == part.labels[5]
    assert part.labels[0] != part.labels[3]
