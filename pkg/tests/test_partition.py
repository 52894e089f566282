import numpy as np
import pytest

from speclust.eigen import dense_generalized_eigs
from speclust.errors import GraphValidationError, IllPosedProblemError
from speclust.graph import WeightedGraph, cut
from speclust.metrics import badness, brute_force_phi
from speclust.operators import LaplacianOperator
from speclust.partition import (
    Partition,
    cheeger_sweep,
    kmeans,
    refine_per_component_sweep,
    _lloyd,
    _seed_centers,
)

from conftest import (
    centered_random_vector,
    random_connected_graph,
    random_edge_graph,
)


def cross_cl_operator(two_triangles):
    """One unit cannot-link edge across the triangle pair."""
    return LaplacianOperator.from_graph(WeightedGraph(6, [0], [5], [1.0]))


# ---------------------------------------------------------------------------
# cheeger_sweep


def test_sweep_two_triangles_finds_bridge_cut(two_triangles):
    lg = LaplacianOperator.from_graph(two_triangles)
    lh = cross_cl_operator(two_triangles)
    x = dense_generalized_eigs(lg, lh, 1).vectors[:, 0]
    result = cheeger_sweep(two_triangles, lh, x)
    left = {i for i in range(6) if result.mask[i]}
    assert left in ({0, 1, 2}, {3, 4, 5})
    assert np.isclose(result.ratio, 0.1 / 1.0, rtol=1e-12)
    # exhaustive enumeration confirms this is the global optimum
    best, _ = brute_force_phi(two_triangles, lh)
    assert np.isclose(result.ratio, best, rtol=1e-12)


def test_sweep_on_indicator_does_at_least_as_well(two_triangles):
    deg = two_triangles.degree_vector()
    lh = LaplacianOperator.demand(deg)
    indicator = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    indicator -= (deg.d @ indicator) / deg.vol
    result = cheeger_sweep(two_triangles, lh, indicator)
    known_ratio = cut(two_triangles, [0, 1, 2]) / lh.cut([0, 1, 2])
    assert result.ratio <= known_ratio + 1e-12


def test_sweep_matches_quadratic_time_oracle():
    rng = np.random.default_rng(0)
    for trial in range(10):
        g = random_connected_graph(rng, 14)
        h = random_edge_graph(rng, 14, 8)
        lh = LaplacianOperator(14, graph=h, rank_one=(0.1, g.degree_vector()))
        x = rng.standard_normal(14)
        result = cheeger_sweep(g, lh, x)
        order = np.argsort(x, kind="stable")
        ratios = []
        for size in range(1, 14):
            prefix = order[:size]
            ch = lh.cut(prefix)
            if ch > 0:
                ratios.append(cut(g, prefix) / ch)
        assert np.isclose(result.ratio, min(ratios), rtol=1e-12)


def test_sweep_certificate_lower_bounds_rayleigh():
    rng = np.random.default_rng(1)
    for trial in range(20):
        g = random_connected_graph(rng, 20)
        h = random_edge_graph(rng, 20, 10)
        deg = g.degree_vector()
        lg = LaplacianOperator.from_graph(g)
        lh = LaplacianOperator(20, graph=h, rank_one=(0.2, deg))
        x = centered_random_vector(rng, deg.d)
        result = cheeger_sweep(g, lh, x, deg=deg)
        rayleigh = lg.quadratic(x) / lh.quadratic(x)
        assert rayleigh >= result.certificate - 1e-9
        assert np.isclose(result.certificate,
                          result.ratio * result.demand_ratio / 4.0, rtol=1e-12)


def test_sweep_reports_prefix_size_and_partition(two_triangles):
    lh = cross_cl_operator(two_triangles)
    x = np.array([0.0, 0.1, 0.2, 1.0, 1.1, 1.2])
    result = cheeger_sweep(two_triangles, lh, x)
    assert result.prefix_size == int(result.mask.sum())
    part = result.to_partition()
    assert part.k == 2
    assert np.array_equal(part.labels == part.labels[0], result.mask)


def test_sweep_all_zero_denominators_ill_posed(two_triangles):
    lh = LaplacianOperator(6)  # zero operator: every prefix has cut_H = 0
    with pytest.raises(IllPosedProblemError):
        cheeger_sweep(two_triangles, lh, np.arange(6.0))


def test_sweep_skips_zero_denominator_prefixes():
    # H touches only vertices {2,3}, so prefixes {0} and {0,1} have cut_H = 0
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    lh = LaplacianOperator.from_graph(WeightedGraph(4, [2], [3], [1.0]))
    x = np.array([0.0, 1.0, 2.0, 3.0])
    result = cheeger_sweep(g, lh, x)
    assert result.prefix_size == 3  # only the {0,1,2} prefix is scoreable
    assert np.isclose(result.ratio, 1.0)


def test_sweep_constant_vector_rejected(two_triangles):
    lh = cross_cl_operator(two_triangles)
    with pytest.raises(GraphValidationError, match="constant"):
        cheeger_sweep(two_triangles, lh, np.ones(6))


# ---------------------------------------------------------------------------
# kmeans


def test_kmeans_exact_recovery_zero_objective():
    points = np.repeat(np.array([[0.0, 0.0], [5.0, 5.0], [-3.0, 4.0]]), 10, axis=0)
    part = kmeans(points, 3, restarts=3, seed=0)
    assert part.k == 3
    for c in range(3):
        rows = points[part.labels == c]
        assert np.all(rows == rows[0])


def test_kmeans_two_circle_clusters_any_seed():
    rng = np.random.default_rng(2)
    angles = np.concatenate([
        rng.uniform(-0.1, 0.1, size=40),
        np.pi + rng.uniform(-0.1, 0.1, size=40),
    ])
    points = np.column_stack([np.cos(angles), np.sin(angles)])
    truth = np.repeat([0, 1], 40)
    for seed in range(5):
        part = kmeans(points, 2, restarts=5, seed=seed)
        same = part.labels == part.labels[0]
        assert np.array_equal(same, truth == truth[0])


def test_kmeans_deterministic_bitwise():
    rng = np.random.default_rng(3)
    points = rng.standard_normal((60, 3))
    a = kmeans(points, 4, restarts=10, seed=7)
    b = kmeans(points, 4, restarts=10, seed=7)
    assert np.array_equal(a.labels, b.labels)


def test_kmeans_threads_do_not_change_labels():
    rng = np.random.default_rng(4)
    points = rng.standard_normal((80, 2))
    a = kmeans(points, 3, restarts=8, seed=5, threads=1)
    b = kmeans(points, 3, restarts=8, seed=5, threads=4)
    assert np.array_equal(a.labels, b.labels)


def test_kmeans_too_few_distinct_points():
    points = np.zeros((10, 2))
    with pytest.raises(GraphValidationError, match="distinct"):
        kmeans(points, 2, restarts=1, seed=0)


def test_kmeans_excluded_rows_assigned_to_nearest_centroid():
    points = np.array([[0.0], [0.1], [10.0], [10.1], [9.9], [0.05]])
    include = np.array([True, True, True, True, False, False])
    part = kmeans(points, 2, restarts=3, seed=0, include=include)
    assert part.labels[4] == part.labels[2]  # 9.9 joins the 10-cluster
    assert part.labels[5] == part.labels[0]  # 0.05 joins the 0-cluster


def test_lloyd_objective_nonincreasing():
    rng = np.random.default_rng(5)
    points = rng.standard_normal((100, 2))
    centers = _seed_centers(points, 4, rng)
    _, _, _, history = _lloyd(points, centers, max_iter=50)
    assert len(history) >= 1
    assert np.all(np.diff(history) <= 1e-9)


def test_kmeans_clusters_nonempty():
    rng = np.random.default_rng(6)
    points = rng.standard_normal((30, 2))
    part = kmeans(points, 6, restarts=4, seed=1)
    for c in range(6):
        assert np.any(part.labels == c)


# ---------------------------------------------------------------------------
# Partition validation


def test_partition_validates_contiguous_nonempty():
    with pytest.raises(GraphValidationError):
        Partition(labels=np.array([0, 0, 2]), k=3)  # cluster 1 empty
    with pytest.raises(GraphValidationError):
        Partition(labels=np.array([0, 1, 2]), k=2)  # id out of range
    p = Partition(labels=np.array([1, 0, 1]), k=2)
    assert p.cluster(1).tolist() == [0, 2]


# ---------------------------------------------------------------------------
# refinement


def test_refine_keeps_already_good_partition(two_triangles):
    lh = cross_cl_operator(two_triangles)
    part = Partition(labels=np.array([0, 0, 0, 1, 1, 1]), k=2)
    row_norms = np.ones(6)
    refined = refine_per_component_sweep(part, row_norms, two_triangles, lh)
    assert refined.k == 2
    assert np.array_equal(refined.labels, part.labels)


def test_refine_splits_single_cluster_of_two_triangles(two_triangles):
    lh = cross_cl_operator(two_triangles)
    part = Partition(labels=np.zeros(6, dtype=np.int64), k=1)
    # row norms that order one triangle before the other
    row_norms = np.array([0.1, 0.2, 0.3, 0.8, 0.9, 1.0])
    refined = refine_per_component_sweep(part, row_norms, two_triangles, lh)
    assert refined.k == 2
    left = set(np.flatnonzero(refined.labels == refined.labels[0]))
    assert left in ({0, 1, 2}, {3, 4, 5})


def test_refine_splits_cluster_with_separated_blobs():
    # two 4-cliques joined weakly; a CL edge across marks them as different
    edges = [(i, j, 1.0) for i in range(4) for j in range(i + 1, 4)]
    edges += [(i, j, 1.0) for i in range(4, 8) for j in range(i + 1, 8)]
    edges.append((3, 4, 0.05))
    g = WeightedGraph.from_edges(8, edges)
    lh = LaplacianOperator.from_graph(WeightedGraph(8, [0], [7], [1.0]))
    part = Partition(labels=np.zeros(8, dtype=np.int64), k=1)
    row_norms = np.array([0.1, 0.11, 0.12, 0.13, 0.9, 0.91, 0.92, 0.93])
    refined = refine_per_component_sweep(part, row_norms, g, lh)
    assert refined.k == 2
    report = badness(g, lh, refined)
    assert report.max_badness < np.inf


def test_refine_noop_on_singletons(two_triangles):
    lh = cross_cl_operator(two_triangles)
    part = Partition(labels=np.array([0, 1, 2, 3, 4, 5]), k=6)
    refined = refine_per_component_sweep(part, np.ones(6), two_triangles, lh)
    assert np.array_equal(refined.labels, part.labels)
