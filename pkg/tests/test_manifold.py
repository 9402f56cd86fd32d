import numpy as np
import pytest

from gcwssim.cwssim import CwSsimConfig
from gcwssim.data import synth_rotated_set
from gcwssim.manifold import (
    DisconnectedGraphError,
    DistanceMatrix,
    MatrixKind,
    all_pairs_geodesic,
    bridge_components,
    gcwssim_matrix,
    geodesic_l2_matrix,
    geodesic_matrix,
    knn_graph,
    l2_distance,
    pairwise_cwssim,
    pairwise_l2,
)

from _oracles import floyd_warshall


def matrix_from_points(points, kind=MatrixKind.L2):
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    diff = points[:, None, :] - points[None, :, :]
    return DistanceMatrix(np.sqrt((diff**2).sum(-1)), kind)


def random_connected_graph(rng, n):
    """Random weighted graph guaranteed connected by a chain; integer weights
    keep every path sum exact in floating point."""
    weights = np.full((n, n), np.inf)
    np.fill_diagonal(weights, 0.0)
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        w = float(rng.integers(1, 1000))
        weights[a, b] = weights[b, a] = w
    extra = rng.integers(n, 3 * n)
    for _ in range(int(extra)):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            w = float(rng.integers(1, 1000))
            weights[a, b] = weights[b, a] = min(weights[a, b], w)
    return weights


def graph_from_dense(weights):
    n = weights.shape[0]
    iu, ju = np.triu_indices(n, 1)
    finite = np.isfinite(weights[iu, ju])
    ii, jj = iu[finite], ju[finite]
    from gcwssim.manifold import NeighborGraph
    return NeighborGraph(
        n=n, t=0, base_kind=MatrixKind.L2,
        edges_i=ii, edges_j=jj, weights=weights[ii, jj],
    )


class TestDistanceMatrix:
    def test_validation(self):
        good = np.array([[0.0, 1.0], [1.0, 0.0]])
        DistanceMatrix(good, MatrixKind.L2)
        with pytest.raises(ValueError, match="symmetric"):
            DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]), MatrixKind.L2)
        with pytest.raises(ValueError, match="diagonal"):
            DistanceMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]), MatrixKind.L2)
        with pytest.raises(ValueError, match="negative"):
            DistanceMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]), MatrixKind.L2)
        with pytest.raises(ValueError, match="finite"):
            DistanceMatrix(np.array([[0.0, np.inf], [np.inf, 0.0]]), MatrixKind.L2)
        with pytest.raises(ValueError, match="square"):
            DistanceMatrix(np.zeros((2, 3)), MatrixKind.L2)


class TestPairwiseL2:
    def test_single_value_formulas(self):
        assert l2_distance([0.0], [1.0]) == 1.0
        a = np.zeros((2, 2))
        assert l2_distance(a, a + 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_dataset_matrix(self):
        ds = synth_rotated_set(1, 4, size=32, seed=0)
        D = pairwise_l2(ds)
        assert D.kind is MatrixKind.L2
        assert (np.diagonal(D.values) == 0).all()
        expected = l2_distance(ds.images[0].pixels, ds.images[1].pixels)
        assert D.values[0, 1] == pytest.approx(expected, rel=1e-12)


class TestKnnGraph:
    def test_three_collinear_points(self):
        D = matrix_from_points([0.0, 1.0, 3.0])
        g = knn_graph(D, t=1)
        edges = set(zip(g.edges_i.tolist(), g.edges_j.tolist(), g.weights.tolist()))
        assert edges == {(0, 1, 1.0), (1, 2, 2.0)}

    def test_full_t_gives_complete_graph(self):
        rng = np.random.default_rng(0)
        D = matrix_from_points(rng.uniform(size=(6, 2)))
        g = knn_graph(D, t=5)
        assert g.n_edges == 15
        geo = all_pairs_geodesic(g)
        # with every direct edge present, geodesic <= direct distance
        assert (geo.values <= D.values + 1e-12).all()

    def test_duplicate_points_zero_edge(self):
        D = matrix_from_points([0.0, 0.0, 5.0, 9.0])
        g = knn_graph(D, t=1)
        edges = list(zip(g.edges_i.tolist(), g.edges_j.tolist(), g.weights.tolist()))
        assert (0, 1, 0.0) in edges
        labels = g.component_labels()
        assert labels[0] == labels[1]

    def test_union_vs_mutual(self):
        # point 2 is nobody's nearest neighbor but picks 1
        D = matrix_from_points([0.0, 1.0, 10.0])
        union = knn_graph(D, t=1)
        mutual = knn_graph(D, t=1, mutual=True)
        assert union.n_edges == 2
        assert mutual.n_edges == 1

    def test_degree_at_least_t(self):
        rng = np.random.default_rng(1)
        D = matrix_from_points(rng.uniform(size=(20, 3)))
        t = 4
        g = knn_graph(D, t)
        degrees = np.zeros(20, dtype=int)
        for i, j in zip(g.edges_i, g.edges_j):
            degrees[i] += 1
            degrees[j] += 1
        assert (degrees >= t).all()

    @pytest.mark.parametrize("t", [0, 20])
    def test_t_out_of_range(self, t):
        D = matrix_from_points(np.arange(5.0))
        with pytest.raises(ValueError):
            knn_graph(D, t)


class TestGeodesic:
    def test_chain_path_sum(self):
        D = matrix_from_points([0.0, 1.0, 2.0])
        g = knn_graph(D, t=1)
        geo = all_pairs_geodesic(g)
        assert geo.values[0, 2] == 2.0

    def test_matches_dynamic_programming_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(8):
            n = int(rng.integers(5, 30))
            weights = random_connected_graph(rng, n)
            geo = all_pairs_geodesic(graph_from_dense(weights))
            assert (geo.values == floyd_warshall(weights)).all(), f"trial {trial}"

    def test_disconnected_raises_with_sizes(self):
        D = matrix_from_points([0.0, 1.0, 100.0, 101.0])
        g = knn_graph(D, t=1)
        with pytest.raises(DisconnectedGraphError) as err:
            all_pairs_geodesic(g)
        assert err.value.component_sizes == [2, 2]

    def test_triangle_inequality(self):
        rng = np.random.default_rng(2)
        D = matrix_from_points(rng.uniform(size=(15, 2)))
        geo = geodesic_matrix(D, t=4, bridge=True)
        v = geo.values
        for k in range(15):
            assert (v <= v[:, k, None] + v[None, k, :] + 1e-9).all()

    def test_monotone_in_t(self):
        rng = np.random.default_rng(3)
        D = matrix_from_points(rng.uniform(size=(20, 2)))
        previous = geodesic_matrix(D, t=3, bridge=True).values
        for t in (4, 5, 6):
            current = geodesic_matrix(D, t=t, bridge=True).values
            assert (current <= previous + 1e-9).all()
            previous = current

    def test_kind_mapping(self):
        rng = np.random.default_rng(4)
        D = matrix_from_points(rng.uniform(size=(8, 2)))
        assert geodesic_matrix(D, 7).kind is MatrixKind.GEO_L2
        C = DistanceMatrix(D.values, MatrixKind.CWSSIM)
        assert geodesic_matrix(C, 7).kind is MatrixKind.GCWSSIM


class TestBridging:
    def test_bridges_connect_components(self):
        D = matrix_from_points([0.0, 1.0, 100.0, 101.0, 200.0, 201.0])
        g = knn_graph(D, t=1)
        bridged, added = bridge_components(g, D)
        assert bridged.component_labels().max() == 0
        # both inter-component gaps are 99; ties resolve to the lowest pair
        assert [(i, j, round(w)) for i, j, w in added] == [(1, 2, 99), (3, 4, 99)]

    def test_bridge_deterministic(self):
        rng = np.random.default_rng(5)
        D = matrix_from_points(rng.uniform(size=(12, 2)) * [10, 1])
        g = knn_graph(D, t=1)
        a = bridge_components(g, D)[1]
        b = bridge_components(g, D)[1]
        assert a == b

    def test_already_connected_is_noop(self):
        D = matrix_from_points([0.0, 1.0, 2.0])
        g = knn_graph(D, t=2)
        bridged, added = bridge_components(g, D)
        assert added == []
        assert bridged.n_edges == g.n_edges


class TestPipelines:
    @pytest.fixture(scope="class")
    def ring(self):
        return synth_rotated_set(1, 24, size=32, seed=0)

    def test_pairwise_cwssim_matrix(self, ring):
        cfg = CwSsimConfig(stride=2)
        D = pairwise_cwssim(ring, cfg)
        assert D.kind is MatrixKind.CWSSIM
        assert (np.abs(np.diagonal(D.values)) <= 1e-9).all()
        assert (D.values == D.values.T).all()

    def test_gcwssim_connected_ring(self, ring):
        cfg = CwSsimConfig(stride=2)
        geo = gcwssim_matrix(ring, t=2, cfg=cfg)
        assert geo.kind is MatrixKind.GCWSSIM
        assert np.isfinite(geo.values).all()

    def test_edge_relaxation(self, ring):
        cfg = CwSsimConfig(stride=2)
        base = pairwise_cwssim(ring, cfg)
        graph = knn_graph(base, t=2)
        geo = all_pairs_geodesic(graph)
        for i, j, w in zip(graph.edges_i, graph.edges_j, graph.weights):
            assert geo.values[i, j] <= w + 1e-12

    def test_geodesic_l2(self, ring):
        geo = geodesic_l2_matrix(ring, t=2)
        assert geo.kind is MatrixKind.GEO_L2
        assert np.isfinite(geo.values).all()
