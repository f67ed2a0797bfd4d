import math
import numpy as np
import pytest
from nlassopd.data_types import EmpiricalGraph, Partition
from nlassopd.exceptions import InvalidArgumentError, DomainError
from nlassopd.tests.conftest import path_graph, complete_graph, random_connected_graph
from nlassopd import data_gen
from nlassopd import graph_core


def test_incidence_on_chain(
        chain4
):
    """checks Dw and the total variation of a signal on a unit-weight chain"""

    w = np.array([1.0, 2.0, 4.0, 7.0])

    assert graph_core.apply_incidence(chain4, w)[:, 0].tolist() == [-1.0, -2.0, -3.0]
    assert graph_core.tv_norm(chain4, w) == pytest.approx(6.0)
    assert graph_core.tv_norm(chain4, w, edge_subset=[0, 2]) == pytest.approx(4.0)
    assert graph_core.tv_norm(chain4, w, edge_subset=[]) == 0.0


def test_tv_norm_rejects_unknown_edge(
        chain4
):
    """an edge subset naming a missing edge is an argument error"""

    with pytest.raises(InvalidArgumentError):
        graph_core.tv_norm(chain4, np.zeros(4), edge_subset=[3])


def test_constant_signal_has_zero_tv(
):
    """a constant signal has zero total variation on any graph"""

    g = random_connected_graph(12, seed=3)
    assert graph_core.tv_norm(g, np.tile([0.3, -1.2], (12, 1))) == 0.0


@pytest.mark.parametrize('seed', range(5))
def test_tv_identity_and_adjointness(
        seed
):
    """checks that the (2,1)-norm of Dw equals the edge-wise total variation and that D^T is the adjoint of D"""

    g = random_connected_graph(15, seed=seed)
    rng = np.random.default_rng(100 + seed)
    w = rng.standard_normal((15, 3))
    u = rng.standard_normal((g.edge_count, 3))

    direct = sum(a * np.linalg.norm(w[j] - w[i]) for i, j, a in zip(g.heads, g.tails, g.weights))
    assert graph_core.tv_norm(g, w) == pytest.approx(direct, rel=1e-12)

    lhs = float(np.sum(graph_core.apply_incidence(g, w) * u))
    rhs = float(np.sum(w * graph_core.apply_incidence_adjoint(g, u)))
    assert lhs == pytest.approx(rhs, rel=1e-12)

    lhs = float(np.sum(graph_core.apply_sqrt_incidence(g, w) * u))
    rhs = float(np.sum(w * graph_core.apply_sqrt_incidence_adjoint(g, u)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_laplacian_is_gram_of_sqrt_incidence(
):
    """checks L w = sqrt-incidence^T sqrt-incidence w, matrix-free and as sparse matrices"""

    g = random_connected_graph(10, seed=7)
    w = np.random.default_rng(1).standard_normal((10, 2))
    gram = graph_core.apply_sqrt_incidence_adjoint(g, graph_core.apply_sqrt_incidence(g, w))

    assert np.allclose(graph_core.laplacian_apply(g, w), gram, atol=1e-12)
    assert np.allclose(graph_core.laplacian_matrix(g) @ w, gram, atol=1e-12)
    sqrt_incidence = graph_core.incidence_matrix(g, sqrt_weights=True)
    assert np.allclose((sqrt_incidence.T @ sqrt_incidence).toarray(), graph_core.laplacian_matrix(g).toarray())
    assert np.allclose(graph_core.incidence_matrix(g) @ w, graph_core.apply_incidence(g, w))


def test_signal_shape_is_checked(
        chain4
):
    """node and edge signals of the wrong length are rejected"""

    with pytest.raises(InvalidArgumentError):
        graph_core.apply_incidence(chain4, np.zeros(5))
    with pytest.raises(InvalidArgumentError):
        graph_core.apply_incidence_adjoint(chain4, np.zeros((4, 2)))


def test_graph_validation(
):
    """self-loops, duplicate edges, non-positive weights, bad ids and isolated nodes are rejected"""

    with pytest.raises(InvalidArgumentError):
        EmpiricalGraph.from_edges(3, [(0, 0, 1.0), (1, 2, 1.0)])
    with pytest.raises(InvalidArgumentError):
        EmpiricalGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0), (1, 2, 1.0)])
    with pytest.raises(InvalidArgumentError):
        EmpiricalGraph.from_edges(3, [(0, 1, 0.0), (1, 2, 1.0)])
    with pytest.raises(InvalidArgumentError):
        EmpiricalGraph.from_edges(3, [(0, 1, 1.0), (1, 3, 1.0)])
    with pytest.raises(InvalidArgumentError):
        EmpiricalGraph.from_edges(3, [(0, 1, 1.0)])


def test_edges_keep_their_ids_in_canonical_orientation(
):
    """edges are stored with head < tail in input order"""

    g = EmpiricalGraph.from_edges(3, [(2, 1, 0.5), (1, 0, 2.0)])

    assert g.heads.tolist() == [1, 0]
    assert g.tails.tolist() == [2, 1]
    assert g.degrees.tolist() == [2.0, 2.5, 0.5]
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.max_weight == 2.0


def test_spectral_gap_small_graphs(
):
    """chain of 4 nodes: 2 - sqrt(2); complete graph on 4 nodes: 4"""

    assert graph_core.spectral_gap(path_graph(4)) == pytest.approx(2 - math.sqrt(2), abs=1e-12)
    assert graph_core.spectral_gap(EmpiricalGraph.from_edges(4, complete_graph(4))) == pytest.approx(4.0, abs=1e-12)
    assert graph_core.spectral_gap(path_graph(4, weight=3.0)) == pytest.approx(3 * (2 - math.sqrt(2)), abs=1e-12)


def test_spectral_gap_sparse_solver(
):
    """a star on 2001 nodes has Laplacian eigenvalues 0, 1 and N, so its gap is 1"""

    node_count = 2001
    star = EmpiricalGraph.from_edges(node_count, [(0, leaf, 1.0) for leaf in range(1, node_count)])
    assert graph_core.spectral_gap(star) == pytest.approx(1.0, abs=1e-6)


def test_disconnected_graph(
):
    """the spectral gap of a disconnected graph is a domain error naming a separated node"""

    g = EmpiricalGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])

    assert graph_core.connected_components(g)[0] == 2
    with pytest.raises(DomainError, match='node 3'):
        graph_core.spectral_gap(g)


def test_partition_validation(
        two_triangles,
        two_triangles_partition
):
    """clusters must cover the graph and induce connected subgraphs"""

    graph_core.validate_partition(two_triangles, two_triangles_partition)
    with pytest.raises(DomainError):
        graph_core.validate_partition(two_triangles, Partition(np.array([0, 0, 1, 1, 1, 0])))
    with pytest.raises(InvalidArgumentError):
        graph_core.validate_partition(two_triangles, Partition(np.array([0, 0, 0, 1, 1])))
    with pytest.raises(InvalidArgumentError):
        Partition(np.array([0, 0, 2, 2]))


def test_partition_spectral_gap_and_boundary(
        two_triangles,
        two_triangles_partition
):
    """each triangle has gap 3 and the bridge is the only boundary edge"""

    assert graph_core.partition_spectral_gap(two_triangles, two_triangles_partition) == pytest.approx(3.0)
    assert graph_core.boundary_edges(two_triangles, two_triangles_partition).tolist() == [6]

    single = Partition(np.zeros(6, dtype=np.int64))
    assert graph_core.partition_spectral_gap(two_triangles, single) == \
        pytest.approx(graph_core.spectral_gap(two_triangles))
    assert len(graph_core.boundary_edges(two_triangles, single)) == 0


def test_partition_gap_skips_single_node_clusters(
        chain4
):
    """a cluster of one node carries no spectral gap; if all clusters are singletons there is none"""

    p = Partition(np.array([0, 0, 0, 1]))
    assert graph_core.partition_spectral_gap(chain4, p) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        graph_core.partition_spectral_gap(chain4, Partition(np.arange(4)))


def test_max_flow(
        two_triangles
):
    """two edge-disjoint paths lead from node 0 to node 2 inside the first triangle"""

    capacities = np.ones(two_triangles.edge_count)

    assert graph_core.max_flow(two_triangles, 0, [2], capacities) == pytest.approx(2.0)
    assert graph_core.max_flow(two_triangles, 0, [4, 5], capacities) == pytest.approx(1.0)
    capacities[6] = 0.0
    assert graph_core.max_flow(two_triangles, 0, [4], capacities) == 0.0
    with pytest.raises(InvalidArgumentError):
        graph_core.max_flow(two_triangles, 0, [0, 1], capacities)
    with pytest.raises(InvalidArgumentError):
        graph_core.max_flow(two_triangles, 0, [], capacities)
    with pytest.raises(InvalidArgumentError):
        graph_core.max_flow(two_triangles, 0, [1], -capacities)


def test_normalized_connectivity(
        two_triangles,
        two_triangles_partition
):
    """each triangle routes a flow of 2 to its bridge endpoint, over a boundary of one edge"""

    report = graph_core.normalized_connectivity(two_triangles, two_triangles_partition, {0: 0, 1: 4})

    assert report.per_cluster == pytest.approx([2.0, 2.0])
    assert report.boundary_sizes == [1, 1]
    assert report.has_boundary == [True, True]
    assert report.mean == pytest.approx(2.0)


def test_normalized_connectivity_representatives(
        two_triangles,
        two_triangles_partition
):
    """a representative must be a non-boundary node of its cluster; a cluster without boundary is +inf"""

    with pytest.raises(InvalidArgumentError):
        graph_core.normalized_connectivity(two_triangles, two_triangles_partition, {0: 2, 1: 4})
    with pytest.raises(InvalidArgumentError):
        graph_core.normalized_connectivity(two_triangles, two_triangles_partition, {0: 4, 1: 4})
    with pytest.raises(InvalidArgumentError):
        graph_core.normalized_connectivity(two_triangles, two_triangles_partition, {0: 0})

    report = graph_core.normalized_connectivity(two_triangles, Partition(np.zeros(6, dtype=np.int64)), {})
    assert report.per_cluster == [float('inf')]
    assert report.has_boundary == [False]
    assert report.mean == float('inf')


def test_normalized_connectivity_cluster_without_interior(
):
    """a cluster made only of boundary endpoints scores 0 and is flagged, the other cluster is still computed"""

    g = EmpiricalGraph.from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 2, 1.0), (1, 4, 1.0)])
    p = Partition(np.array([0, 0, 1, 1, 1]))
    representatives = data_gen.two_cluster_representatives(g, p, [])
    assert representatives == {1: 3}

    report = graph_core.normalized_connectivity(g, p, representatives)

    assert report.per_cluster == pytest.approx([0.0, 1.0])
    assert report.no_interior == [True, False]
    assert report.has_boundary == [True, True]
    assert report.mean == pytest.approx(0.5)
