from typing import List, Dict, Optional, Iterable, Tuple
from dataclasses import dataclass, field
from collections import deque
import logging
import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import scipy.sparse.linalg
from nlassopd.data_types import EmpiricalGraph, Partition, NodeSignal, EdgeSignal
from nlassopd.exceptions import InvalidArgumentError, DomainError
from nlassopd import constants

logger = logging.getLogger(__name__)


@dataclass
class ConnectivityReport:
    """this class represents the normalized connectivity of every cluster of a partition

    Attributes:  # noqa
        per_cluster: (List[float]) max-flow value over boundary size, +inf for clusters without boundary
        boundary_sizes: (List[int]) number of boundary edges of every cluster
        has_boundary: (List[bool]) whether a cluster has boundary edges (False marks the +inf sentinel)
        mean: (float) average over clusters with boundary edges, +inf if there are none
        no_interior: (List[bool]) clusters whose every node is a boundary endpoint; their value is 0
    """
    per_cluster: List[float]
    boundary_sizes: List[int]
    has_boundary: List[bool]
    mean: float
    no_interior: List[bool] = field(default_factory=lambda: [])


def as_node_signal(
        g: EmpiricalGraph,
        w: NodeSignal
) -> NodeSignal:
    """
    validates a node signal and returns it as an (N, d) float array
    :param g: (EmpiricalGraph) graph
    :param w: (NodeSignal) node signal, (N,) arrays are read as d = 1
    :return: (NodeSignal) (N, d) array
    """

    signal: np.ndarray = np.asarray(w, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)
    if signal.ndim != 2 or signal.shape[0] != g.node_count:
        raise InvalidArgumentError(
            constants.DIMENSION_MISMATCH_ERR.format(expected=f'({g.node_count}, d)', actual=np.shape(w))
        )
    return signal


def as_edge_signal(
        g: EmpiricalGraph,
        u: EdgeSignal
) -> EdgeSignal:
    """
    validates an edge signal and returns it as an (E, d) float array
    :param g: (EmpiricalGraph) graph
    :param u: (EdgeSignal) edge signal, (E,) arrays are read as d = 1
    :return: (EdgeSignal) (E, d) array
    """

    signal: np.ndarray = np.asarray(u, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)
    if signal.ndim != 2 or signal.shape[0] != g.edge_count:
        raise InvalidArgumentError(
            constants.DIMENSION_MISMATCH_ERR.format(expected=f'({g.edge_count}, d)', actual=np.shape(u))
        )
    return signal


def apply_incidence(
        g: EmpiricalGraph,
        w: NodeSignal
) -> EdgeSignal:
    """
    applies the block-incidence matrix D: the e-th block of Dw is A_ij (w^(i) - w^(j)) for e = {i, j}, i < j
    :param g: (EmpiricalGraph) graph
    :param w: (NodeSignal) node signal
    :return: (EdgeSignal) Dw
    """

    return __incidence(g, as_node_signal(g, w), g.weights)


def apply_incidence_adjoint(
        g: EmpiricalGraph,
        u: EdgeSignal
) -> NodeSignal:
    """
    applies the transposed block-incidence matrix D^T
    :param g: (EmpiricalGraph) graph
    :param u: (EdgeSignal) edge signal
    :return: (NodeSignal) D^T u
    """

    return __incidence_adjoint(g, as_edge_signal(g, u), g.weights)


def apply_sqrt_incidence(
        g: EmpiricalGraph,
        w: NodeSignal
) -> EdgeSignal:
    """
    applies the incidence matrix with sqrt(A_ij) entries, whose Gram matrix is the graph Laplacian
    :param g: (EmpiricalGraph) graph
    :param w: (NodeSignal) node signal
    :return: (EdgeSignal) sqrt-weighted incidence applied to w
    """

    return __incidence(g, as_node_signal(g, w), np.sqrt(g.weights))


def apply_sqrt_incidence_adjoint(
        g: EmpiricalGraph,
        u: EdgeSignal
) -> NodeSignal:
    """
    applies the transposed incidence matrix with sqrt(A_ij) entries
    :param g: (EmpiricalGraph) graph
    :param u: (EdgeSignal) edge signal
    :return: (NodeSignal) transposed sqrt-weighted incidence applied to u
    """

    return __incidence_adjoint(g, as_edge_signal(g, u), np.sqrt(g.weights))


def incidence_matrix(
        g: EmpiricalGraph,
        sqrt_weights: bool = False
) -> scipy.sparse.csr_matrix:
    """
    returns the scalar (d = 1) incidence matrix as a sparse E x N matrix
    :param g: (EmpiricalGraph) graph
    :param sqrt_weights: (bool) use sqrt(A_ij) instead of A_ij
    :return: (scipy.sparse.csr_matrix) incidence matrix
    """

    scale: np.ndarray = np.sqrt(g.weights) if sqrt_weights else g.weights
    rows: np.ndarray = np.concatenate([np.arange(g.edge_count), np.arange(g.edge_count)])
    cols: np.ndarray = np.concatenate([g.heads, g.tails])
    data: np.ndarray = np.concatenate([scale, -scale])
    return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(g.edge_count, g.node_count))


def tv_norm(
        g: EmpiricalGraph,
        w: NodeSignal,
        edge_subset: Optional[Iterable[int]] = None
) -> float:
    """
    returns the total variation sum over edges in S of A_ij ||w^(j) - w^(i)||, i.e., the (2,1)-norm of Dw on S
    :param g: (EmpiricalGraph) graph
    :param w: (NodeSignal) node signal
    :param edge_subset: (Optional[Iterable[int]]) edge ids S, all edges if None
    :return: (float) total variation
    """

    block_norms: np.ndarray = np.linalg.norm(apply_incidence(g, w), axis=1)
    if edge_subset is None:
        return float(block_norms.sum())

    edge_ids: np.ndarray = np.asarray(sorted(set(int(e) for e in edge_subset)), dtype=np.int64)
    for e in edge_ids:
        if e < 0 or e >= g.edge_count:
            raise InvalidArgumentError(constants.EDGE_ID_ERR.format(edge=e))
    return float(block_norms[edge_ids].sum()) if len(edge_ids) > 0 else 0.0


def laplacian_apply(
        g: EmpiricalGraph,
        w: NodeSignal
) -> NodeSignal:
    """
    applies the block Laplacian (Lambda - A) kron I to a node signal, matrix-free
    :param g: (EmpiricalGraph) graph
    :param w: (NodeSignal) node signal
    :return: (NodeSignal) Lw
    """

    signal: np.ndarray = as_node_signal(g, w)
    return g.degrees[:, None] * signal - g.adjacency @ signal


def laplacian_matrix(
        g: EmpiricalGraph
) -> scipy.sparse.csr_matrix:
    """
    returns the scalar graph Laplacian as a sparse matrix
    :param g: (EmpiricalGraph) graph
    :return: (scipy.sparse.csr_matrix) Laplacian
    """

    return (scipy.sparse.diags(g.degrees) - g.adjacency).tocsr()


def connected_components(
        g: EmpiricalGraph
) -> Tuple[int, np.ndarray]:
    """
    labels the connected components of the graph
    :param g: (EmpiricalGraph) graph
    :return: (Tuple[int, np.ndarray]) number of components and component label of every node
    """

    count, labels = scipy.sparse.csgraph.connected_components(g.adjacency, directed=False)
    return int(count), labels


def check_connected(
        g: EmpiricalGraph
) -> None:
    """
    raises a domain error naming a separated component if the graph is disconnected
    :param g: (EmpiricalGraph) graph
    :return: (None)
    """

    count, labels = connected_components(g)
    if count > 1:
        node: int = int(np.argmax(labels != labels[0]))
        size: int = int(np.sum(labels == labels[node]))
        raise DomainError(constants.DISCONNECTED_ERR.format(node=node + 1, size=size))


def spectral_gap(
        g: EmpiricalGraph
) -> float:
    """
    returns the spectral gap rho(G), i.e., the smallest non-zero eigenvalue of the scalar Laplacian
    :param g: (EmpiricalGraph) connected graph
    :return: (float) spectral gap
    """

    check_connected(g)
    return __scalar_spectral_gap(g.node_count, g.heads, g.tails, g.weights)


def validate_partition(
        g: EmpiricalGraph,
        p: Partition
) -> None:
    """
    checks that a partition covers the graph nodes and that every cluster induces a connected subgraph
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition
    :return: (None)
    """

    if p.node_count != g.node_count:
        raise InvalidArgumentError(constants.PARTITION_SIZE_ERR.format(actual=p.node_count, expected=g.node_count))

    for cluster_index, nodes in enumerate(p.clusters()):
        if len(nodes) < 2:
            continue
        count, heads, tails, weights = __induced_edges(g, nodes)
        adjacency = scipy.sparse.csr_matrix((weights, (heads, tails)), shape=(count, count))
        components, _ = scipy.sparse.csgraph.connected_components(adjacency, directed=False)
        if components > 1:
            raise DomainError(constants.CLUSTER_DISCONNECTED_ERR.format(cluster=cluster_index + 1))


def partition_spectral_gap(
        g: EmpiricalGraph,
        p: Partition
) -> float:
    """
    returns rho_P, the smallest spectral gap over the subgraphs induced by the clusters
        (single-node clusters carry no spectral gap and are skipped)
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition with connected clusters
    :return: (float) partition spectral gap
    """

    validate_partition(g, p)
    gaps: List[float] = []
    for nodes in p.clusters():
        if len(nodes) < 2:
            continue
        gaps.append(__scalar_spectral_gap(*__induced_edges(g, nodes)))

    if len(gaps) == 0:
        raise DomainError(constants.PARTITION_NO_GAP_ERR)
    return min(gaps)


def boundary_edges(
        g: EmpiricalGraph,
        p: Partition
) -> np.ndarray:
    """
    returns the boundary edges, i.e., edges connecting different clusters
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition
    :return: (np.ndarray) boundary edge ids
    """

    return np.flatnonzero(p.assignment[g.heads] != p.assignment[g.tails])


def max_flow(
        g: EmpiricalGraph,
        source: int,
        sinks: Iterable[int],
        capacities: np.ndarray
) -> float:
    """
    returns the value of a maximum flow from a source to a super-sink attached to all sinks (Edmonds-Karp),
        every undirected edge acting as two opposite arcs with the edge capacity
    :param g: (EmpiricalGraph) graph
    :param source: (int) source node
    :param sinks: (Iterable[int]) sink nodes
    :param capacities: (np.ndarray) non-negative capacity per edge
    :return: (float) maximum flow value, 0 if no sink is reachable
    """

    sink_set = set(int(s) for s in sinks)
    if len(sink_set) == 0:
        raise InvalidArgumentError(constants.EMPTY_SINKS_ERR)
    if source in sink_set:
        raise InvalidArgumentError(constants.SOURCE_IN_SINKS_ERR.format(node=source + 1))
    capacities = np.asarray(capacities, dtype=float)
    if capacities.shape != (g.edge_count,) or np.any(capacities < 0):
        raise InvalidArgumentError(constants.CAPACITY_ERR)

    super_sink: int = g.node_count
    residual: List[Dict[int, float]] = [{} for _ in range(g.node_count + 1)]
    for i, j, capacity in zip(g.heads, g.tails, capacities):
        if capacity > 0:
            residual[i][j] = residual[i].get(j, 0.0) + capacity
            residual[j][i] = residual[j].get(i, 0.0) + capacity
    for s in sink_set:
        residual[s][super_sink] = float('inf')
        residual[super_sink].setdefault(s, 0.0)

    flow_value: float = 0.0
    while True:
        parent: Optional[List[int]] = __augmenting_path(residual, source, super_sink)
        if parent is None:
            break

        path_flow: float = float('inf')
        v: int = super_sink
        while v != source:
            path_flow = min(path_flow, residual[parent[v]][v])
            v = parent[v]

        v = super_sink
        while v != source:
            u: int = parent[v]
            residual[u][v] -= path_flow
            residual[v][u] = residual[v].get(u, 0.0) + path_flow
            v = u

        flow_value += path_flow

    return flow_value


def normalized_connectivity(
        g: EmpiricalGraph,
        p: Partition,
        representatives: Dict[int, int]
) -> ConnectivityReport:
    """
    computes, for every cluster, the maximum flow inside the cluster from its representative node to the
        cluster nodes incident to boundary edges (capacities A_ij), normalized by the number of boundary edges
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition
    :param representatives: (Dict[int, int]) representative node of every cluster (0-based cluster index); a
        cluster made only of boundary endpoints has none and gets the value 0
    :return: (ConnectivityReport) normalized connectivity per cluster and their mean
    """

    per_cluster: List[float] = []
    boundary_sizes: List[int] = []
    has_boundary: List[bool] = []
    no_interior: List[bool] = []

    for cluster_index in range(p.cluster_count):
        in_cluster: np.ndarray = p.assignment == cluster_index
        head_in: np.ndarray = in_cluster[g.heads]
        tail_in: np.ndarray = in_cluster[g.tails]
        boundary: np.ndarray = np.flatnonzero(head_in != tail_in)
        boundary_sizes.append(len(boundary))
        sinks: np.ndarray = np.unique(np.where(head_in[boundary], g.heads[boundary], g.tails[boundary]))
        representative: Optional[int] = representatives.get(cluster_index)
        no_interior.append(len(boundary) > 0 and len(sinks) == int(in_cluster.sum()) and representative is None)

        if len(boundary) == 0:
            per_cluster.append(float('inf'))
            has_boundary.append(False)
            continue

        if no_interior[-1]:
            logger.warning(f'cluster {cluster_index + 1} has no node off the boundary, normalized connectivity 0')
            per_cluster.append(0.0)
            has_boundary.append(True)
            continue

        if representative is None or not in_cluster[representative] or representative in sinks:
            raise InvalidArgumentError(
                constants.REPRESENTATIVE_ERR.format(node=representative, cluster=cluster_index + 1)
            )

        capacities: np.ndarray = np.where(head_in & tail_in, g.weights, 0.0)
        flow_value: float = max_flow(g, representative, sinks, capacities)
        per_cluster.append(flow_value / len(boundary))
        has_boundary.append(True)

    finite: List[float] = [value for value, flag in zip(per_cluster, has_boundary) if flag]
    mean: float = float(np.mean(finite)) if len(finite) > 0 else float('inf')
    return ConnectivityReport(per_cluster, boundary_sizes, has_boundary, mean, no_interior)


def __incidence(
        g: EmpiricalGraph,
        w: np.ndarray,
        edge_scale: np.ndarray
) -> np.ndarray:
    """
    applies an incidence operator with the given per-edge scale
    :param g: (EmpiricalGraph) graph
    :param w: (np.ndarray) validated (N, d) node signal
    :param edge_scale: (np.ndarray) per-edge scale
    :return: (np.ndarray) (E, d) edge signal
    """

    return edge_scale[:, None] * (w[g.heads] - w[g.tails])


def __incidence_adjoint(
        g: EmpiricalGraph,
        u: np.ndarray,
        edge_scale: np.ndarray
) -> np.ndarray:
    """
    applies a transposed incidence operator with the given per-edge scale, accumulating per node
    :param g: (EmpiricalGraph) graph
    :param u: (np.ndarray) validated (E, d) edge signal
    :param edge_scale: (np.ndarray) per-edge scale
    :return: (np.ndarray) (N, d) node signal
    """

    scaled: np.ndarray = edge_scale[:, None] * u
    result: np.ndarray = np.zeros((g.node_count, u.shape[1]))
    np.add.at(result, g.heads, scaled)
    np.add.at(result, g.tails, -scaled)
    return result


def __induced_edges(
        g: EmpiricalGraph,
        nodes: np.ndarray
) -> Tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """
    returns the edges of the subgraph induced by a node set, relabeled to 0..len(nodes)-1
    :param g: (EmpiricalGraph) graph
    :param nodes: (np.ndarray) sorted node ids
    :return: (Tuple[int, np.ndarray, np.ndarray, np.ndarray]) node count, heads, tails, weights
    """

    local: np.ndarray = np.full(g.node_count, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    inside: np.ndarray = (local[g.heads] >= 0) & (local[g.tails] >= 0)
    return len(nodes), local[g.heads[inside]], local[g.tails[inside]], g.weights[inside]


def __scalar_spectral_gap(
        node_count: int,
        heads: np.ndarray,
        tails: np.ndarray,
        weights: np.ndarray
) -> float:
    """
    returns the second smallest eigenvalue of a connected graph's Laplacian
    :param node_count: (int) number of nodes
    :param heads: (np.ndarray) edge endpoints
    :param tails: (np.ndarray) edge endpoints
    :param weights: (np.ndarray) edge weights
    :return: (float) spectral gap
    """

    adjacency = scipy.sparse.csr_matrix(
        (np.concatenate([weights, weights]), (np.concatenate([heads, tails]), np.concatenate([tails, heads]))),
        shape=(node_count, node_count)
    )
    degrees: np.ndarray = np.asarray(adjacency.sum(axis=1)).ravel()

    if node_count <= constants.DENSE_EIGEN_MAX_NODES:
        laplacian: np.ndarray = np.diag(degrees) - adjacency.toarray()
        eigenvalues: np.ndarray = scipy.linalg.eigh(laplacian, eigvals_only=True)
        return float(eigenvalues[1])

    # largest eigenvalue of P (cI - L) P with P removing the constant vector equals c - lambda_2
    shift: float = 2.0 * float(degrees.max())

    def shifted(x: np.ndarray) -> np.ndarray:
        x = x - x.mean()
        y = shift * x - (degrees * x - adjacency @ x)
        return y - y.mean()

    operator = scipy.sparse.linalg.LinearOperator((node_count, node_count), matvec=shifted, dtype=float)
    start: np.ndarray = np.random.default_rng(0).standard_normal(node_count)
    top = scipy.sparse.linalg.eigsh(operator, k=1, which='LA', v0=start - start.mean(), tol=1e-12,
                                    return_eigenvectors=False)
    logger.debug('spectral gap of %d-node graph via deflated shifted Lanczos', node_count)
    return float(shift - top[0])


def __augmenting_path(
        residual: List[Dict[int, float]],
        source: int,
        target: int
) -> Optional[List[int]]:
    """
    finds a shortest augmenting path in the residual network by breadth-first search
    :param residual: (List[Dict[int, float]]) residual capacities per node
    :param source: (int) source node
    :param target: (int) target node
    :return: (Optional[List[int]]) parent pointers of the BFS tree if the target is reachable, else None
    """

    parent: List[int] = [-1] * len(residual)
    visited: List[bool] = [False] * len(residual)
    visited[source] = True
    queue = deque([source])

    while queue:
        u = queue.popleft()
        for v in sorted(residual[u]):
            if not visited[v] and residual[u][v] > constants.FLOW_RESIDUAL_EPS:
                visited[v] = True
                parent[v] = u
                if v == target:
                    return parent
                queue.append(v)

    return None
