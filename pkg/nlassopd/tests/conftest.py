from typing import Callable
import numpy as np
import pytest
from nlassopd.data_types import EmpiricalGraph, Partition


def path_graph(
        node_count: int,
        weight: float = 1.0
) -> EmpiricalGraph:
    """builds the chain 0 - 1 - ... - (N-1) with equal edge weights"""

    return EmpiricalGraph.from_edges(node_count, [(i, i + 1, weight) for i in range(node_count - 1)])


def complete_graph(
        node_count: int,
        offset: int = 0
) -> list:
    """returns the unit-weight edges of a complete graph on offset .. offset + N - 1"""

    return [(offset + i, offset + j, 1.0) for i in range(node_count) for j in range(i + 1, node_count)]


def random_connected_graph(
        node_count: int,
        seed: int,
        probability: float = 0.3
) -> EmpiricalGraph:
    """draws a connected graph: a random spanning chain plus random extra edges with weights in [0.5, 2]"""

    rng = np.random.default_rng(seed)
    order: np.ndarray = rng.permutation(node_count)
    edges = {(min(a, b), max(a, b)) for a, b in zip(order[:-1], order[1:])}
    for i in range(node_count):
        for j in range(i + 1, node_count):
            if rng.random() < probability:
                edges.add((i, j))
    edge_list = sorted(edges)
    weights: np.ndarray = rng.uniform(0.5, 2.0, len(edge_list))
    return EmpiricalGraph.from_edges(node_count, [(int(i), int(j), float(w)) for (i, j), w in zip(edge_list, weights)])


@pytest.fixture
def chain4(
) -> EmpiricalGraph:
    return path_graph(4)


@pytest.fixture
def two_triangles(
) -> EmpiricalGraph:
    """two unit-weight triangles {0, 1, 2} and {3, 4, 5} joined by the bridge {2, 3}"""

    return EmpiricalGraph.from_edges(6, complete_graph(3) + complete_graph(3, offset=3) + [(2, 3, 1.0)])


@pytest.fixture
def two_triangles_partition(
) -> Partition:
    return Partition(np.array([0, 0, 0, 1, 1, 1]))


@pytest.fixture
def random_graph(
) -> Callable[..., EmpiricalGraph]:
    return random_connected_graph
