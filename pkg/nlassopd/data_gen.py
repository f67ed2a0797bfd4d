from typing import List, Dict, Tuple, Iterable
import logging
import numpy as np
import pandas as pd
import scipy.sparse
import scipy.sparse.csgraph
import scipy.spatial.distance
from nlassopd.data_types import EmpiricalGraph, Partition, LearningInstance, TwoClusterSpec, ChainSpec, \
    ImageGraphSpec, SquareImageSpec, WeatherSpec
from nlassopd.exp_family import GaussianLinearModel, ScalarSignalModel, LogisticModel
from nlassopd.exceptions import InvalidArgumentError, DomainError
from nlassopd import graph_core
from nlassopd import constants

logger = logging.getLogger(__name__)

# synthetic weather: day-to-day dynamics of the northern and southern regions
NORTH_LATITUDE = 65.0
NORTH_WEIGHTS = (0.6, 0.3, 0.1)
SOUTH_WEIGHTS = (0.2, 0.3, 0.5)
WEATHER_COLUMNS = ('station_id', 'lat', 'lon')


def gen_two_cluster(
        spec: TwoClusterSpec
) -> LearningInstance:
    """
    draws two G(n, p) clusters with p = degree / (n - 1), joins them by random inter-cluster edges and attaches
        networked linear regression data: features uniform on the unit sphere, labels y = x^T w_bar + noise
    :param spec: (TwoClusterSpec) setup
    :return: (LearningInstance) instance with true weights and partition
    """

    rng = np.random.default_rng(spec.seed)
    n: int = spec.cluster_size
    probability: float = min(1.0, spec.average_degree / max(n - 1, 1))

    edges: List[Tuple[int, int, float]] = []
    for offset in (0, n):
        heads, tails = __random_cluster(rng, n, probability, spec.max_retries)
        edges.extend((offset + i, offset + j, 1.0) for i, j in zip(heads, tails))

    picks: np.ndarray = rng.choice(n * n, size=spec.inter_cluster_edges, replace=False)
    edges.extend((int(pick // n), int(n + pick % n), 1.0) for pick in np.sort(picks))
    graph: EmpiricalGraph = EmpiricalGraph.from_edges(2 * n, edges)

    assignment: np.ndarray = np.repeat([0, 1], n)
    true_weights: np.ndarray = np.array([spec.weights_a, spec.weights_b], dtype=float)[assignment]
    features: np.ndarray = __unit_sphere(rng, 2 * n, spec.dim)
    targets: np.ndarray = np.einsum('nd,nd->n', features, true_weights) + spec.noise * rng.standard_normal(2 * n)

    training_set: np.ndarray = np.sort(np.concatenate([
        offset + rng.choice(n, size=spec.labels_per_cluster, replace=False) for offset in (0, n)
    ]))
    variance: float = spec.model_variance if spec.model_variance is not None else \
        max(spec.noise ** 2, constants.MIN_MODEL_VARIANCE)
    model = GaussianLinearModel(features, __observed(targets, training_set), np.full(2 * n, variance))

    logger.debug(f'two-cluster instance: N={2 * n}, E={graph.edge_count}, boundary={spec.inter_cluster_edges}')
    return LearningInstance(graph=graph, model=model, training_set=training_set, true_weights=true_weights,
                            partition=Partition(assignment), kind=constants.TWO_CLUSTER, targets=targets)


def gen_chain_signal(
        spec: ChainSpec
) -> LearningInstance:
    """
    builds the signal-in-noise instance y = w + noise with w_bar = +1 on the first half and -1 on the second half,
        on a chain (or on two random clusters joined by one edge), observed on the nodes 1, 2, 3, N-2, N-1, N
    :param spec: (ChainSpec) setup
    :return: (LearningInstance) instance with true weights and partition
    """

    node_count: int = spec.node_count
    if node_count < 8:
        raise InvalidArgumentError(constants.CHAIN_SIZE_ERR.format(n=node_count))
    rng = np.random.default_rng(spec.seed)
    half: int = node_count // 2

    if spec.topology == constants.CHAIN:
        edges: List[Tuple[int, int, float]] = [(i, i + 1, 1.0) for i in range(node_count - 1)]
    else:
        edges = []
        for offset, size in ((0, half), (half, node_count - half)):
            probability: float = min(1.0, spec.average_degree / max(size - 1, 1))
            heads, tails = __random_cluster(rng, size, probability, constants.MAX_GRAPH_RETRIES)
            edges.extend((offset + i, offset + j, 1.0) for i, j in zip(heads, tails))
        edges.append((half - 1, half, 1.0))
    graph: EmpiricalGraph = EmpiricalGraph.from_edges(node_count, edges)

    assignment: np.ndarray = (np.arange(node_count) >= half).astype(np.int64)
    true_weights: np.ndarray = np.where(assignment == 0, 1.0, -1.0).reshape(-1, 1)
    targets: np.ndarray = true_weights[:, 0] + spec.noise * rng.standard_normal(node_count)
    training_set: np.ndarray = np.array([0, 1, 2, node_count - 3, node_count - 2, node_count - 1])
    variance: float = spec.model_variance if spec.model_variance is not None else \
        max(spec.noise ** 2, constants.MIN_MODEL_VARIANCE)
    model = ScalarSignalModel(__observed(targets, training_set), variance)

    return LearningInstance(graph=graph, model=model, training_set=training_set, true_weights=true_weights,
                            partition=Partition(assignment), kind=constants.CHAIN, targets=targets)


def knn_graph(
        coordinates: np.ndarray,
        K: int
) -> EmpiricalGraph:
    """
    builds the symmetrized K-nearest-neighbor graph with unit weights: {i, j} is an edge if either node selects the
        other, distance ties are broken by the lower node id
    :param coordinates: (np.ndarray) (N, k) point per node
    :param K: (int) number of neighbors, 1 <= K < N
    :return: (EmpiricalGraph) graph
    """

    points: np.ndarray = np.asarray(coordinates, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    node_count: int = points.shape[0]
    if not 1 <= K < node_count:
        raise InvalidArgumentError(constants.KNN_ERR.format(n=node_count, k=K))

    distances: np.ndarray = scipy.spatial.distance.cdist(points, points)
    np.fill_diagonal(distances, np.inf)
    nearest: np.ndarray = np.argsort(distances, axis=1, kind='stable')[:, :K]

    rows: np.ndarray = np.repeat(np.arange(node_count), K)
    cols: np.ndarray = nearest.ravel()
    keys: np.ndarray = np.unique(np.minimum(rows, cols) * node_count + np.maximum(rows, cols))
    return EmpiricalGraph(node_count, keys // node_count, keys % node_count, np.ones(len(keys)))


def grid_graph(
        rows: int,
        cols: int
) -> EmpiricalGraph:
    """
    builds the 4-neighbor pixel grid graph with unit weights, pixel (p, q) being node p * cols + q
    :param rows: (int) image height P
    :param cols: (int) image width Q
    :return: (EmpiricalGraph) graph
    """

    ids: np.ndarray = np.arange(rows * cols).reshape(rows, cols)
    heads: np.ndarray = np.concatenate([ids[:, :-1].ravel(), ids[:-1, :].ravel()])
    tails: np.ndarray = np.concatenate([ids[:, 1:].ravel(), ids[1:, :].ravel()])
    return EmpiricalGraph(rows * cols, heads, tails, np.ones(len(heads)))


def image_to_instance(
        pixels: np.ndarray,
        spec: ImageGraphSpec = ImageGraphSpec()
) -> LearningInstance:
    """
    turns an RGB image into a networked logistic regression instance: grid graph, per-channel standardized colors as
        features, background seeds (label -1) where the normalized redness r = red / max red is below the background
        threshold and foreground seeds (label +1) where it exceeds the foreground threshold
    :param pixels: (np.ndarray) (P, Q, 3) image with channels in [0, 1]
    :param spec: (ImageGraphSpec) seed thresholds
    :return: (LearningInstance) instance
    """

    image: np.ndarray = np.asarray(pixels, dtype=float)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] * image.shape[1] < 2:
        raise InvalidArgumentError(constants.IMAGE_SHAPE_ERR.format(shape=image.shape))
    rows, cols = image.shape[0], image.shape[1]
    colors: np.ndarray = image.reshape(-1, 3)

    max_red: float = float(colors[:, 0].max())
    if not max_red > 0:
        raise DomainError(constants.DEGENERATE_IMAGE_ERR)
    redness: np.ndarray = colors[:, 0] / max_red

    background: np.ndarray = redness < spec.background_threshold
    foreground: np.ndarray = redness > spec.foreground_threshold
    for name, seeds in (('background', background), ('foreground', foreground)):
        if not np.any(seeds):
            raise DomainError(constants.EMPTY_CLASS_ERR.format(
                name=name, low=spec.background_threshold, high=spec.foreground_threshold
            ))

    means: np.ndarray = colors.mean(axis=0)
    stds: np.ndarray = colors.std(axis=0)
    constant: np.ndarray = stds < constants.STD_GUARD_EPS
    if np.any(constant):
        logger.warning(f'constant color channels {np.flatnonzero(constant).tolist()} standardized to zero')
    features: np.ndarray = np.where(constant, 0.0, (colors - means) / np.where(constant, 1.0, stds))

    labels: np.ndarray = np.full(rows * cols, np.nan)
    labels[background] = -1.0
    labels[foreground] = 1.0
    training_set: np.ndarray = np.flatnonzero(background | foreground)
    logger.info(f'image {rows}x{cols}: {int(background.sum())} background seeds, '
                f'{int(foreground.sum())} foreground seeds')
    return LearningInstance(graph=grid_graph(rows, cols), model=LogisticModel(features, labels),
                            training_set=training_set, kind=constants.IMAGE)


def synthetic_square_image(
        spec: SquareImageSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """
    draws a centered red square on a blue field with Gaussian channel noise clipped to [0, 1]
    :param spec: (SquareImageSpec) image setup
    :return: (Tuple[np.ndarray, np.ndarray]) (P, Q, 3) image and (P, Q) ground-truth mask of the square
    """

    rng = np.random.default_rng(spec.seed)
    top: int = (spec.rows - spec.square) // 2
    left: int = (spec.cols - spec.square) // 2
    mask: np.ndarray = np.zeros((spec.rows, spec.cols), dtype=bool)
    mask[top: top + spec.square, left: left + spec.square] = True

    image: np.ndarray = np.zeros((spec.rows, spec.cols, 3))
    image[..., 2] = 1.0
    image[mask] = (1.0, 0.0, 0.0)
    image += spec.noise * rng.standard_normal(image.shape)
    return np.clip(image, 0.0, 1.0), mask


def gen_synthetic_weather(
        spec: WeatherSpec
) -> pd.DataFrame:
    """
    draws a weather-station table (station_id, lat, lon, day_1 .. day_D) whose daily mean temperatures follow a
        smooth spatial field and, from the fourth day on, a regional linear recursion in the previous three days
    :param spec: (WeatherSpec) setup
    :return: (pd.DataFrame) station table
    """

    rng = np.random.default_rng(spec.seed)
    for _ in range(constants.MAX_GRAPH_RETRIES):
        coordinates: np.ndarray = np.column_stack([
            rng.uniform(60.0, 70.0, spec.station_count), rng.uniform(20.0, 30.0, spec.station_count)
        ])
        count, _ = graph_core.connected_components(knn_graph(coordinates, spec.neighbors))
        if count == 1:
            break
    else:
        raise DomainError(constants.RETRY_LIMIT_ERR.format(what='station graph', retries=constants.MAX_GRAPH_RETRIES))

    lat, lon = coordinates[:, 0], coordinates[:, 1]
    field: np.ndarray = 5.0 - 1.2 * (lat - 60.0) + 2.0 * np.sin(lon / 3.0)
    weights: np.ndarray = np.where((lat > NORTH_LATITUDE)[:, None], NORTH_WEIGHTS, SOUTH_WEIGHTS)

    temperatures: np.ndarray = np.zeros((spec.station_count, spec.day_count))
    for day in range(spec.day_count):
        if day < 3:
            temperatures[:, day] = field + spec.noise * rng.standard_normal(spec.station_count)
        else:
            history: np.ndarray = temperatures[:, day - 3: day][:, ::-1]
            temperatures[:, day] = np.einsum('nk,nk->n', weights, history) + \
                spec.noise * rng.standard_normal(spec.station_count)

    table = pd.DataFrame({'station_id': np.arange(1, spec.station_count + 1), 'lat': lat, 'lon': lon})
    for day in range(spec.day_count):
        table[f'day_{day + 1}'] = temperatures[:, day]
    return table


def weather_to_instance(
        table: pd.DataFrame,
        spec: WeatherSpec
) -> LearningInstance:
    """
    turns a weather-station table into a networked linear regression instance: K-nearest-neighbor graph on the station
        coordinates, feature = mean temperatures of the three days before the target day (most recent first),
        label = mean temperature of the target day. The focus cluster C is formed by the stations nearest to the
        focus center; every station outside C is labeled, inside C only a random subset of focus_labeled stations
    :param table: (pd.DataFrame) columns station_id, lat, lon and one column per day
    :param spec: (WeatherSpec) neighbors, target day, focus cluster and seed
    :return: (LearningInstance) instance whose targets include the held-out labels
    """

    day_columns: List[str] = [column for column in table.columns if column not in WEATHER_COLUMNS]
    if not 3 <= spec.target_day < len(day_columns):
        raise InvalidArgumentError(constants.WEATHER_DAYS_ERR.format(needed=spec.target_day + 1, days=len(day_columns)))
    station_count: int = len(table)
    if not spec.focus_size < station_count:
        raise InvalidArgumentError(constants.FOCUS_SIZE_ERR.format(size=spec.focus_size, n=station_count))

    days: np.ndarray = table[day_columns].to_numpy(dtype=float)
    features: np.ndarray = days[:, spec.target_day - 3: spec.target_day][:, ::-1].copy()
    targets: np.ndarray = days[:, spec.target_day].copy()
    coordinates: np.ndarray = table[['lat', 'lon']].to_numpy(dtype=float)
    graph: EmpiricalGraph = knn_graph(coordinates, spec.neighbors)

    distances: np.ndarray = scipy.spatial.distance.cdist([[spec.focus_lat, spec.focus_lon]], coordinates)[0]
    focus: np.ndarray = np.sort(np.argsort(distances, kind='stable')[:spec.focus_size])
    rng = np.random.default_rng(spec.seed)
    labeled_focus: np.ndarray = rng.choice(focus, size=spec.focus_labeled, replace=False)
    labeled_mask: np.ndarray = np.ones(station_count, dtype=bool)
    labeled_mask[focus] = False
    labeled_mask[labeled_focus] = True
    training_set: np.ndarray = np.flatnonzero(labeled_mask)

    model = GaussianLinearModel(features, __observed(targets, training_set))
    return LearningInstance(graph=graph, model=model, training_set=training_set, kind=constants.WEATHER,
                            targets=targets, focus_nodes=focus)


def two_cluster_representatives(
        g: EmpiricalGraph,
        p: Partition,
        training_set: Iterable[int]
) -> Dict[int, int]:
    """
    picks a flow source for every cluster: the lowest labeled node of the cluster that is no boundary endpoint,
        else its lowest non-boundary node; clusters made only of boundary endpoints get none
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition
    :param training_set: (Iterable[int]) labeled node ids
    :return: (Dict[int, int]) representative node per cluster index
    """

    boundary: np.ndarray = graph_core.boundary_edges(g, p)
    endpoints = set(g.heads[boundary].tolist()) | set(g.tails[boundary].tolist())
    labeled = set(int(i) for i in training_set)

    representatives: Dict[int, int] = {}
    for cluster_index, nodes in enumerate(p.clusters()):
        inner: List[int] = [int(i) for i in nodes if int(i) not in endpoints]
        preferred: List[int] = [i for i in inner if i in labeled]
        if len(preferred) > 0:
            representatives[cluster_index] = preferred[0]
        elif len(inner) > 0:
            representatives[cluster_index] = inner[0]
    return representatives


def __random_cluster(
        rng: np.random.Generator,
        n: int,
        probability: float,
        max_retries: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    draws a connected G(n, p) graph, redrawing until it is connected
    :param rng: (np.random.Generator) random generator
    :param n: (int) number of nodes
    :param probability: (float) edge probability
    :param max_retries: (int) number of draws allowed
    :return: (Tuple[np.ndarray, np.ndarray]) local edge endpoints
    """

    upper_rows, upper_cols = np.triu_indices(n, k=1)
    for _ in range(max_retries):
        chosen: np.ndarray = rng.random(len(upper_rows)) < probability
        heads, tails = upper_rows[chosen], upper_cols[chosen]
        adjacency = scipy.sparse.csr_matrix((np.ones(len(heads)), (heads, tails)), shape=(n, n))
        count, _ = scipy.sparse.csgraph.connected_components(adjacency, directed=False)
        if count == 1:
            return heads, tails
    raise DomainError(constants.RETRY_LIMIT_ERR.format(what='cluster', retries=max_retries))


def __unit_sphere(
        rng: np.random.Generator,
        count: int,
        dim: int
) -> np.ndarray:
    directions: np.ndarray = rng.standard_normal((count, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def __observed(
        targets: np.ndarray,
        training_set: np.ndarray
) -> np.ndarray:
    labels: np.ndarray = np.full(len(targets), np.nan)
    labels[training_set] = targets[training_set]
    return labels
