from typing import List, Dict, Optional, Tuple, Iterable, Any
from dataclasses import dataclass, field, asdict
from functools import cached_property
from typing import TYPE_CHECKING
import numpy as np
import scipy.sparse
if TYPE_CHECKING:
    from nlassopd.exp_family import ExpFamilyModel
from nlassopd.exceptions import InvalidArgumentError, ConfigurationError
from nlassopd import constants

# graph signals are dense arrays with one d-dimensional block per row
NodeSignal = np.ndarray  # shape (N, d)
EdgeSignal = np.ndarray  # shape (E, d)


@dataclass(frozen=True)
class EmpiricalGraph:
    """this class represents the empirical graph, i.e., an undirected weighted graph whose nodes are data points

    Edges are stored in canonical orientation (heads < tails). Edge e has identifier e in 0..E-1
    and keeps it for the lifetime of the graph. Nodes are 0-based; files and messages use 1-based ids.

    Attributes:  # noqa
        node_count: (int) number of nodes N
        heads: (np.ndarray) lower endpoint i of every edge
        tails: (np.ndarray) higher endpoint j of every edge
        weights: (np.ndarray) positive edge weights A_ij
        degrees: (np.ndarray) weighted node degrees d_i
    """
    node_count: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.node_count <= 0:
            raise InvalidArgumentError(constants.NODE_COUNT_ERR.format(node_count=self.node_count))

        heads = np.asarray(self.heads, dtype=np.int64).ravel()
        tails = np.asarray(self.tails, dtype=np.int64).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if not (len(heads) == len(tails) == len(weights)):
            raise InvalidArgumentError(
                constants.DIMENSION_MISMATCH_ERR.format(expected=len(heads), actual=(len(tails), len(weights)))
            )

        for node in np.concatenate([heads, tails]):
            if node < 0 or node >= self.node_count:
                raise InvalidArgumentError(
                    constants.NODE_RANGE_ERR.format(node=node + 1, node_count=self.node_count)
                )

        loops = np.flatnonzero(heads == tails)
        if len(loops) > 0:
            raise InvalidArgumentError(constants.SELF_LOOP_ERR.format(node=heads[loops[0]] + 1))

        low: np.ndarray = np.minimum(heads, tails)
        high: np.ndarray = np.maximum(heads, tails)

        keys: np.ndarray = low * self.node_count + high
        unique_keys, counts = np.unique(keys, return_counts=True)
        if np.any(counts > 1):
            duplicate = unique_keys[np.argmax(counts > 1)]
            raise InvalidArgumentError(
                constants.DUPLICATE_EDGE_ERR.format(i=duplicate // self.node_count + 1, j=duplicate % self.node_count + 1)
            )

        bad = np.flatnonzero(~(weights > 0))
        if len(bad) > 0:
            e = bad[0]
            raise InvalidArgumentError(constants.EDGE_WEIGHT_ERR.format(i=low[e] + 1, j=high[e] + 1, weight=weights[e]))

        degrees: np.ndarray = np.bincount(low, weights=weights, minlength=self.node_count) + \
            np.bincount(high, weights=weights, minlength=self.node_count)
        isolated = np.flatnonzero(degrees <= 0)
        if len(isolated) > 0:
            raise InvalidArgumentError(constants.ISOLATED_NODE_ERR.format(node=isolated[0] + 1))

        for array in (low, high, weights, degrees):
            array.flags.writeable = False
        object.__setattr__(self, 'heads', low)
        object.__setattr__(self, 'tails', high)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'degrees', degrees)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Tuple[int, int, float]]) -> 'EmpiricalGraph':
        """
        builds a graph from (i, j, A_ij) triples with 0-based node ids, in any orientation
        :param node_count: (int) number of nodes
        :param edges: (Iterable[Tuple[int, int, float]]) weighted edges
        :return: (EmpiricalGraph) graph
        """

        edge_list: List[Tuple[int, int, float]] = list(edges)
        if len(edge_list) == 0:
            return cls(node_count, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))
        heads, tails, weights = zip(*edge_list)
        return cls(node_count, np.array(heads), np.array(tails), np.array(weights, dtype=float))

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    @cached_property
    def adjacency(self) -> scipy.sparse.csr_matrix:
        """symmetric weighted adjacency matrix A"""
        rows = np.concatenate([self.heads, self.tails])
        cols = np.concatenate([self.tails, self.heads])
        data = np.concatenate([self.weights, self.weights])
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(self.node_count, self.node_count))

    def neighbors(self, node: int) -> np.ndarray:
        """
        returns the neighborhood of a node
        :param node: (int) node id
        :return: (np.ndarray) sorted neighbor ids
        """

        adjacency = self.adjacency
        return np.sort(adjacency.indices[adjacency.indptr[node]: adjacency.indptr[node + 1]])


@dataclass(frozen=True)
class Partition:
    """this class represents a partition of the nodes into disjoint clusters

    Attributes:  # noqa
        assignment: (np.ndarray) cluster index (0-based, no gaps) of every node
    """
    assignment: np.ndarray

    def __post_init__(self):
        assignment = np.array(self.assignment, dtype=np.int64).ravel()
        if len(assignment) == 0 or assignment.min() < 0:
            raise InvalidArgumentError(constants.PARTITION_SIZE_ERR.format(actual=len(assignment), expected='>0'))
        counts = np.bincount(assignment)
        empty = np.flatnonzero(counts == 0)
        if len(empty) > 0:
            raise InvalidArgumentError(
                constants.PARTITION_EMPTY_CLUSTER_ERR.format(count=len(counts), cluster=empty[0] + 1)
            )
        assignment.flags.writeable = False
        object.__setattr__(self, 'assignment', assignment)

    @property
    def cluster_count(self) -> int:
        return int(self.assignment.max()) + 1

    @property
    def node_count(self) -> int:
        return len(self.assignment)

    def clusters(self) -> List[np.ndarray]:
        """
        returns the member nodes of every cluster
        :return: (List[np.ndarray]) sorted node ids per cluster
        """

        return [np.flatnonzero(self.assignment == c) for c in range(self.cluster_count)]

    def cluster_sizes(self) -> List[int]:
        return [int(size) for size in np.bincount(self.assignment)]


@dataclass(frozen=True)
class ClusteredSignalSpec:
    """this class represents a clustered (piece-wise constant) signal

    Attributes:  # noqa
        partition: (Partition) node partition
        cluster_values: (np.ndarray) value v^(C) of every cluster, shape (|P|, d)
    """
    partition: Partition
    cluster_values: np.ndarray

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.cluster_values, dtype=float))
        if values.shape[0] != self.partition.cluster_count:
            raise InvalidArgumentError(
                constants.CLUSTERED_SPEC_ERR.format(actual=values.shape[0], expected=self.partition.cluster_count)
            )
        object.__setattr__(self, 'cluster_values', values)


@dataclass(frozen=True)
class Preconditioners:
    """this class represents the diagonal preconditioners of the primal-dual method

    Attributes:  # noqa
        sigma: (np.ndarray) dual step size 1 / (2 A_e) per edge
        tau: (np.ndarray) primal step size tau / d_i per node
        global_tau: (float) global primal step factor in (0, 1)
    """
    sigma: np.ndarray
    tau: np.ndarray
    global_tau: float


@dataclass
class SolverConfig:
    """this class represents a primal-dual nLasso configuration

    Attributes:  # noqa
        lam: (float) TV regularization strength lambda
        tau: (float) global primal step factor in (0, 1)
        max_iterations: (int) iteration budget
        tolerance: (Optional[float]) relative iterate-change tolerance, or None for a fixed budget
        primal_update: (str) node-wise primal update for non-quadratic models
        inexactness_floor: (float) cap epsilon_0 of the inexactness schedule e_k = min(epsilon_0, 1/k^2)
        check_step_size: (bool) whether to certify the step-size condition at startup
    """
    lam: float
    tau: float = constants.DEFAULT_TAU
    max_iterations: int = constants.DEFAULT_MAX_ITERATIONS
    tolerance: Optional[float] = None
    primal_update: str = constants.FIXED_POINT
    inexactness_floor: float = constants.DEFAULT_INEXACTNESS_FLOOR
    check_step_size: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError(constants.LAMBDA_ERR.format(lam=self.lam))
        if not 0 < self.tau < 1:
            raise ConfigurationError(constants.TAU_RANGE_ERR.format(tau=self.tau))
        if self.max_iterations < 1:
            raise ConfigurationError(constants.MAX_ITERATIONS_ERR.format(max_iterations=self.max_iterations))
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigurationError(constants.TOLERANCE_ERR.format(tolerance=self.tolerance))
        if self.primal_update not in constants.PRIMAL_UPDATE_MODES:
            raise ConfigurationError(
                constants.PRIMAL_MODE_ERR.format(modes=constants.PRIMAL_UPDATE_MODES, mode=self.primal_update)
            )
        if not self.inexactness_floor > 0:
            raise ConfigurationError(constants.INEXACTNESS_ERR.format(floor=self.inexactness_floor))


@dataclass
class SolverHistory:
    """this class represents the per-iteration record of a solve

    Attributes:  # noqa
        iterations: (List[int]) iteration indices k (1-based)
        objectives: (List[float]) nLasso objective of the primal iterate
        iterate_changes: (List[float]) relative change of the primal iterate
        max_dual_norms: (List[float]) largest dual block norm after the dual step
        stop_reason: (str) why the solver stopped
    """
    iterations: List[int] = field(default_factory=lambda: [])
    objectives: List[float] = field(default_factory=lambda: [])
    iterate_changes: List[float] = field(default_factory=lambda: [])
    max_dual_norms: List[float] = field(default_factory=lambda: [])
    stop_reason: str = ''

    def record(self, iteration: int, objective: float, iterate_change: float, max_dual_norm: float) -> None:
        self.iterations.append(iteration)
        self.objectives.append(objective)
        self.iterate_changes.append(iterate_change)
        self.max_dual_norms.append(max_dual_norm)


@dataclass
class SolverState:
    """this class represents the state of one primal-dual solve

    Attributes:  # noqa
        iteration: (int) completed iterations k
        weights: (NodeSignal) primal iterate w_k
        duals: (EdgeSignal) dual iterate u_k
        lam: (float) regularization strength
        history: (SolverHistory) objective and iterate-change record
    """
    iteration: int
    weights: NodeSignal
    duals: EdgeSignal
    lam: float
    history: SolverHistory = field(default_factory=SolverHistory)


@dataclass
class RncConfig:
    """this class represents a configuration of the Laplacian-regularized baseline

    Attributes:  # noqa
        lam: (float) Laplacian regularization strength (0 only when every node is labeled)
        cg_tol: (float) relative residual tolerance of conjugate gradients
        cg_max_iterations: (int) conjugate-gradient iteration budget
    """
    lam: float
    cg_tol: float = constants.DEFAULT_RNC_CG_TOL
    cg_max_iterations: int = constants.DEFAULT_RNC_CG_MAX_ITERATIONS

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigurationError(constants.RNC_LAMBDA_ERR.format(lam=self.lam))
        if not self.cg_tol > 0:
            raise ConfigurationError(constants.TOLERANCE_ERR.format(tolerance=self.cg_tol))
        if self.cg_max_iterations < 1:
            raise ConfigurationError(constants.MAX_ITERATIONS_ERR.format(max_iterations=self.cg_max_iterations))


@dataclass(frozen=True)
class Theorem1Params:
    """this class represents the constants entering the nLasso error bound

    Attributes:  # noqa
        K: (float) compatibility constant K
        asspt3_L: (float) compatibility constant L (must exceed 3)
        U: (float) upper bound on the Fisher information
        d: (int) weight dimension
        cluster_sizes: (Tuple[int, ...]) size of every cluster
        M: (int) training set size
        rho_partition: (float) partition spectral gap
        max_weight: (float) largest edge weight ||A||_inf
        edge_count: (int) number of edges
        eta: (float) target TV error level
        asspt2_L: (Optional[float]) lower bound on the Fisher information, reported only
    """
    K: float
    asspt3_L: float
    U: float
    d: int
    cluster_sizes: Tuple[int, ...]
    M: int
    rho_partition: float
    max_weight: float
    edge_count: int
    eta: float
    asspt2_L: Optional[float] = None

    def __post_init__(self):
        if not self.asspt3_L > 3:
            raise ConfigurationError(constants.THEOREM_L_ERR.format(L=self.asspt3_L))
        if not 1 < self.K < self.asspt3_L - 2:
            raise ConfigurationError(constants.THEOREM_K_ERR.format(upper=self.asspt3_L - 2, K=self.K))
        for name in ('U', 'd', 'M', 'rho_partition', 'max_weight', 'edge_count', 'eta'):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(constants.THEOREM_POSITIVE_ERR.format(name=name, value=value))
        if len(self.cluster_sizes) == 0 or min(self.cluster_sizes) <= 0:
            raise ConfigurationError(constants.THEOREM_POSITIVE_ERR.format(name='cluster_sizes', value=self.cluster_sizes))
        object.__setattr__(self, 'cluster_sizes', tuple(int(size) for size in self.cluster_sizes))

    @property
    def partition_count(self) -> int:
        return len(self.cluster_sizes)

    @property
    def kappa(self) -> float:
        return (self.K + 3) / (self.asspt3_L - 3)


@dataclass
class TwoClusterSpec:
    """this class represents the two-cluster networked linear regression setup

    Attributes:  # noqa
        cluster_size: (int) nodes per cluster N/2
        average_degree: (float) target average degree inside each cluster
        inter_cluster_edges: (int) number of boundary edges
        dim: (int) feature dimension d
        weights_a: (Tuple[float, ...]) true weight vector of the first cluster
        weights_b: (Tuple[float, ...]) true weight vector of the second cluster
        labels_per_cluster: (int) labeled nodes per cluster
        noise: (float) label noise standard deviation
        seed: (int) random seed
        model_variance: (Optional[float]) noise variance known to the model (default max(noise^2, floor))
        max_retries: (int) redraws allowed to obtain connected clusters
    """
    cluster_size: int = 40
    average_degree: float = 10.0
    inter_cluster_edges: int = 3
    dim: int = 2
    weights_a: Tuple[float, ...] = (1.0, 1.0)
    weights_b: Tuple[float, ...] = (-1.0, 1.0)
    labels_per_cluster: int = 3
    noise: float = 0.0
    seed: int = 0
    model_variance: Optional[float] = None
    max_retries: int = 100

    def __post_init__(self):
        for name in ('cluster_size', 'average_degree', 'dim', 'max_retries'):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name=name, value=value))
        if not 0 <= self.inter_cluster_edges <= self.cluster_size ** 2:
            raise ConfigurationError(
                constants.INTER_EDGES_ERR.format(max_edges=self.cluster_size ** 2, edges=self.inter_cluster_edges)
            )
        if not 1 <= self.labels_per_cluster <= self.cluster_size:
            raise ConfigurationError(
                constants.LABELS_PER_CLUSTER_ERR.format(size=self.cluster_size, labels=self.labels_per_cluster)
            )
        if len(self.weights_a) != self.dim or len(self.weights_b) != self.dim:
            raise ConfigurationError(
                constants.DIMENSION_MISMATCH_ERR.format(expected=self.dim, actual=(len(self.weights_a), len(self.weights_b)))
            )
        if self.noise < 0:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='noise', value=self.noise))
        if self.model_variance is not None and not self.model_variance > 0:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='model_variance', value=self.model_variance))


@dataclass
class ChainSpec:
    """this class represents the networked signal-in-noise setup

    Attributes:  # noqa
        node_count: (int) number of nodes N
        noise: (float) label noise standard deviation sigma
        seed: (int) random seed
        topology: (str) 'chain' or 'two_cluster'
        average_degree: (float) cluster degree of the two-cluster variant
        model_variance: (Optional[float]) noise variance known to the model (default max(sigma^2, floor))
    """
    node_count: int = 40
    noise: float = 0.1
    seed: int = 0
    topology: str = constants.CHAIN
    average_degree: float = 10.0
    model_variance: Optional[float] = None

    def __post_init__(self):
        if self.topology not in (constants.CHAIN, constants.TWO_CLUSTER):
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(field='topology', reason=self.topology))
        if self.noise < 0:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='noise', value=self.noise))
        if self.model_variance is not None and not self.model_variance > 0:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='model_variance', value=self.model_variance))


@dataclass
class ImageGraphSpec:
    """this class represents the seed thresholds of the image segmentation setup

    Attributes:  # noqa
        background_threshold: (float) pixels with normalized redness below are background seeds
        foreground_threshold: (float) pixels with normalized redness above are foreground seeds
    """
    background_threshold: float = constants.BACKGROUND_THRESHOLD
    foreground_threshold: float = constants.FOREGROUND_THRESHOLD


@dataclass
class SquareImageSpec:
    """this class represents a synthetic red-square-on-blue image

    Attributes:  # noqa
        rows: (int) image height P
        cols: (int) image width Q
        square: (int) side of the centered red square
        noise: (float) per-channel noise standard deviation (values are clipped to [0, 1])
        seed: (int) random seed
    """
    rows: int = 32
    cols: int = 32
    square: int = 12
    noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ('rows', 'cols', 'square'):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name=name, value=value))
        if self.square > min(self.rows, self.cols):
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(field='square', reason='larger than the image'))
        if self.noise < 0:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='noise', value=self.noise))


@dataclass
class WeatherSpec:
    """this class represents the synthetic weather-station setup

    Attributes:  # noqa
        station_count: (int) number of stations
        day_count: (int) number of daily mean temperature columns
        neighbors: (int) K of the nearest-neighbor graph
        target_day: (int) index of the day whose mean is the label (needs three preceding days)
        noise: (float) temperature noise standard deviation
        focus_lat: (float) latitude of the center of the focus cluster
        focus_lon: (float) longitude of the center of the focus cluster
        focus_size: (int) number of stations nearest to the center that form the focus cluster C
        focus_labeled: (int) stations of C whose label stays observed; all stations outside C are labeled
        seed: (int) random seed
    """
    station_count: int = 60
    day_count: int = 10
    neighbors: int = 3
    target_day: int = 9
    noise: float = 0.3
    focus_lat: float = 60.2
    focus_lon: float = 24.9
    focus_size: int = 9
    focus_labeled: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.station_count > self.neighbors >= 1:
            raise ConfigurationError(constants.KNN_ERR.format(n=self.station_count, k=self.neighbors))
        if not 3 <= self.target_day < self.day_count:
            raise ConfigurationError(constants.WEATHER_DAYS_ERR.format(needed=self.target_day + 1, days=self.day_count))
        if not 0 < self.focus_size < self.station_count:
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(
                field='focus_size', reason=f'must lie in [1, {self.station_count - 1}], got {self.focus_size}'
            ))
        if not 0 <= self.focus_labeled <= self.focus_size:
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(
                field='focus_labeled', reason=f'must lie in [0, {self.focus_size}], got {self.focus_labeled}'
            ))


@dataclass
class LearningInstance:
    """this class represents a learning instance: graph, node model and training set

    Attributes:  # noqa
        graph: (EmpiricalGraph) empirical graph
        model: (ExpFamilyModel) node-wise exponential-family model
        training_set: (np.ndarray) sorted labeled node ids
        true_weights: (Optional[NodeSignal]) ground-truth weights, if known
        partition: (Optional[Partition]) ground-truth partition, if known
        kind: (str) instance kind
        targets: (Optional[np.ndarray]) label of every node including held-out ones, if known
        focus_nodes: (Optional[np.ndarray]) sorted node ids of a cluster singled out for evaluation, if any
    """
    graph: EmpiricalGraph
    model: 'ExpFamilyModel'
    training_set: np.ndarray
    true_weights: Optional[NodeSignal] = None
    partition: Optional[Partition] = None
    kind: str = ''
    targets: Optional[np.ndarray] = None
    focus_nodes: Optional[np.ndarray] = None


@dataclass
class RunManifest:
    """this class represents the manifest every CLI run writes next to its outputs

    Attributes:  # noqa
        subcommand: (str) CLI subcommand
        config: (Dict[str, Any]) full configuration echo
        seed: (int) random seed
        version: (str) version string
        timings: (Dict[str, float]) wall-clock seconds per phase
        created: (str) creation timestamp
    """
    subcommand: str
    config: Dict[str, Any]
    seed: int
    version: str
    timings: Dict[str, float] = field(default_factory=lambda: {})
    created: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SolveResult:
    """this class represents the output of a primal-dual nLasso solve

    Attributes:  # noqa
        weights: (NodeSignal) final primal iterate w
        duals: (EdgeSignal) final dual iterate u
        history: (SolverHistory) per-iteration record
        step_size_norm: (Optional[float]) estimate of ||Sigma^1/2 D T^1/2||^2, None if not certified
    """
    weights: NodeSignal
    duals: EdgeSignal
    history: SolverHistory
    step_size_norm: Optional[float] = None


@dataclass(frozen=True)
class StationarityReport:
    """this class represents the saddle-point optimality residuals of a primal-dual pair

    Attributes:  # noqa
        labeled: (float) largest ||local loss gradient + (D^T u)^(i)|| over labeled nodes
        unlabeled: (float) largest ||(D^T u)^(i)|| over unlabeled nodes, 0 if all nodes are labeled
        dual_excess: (float) largest amount by which a dual block norm exceeds lambda
    """
    labeled: float
    unlabeled: float
    dual_excess: float


@dataclass(frozen=True)
class Theorem1Result:
    """this class represents an evaluation of the nLasso TV-error probability bound

    Attributes:  # noqa
        bound: (float) upper bound on P{||w_hat - w_bar||_TV >= eta}
        cluster_term: (float) contribution of the cluster sizes
        edge_term: (float) contribution of the edges
        kappa: (float) (K + 3) / (L - 3)
        kappa_proof: (float) (K + 1) / (L - 1), the variant the derivation of the bound works with
        lambda_prescribed: (float) regularization strength eta / (5 kappa^2)
        vacuous: (bool) whether the bound is at least 1
    """
    bound: float
    cluster_term: float
    edge_term: float
    kappa: float
    kappa_proof: float
    lambda_prescribed: float
    vacuous: bool


@dataclass(frozen=True)
class PseudoInverseBound:
    """this class represents the bound sqrt(2 d max A) / rho(G) on the column blocks of the incidence pseudo-inverse

    Attributes:  # noqa
        bound: (float) sqrt(2 d max A_ij) / rho(G)
        exact: (Optional[float]) largest block norm of the sqrt(A) incidence pseudo-inverse, None above the dense size
            limit
        holds: (Optional[bool]) whether exact <= bound, None if exact was not computed
        exact_weighted: (Optional[float]) largest block norm of the A-weighted incidence pseudo-inverse, not checked
    """
    bound: float
    exact: Optional[float] = None
    holds: Optional[bool] = None
    exact_weighted: Optional[float] = None
