from typing import Iterable
import logging
import math
import numpy as np
import scipy.linalg
import scipy.sparse
from nlassopd.data_types import EmpiricalGraph, NodeSignal, EdgeSignal, Preconditioners, SolverConfig, SolverState, \
    SolveResult, StationarityReport
from nlassopd.exp_family import ExpFamilyModel, GaussianLinearModel, as_training_set, neg_log_likelihood
from nlassopd.exceptions import InvalidArgumentError, ConfigurationError, NumericalError
from nlassopd import graph_core
from nlassopd import constants

logger = logging.getLogger(__name__)


def dual_resolvent(
        u_bar: EdgeSignal,
        lam: float
) -> EdgeSignal:
    """
    projects every edge block onto the Euclidean ball of radius lambda, i.e.,
        u_bar - (1 - lambda / ||u_bar||)_+ u_bar
    :param u_bar: (EdgeSignal) dual candidate
    :param lam: (float) ball radius lambda
    :return: (EdgeSignal) projected dual signal
    """

    blocks: np.ndarray = np.asarray(u_bar, dtype=float)
    if blocks.ndim == 1:
        blocks = blocks.reshape(-1, 1)
    norms: np.ndarray = np.linalg.norm(blocks, axis=1)
    scale: np.ndarray = np.ones_like(norms)
    outside: np.ndarray = norms > lam
    scale[outside] = lam / norms[outside]
    return blocks * scale[:, None]


def build_preconditioners(
        g: EmpiricalGraph,
        tau: float = constants.DEFAULT_TAU
) -> Preconditioners:
    """
    builds the diagonal preconditioners sigma_e = 1 / (2 A_e) and tau_i = tau / d_i
    :param g: (EmpiricalGraph) graph without isolated nodes
    :param tau: (float) global primal step factor in (0, 1)
    :return: (Preconditioners) preconditioners
    """

    if not 0 < tau < 1:
        raise ConfigurationError(constants.TAU_RANGE_ERR.format(tau=tau))
    return Preconditioners(sigma=1.0 / (2.0 * g.weights), tau=tau / g.degrees, global_tau=tau)


def step_size_norm(
        g: EmpiricalGraph,
        preconditioners: Preconditioners
) -> float:
    """
    estimates ||Sigma^1/2 D T^1/2||^2 by power iteration on the scalar operator (D = D_s kron I shares its norm)
    :param g: (EmpiricalGraph) graph
    :param preconditioners: (Preconditioners) preconditioners
    :return: (float) squared operator norm estimate
    """

    if g.edge_count == 0:
        return 0.0
    scaled = scipy.sparse.diags(np.sqrt(preconditioners.sigma)) @ graph_core.incidence_matrix(g) @ \
        scipy.sparse.diags(np.sqrt(preconditioners.tau))
    scaled = scaled.tocsr()
    gram = (scaled.T @ scaled).tocsr()

    x: np.ndarray = np.random.default_rng(0).standard_normal(g.node_count)
    x /= np.linalg.norm(x)
    estimate: float = 0.0
    for _ in range(constants.POWER_ITERATIONS):
        y: np.ndarray = gram @ x
        new_estimate: float = float(x @ y)
        y_norm: float = float(np.linalg.norm(y))
        if y_norm < constants.NORM_ZERO_EPS:
            return 0.0
        x = y / y_norm
        if abs(new_estimate - estimate) <= constants.POWER_ITERATION_TOL * max(new_estimate, 1.0):
            estimate = new_estimate
            break
        estimate = new_estimate
    return estimate


def inexactness_target(
        k: int,
        floor: float = constants.DEFAULT_INEXACTNESS_FLOOR
) -> float:
    """
    returns the primal-update accuracy e_k = min(epsilon_0, 1/k^2) required at iteration k (1-based)
    :param k: (int) iteration
    :param floor: (float) cap epsilon_0
    :return: (float) target error
    """

    return min(floor, 1.0 / k ** 2)


def fixed_point_iteration_count(
        contraction: float,
        first_step: float,
        target_error: float
) -> int:
    """
    returns the smallest r >= 1 with R^r / (1 - R) ||w^1 - w^0|| <= e, i.e.,
        r >= log(e (1 - R) / ||w^1 - w^0||) / log R
    :param contraction: (float) contraction factor R in [0, 1)
    :param first_step: (float) ||w^1 - w^0||
    :param target_error: (float) target error e
    :return: (int) number of fixed-point steps
    """

    if not contraction < 1:
        raise ConfigurationError(constants.CONTRACTION_ERR.format(r=contraction))
    if contraction == 0 or first_step == 0:
        return 1
    ratio: float = target_error * (1.0 - contraction) / first_step
    if ratio >= 1:
        return 1
    return max(1, math.ceil(math.log(ratio) / math.log(contraction)))


def primal_update_gaussian(
        model: GaussianLinearModel,
        i: int,
        w_bar: np.ndarray,
        tau_i: float,
        training_size: int
) -> np.ndarray:
    """
    returns the exact minimizer of -w^T t + Phi(w) + tau_tilde ||w - w_bar||^2 with tau_tilde = M / (2 tau_i),
        i.e., the solution of (x x^T / sigma^2 + 2 tau_tilde I) w = t + 2 tau_tilde w_bar (Sherman-Morrison)
    :param model: (GaussianLinearModel) node model
    :param i: (int) labeled node
    :param w_bar: (np.ndarray) d-vector w_bar^(i)
    :param tau_i: (float) primal step size of node i
    :param training_size: (int) training set size M
    :return: (np.ndarray) d-vector
    """

    if not tau_i > 0:
        raise InvalidArgumentError(constants.NON_POSITIVE_TAU_ERR.format(tau=tau_i))
    nodes: np.ndarray = np.array([i])
    blocks: np.ndarray = np.asarray(w_bar, dtype=float).reshape(1, -1)
    return __gaussian_batch(model, nodes, blocks, np.array([tau_i], dtype=float), training_size)[0]


def primal_update_fixed_point(
        model: ExpFamilyModel,
        i: int,
        w_bar: np.ndarray,
        tau_i: float,
        training_size: int,
        target_error: float
) -> np.ndarray:
    """
    approximates the node-wise primal update by iterating the contraction w <- w_bar + (tau_i / M)(t - grad Phi(w))
        from w^0 = w_bar until the geometric error bound drops below the target error
    :param model: (ExpFamilyModel) node model
    :param i: (int) labeled node
    :param w_bar: (np.ndarray) d-vector w_bar^(i)
    :param tau_i: (float) primal step size of node i
    :param training_size: (int) training set size M
    :param target_error: (float) required distance to the exact update
    :return: (np.ndarray) d-vector
    """

    if not tau_i > 0:
        raise InvalidArgumentError(constants.NON_POSITIVE_TAU_ERR.format(tau=tau_i))
    step: float = tau_i / training_size
    contraction: float = step * model.fim_upper_bound(i)
    if not contraction < 1:
        raise ConfigurationError(constants.CONTRACTION_ERR.format(r=contraction))

    anchor: np.ndarray = np.asarray(w_bar, dtype=float).ravel()
    t: np.ndarray = model.sufficient_statistics[i]
    w: np.ndarray = anchor + step * (t - model.grad_log_partition(i, anchor))
    steps: int = fixed_point_iteration_count(contraction, float(np.linalg.norm(w - anchor)), target_error)
    for _ in range(steps - 1):
        w = anchor + step * (t - model.grad_log_partition(i, w))
    return w


def primal_update_newton(
        model: ExpFamilyModel,
        i: int,
        w_bar: np.ndarray,
        tau_i: float,
        training_size: int
) -> np.ndarray:
    """
    takes a single Newton step on g(w) = -w^T t + Phi(w) + tau_tilde ||w - w_bar||^2 from w_bar
    :param model: (ExpFamilyModel) node model
    :param i: (int) labeled node
    :param w_bar: (np.ndarray) d-vector w_bar^(i)
    :param tau_i: (float) primal step size of node i
    :param training_size: (int) training set size M
    :return: (np.ndarray) d-vector
    """

    if not tau_i > 0:
        raise InvalidArgumentError(constants.NON_POSITIVE_TAU_ERR.format(tau=tau_i))
    tau_tilde: float = training_size / (2.0 * tau_i)
    anchor: np.ndarray = np.asarray(w_bar, dtype=float).ravel()
    gradient: np.ndarray = model.grad_log_partition(i, anchor) - model.sufficient_statistics[i]
    hessian: np.ndarray = model.hessian_log_partition(i, anchor) + 2.0 * tau_tilde * np.eye(len(anchor))
    return anchor - scipy.linalg.solve(hessian, gradient, assume_a='pos')


def objective(
        g: EmpiricalGraph,
        model: ExpFamilyModel,
        training_set: Iterable[int],
        w: NodeSignal,
        lam: float
) -> float:
    """
    returns the nLasso objective E(w) + lambda ||w||_TV
    :param g: (EmpiricalGraph) graph
    :param model: (ExpFamilyModel) node model
    :param training_set: (Iterable[int]) labeled node ids
    :param w: (NodeSignal) weights
    :param lam: (float) regularization strength lambda >= 0
    :return: (float) objective value
    """

    return neg_log_likelihood(model, w, training_set) + lam * graph_core.tv_norm(g, w)


def solve(
        g: EmpiricalGraph,
        model: ExpFamilyModel,
        training_set: Iterable[int],
        cfg: SolverConfig
) -> SolveResult:
    """
    runs the preconditioned primal-dual nLasso method from w_0 = 0, u_0 = 0:
        w_bar = w_k - T D^T u_k,
        w_k+1 = node-wise primal update of w_bar on labeled nodes, w_bar elsewhere,
        u_k+1 = projection of u_k + Sigma D (2 w_k+1 - w_k) onto the lambda-balls
    :param g: (EmpiricalGraph) connected graph
    :param model: (ExpFamilyModel) node model
    :param training_set: (Iterable[int]) labeled node ids
    :param cfg: (SolverConfig) solver configuration
    :return: (SolveResult) final weights, duals and history
    """

    graph_core.check_connected(g)
    if model.node_count != g.node_count:
        raise InvalidArgumentError(constants.DIMENSION_MISMATCH_ERR.format(expected=g.node_count, actual=model.node_count))
    labeled: np.ndarray = as_training_set(model, training_set)
    training_size: int = len(labeled)
    dim: int = model.dim

    preconditioners: Preconditioners = build_preconditioners(g, cfg.tau)
    norm_estimate = None
    if cfg.check_step_size:
        norm_estimate = step_size_norm(g, preconditioners)
        if not norm_estimate + constants.STEP_SIZE_MARGIN < 1:
            raise ConfigurationError(constants.STEP_SIZE_ERR.format(norm=norm_estimate))

    closed_form: bool = isinstance(model, GaussianLinearModel)
    mode: str = constants.CLOSED_FORM if closed_form else cfg.primal_update
    if mode == constants.CLOSED_FORM and not closed_form:
        raise ConfigurationError(constants.NO_CLOSED_FORM_ERR.format(model=model.kind))
    if mode == constants.FIXED_POINT:
        contractions: np.ndarray = preconditioners.tau[labeled] / training_size * \
            np.array([model.fim_upper_bound(i) for i in labeled])
        if not contractions.max() < 1:
            raise ConfigurationError(constants.CONTRACTION_ERR.format(r=contractions.max()))

    logger.info(f'nLasso solve: N={g.node_count}, E={g.edge_count}, d={dim}, M={training_size}, '
                f'lambda={cfg.lam}, tau={cfg.tau}, primal update={mode}, max iterations={cfg.max_iterations}')

    state = SolverState(iteration=0, weights=np.zeros((g.node_count, dim)), duals=np.zeros((g.edge_count, dim)),
                        lam=cfg.lam)
    history = state.history
    history.stop_reason = 'max_iterations'

    for k in range(1, cfg.max_iterations + 1):
        w_bar: np.ndarray = state.weights - preconditioners.tau[:, None] * \
            graph_core.apply_incidence_adjoint(g, state.duals)

        w_next: np.ndarray = w_bar.copy()
        if mode == constants.CLOSED_FORM:
            w_next[labeled] = __gaussian_batch(model, labeled, w_bar[labeled], preconditioners.tau[labeled],
                                               training_size)
        elif mode == constants.FIXED_POINT:
            target: float = inexactness_target(k, cfg.inexactness_floor)
            for i in labeled:
                w_next[i] = primal_update_fixed_point(model, i, w_bar[i], preconditioners.tau[i], training_size, target)
        else:
            for i in labeled:
                w_next[i] = primal_update_newton(model, i, w_bar[i], preconditioners.tau[i], training_size)

        u_bar: np.ndarray = state.duals + preconditioners.sigma[:, None] * \
            graph_core.apply_incidence(g, 2.0 * w_next - state.weights)
        u_next: np.ndarray = dual_resolvent(u_bar, cfg.lam)

        if not (np.all(np.isfinite(w_next)) and np.all(np.isfinite(u_next))):
            raise NumericalError(constants.NON_FINITE_ERR.format(iteration=k), k)

        change_norm: float = float(np.linalg.norm(w_next - state.weights))
        change: float = change_norm / max(float(np.linalg.norm(w_next)), constants.NORM_ZERO_EPS) \
            if change_norm > 0 else 0.0
        state.weights, state.duals, state.iteration = w_next, u_next, k

        max_dual_norm: float = float(np.linalg.norm(u_next, axis=1).max()) if g.edge_count > 0 else 0.0
        value: float = objective(g, model, labeled, w_next, cfg.lam)
        history.record(k, value, change, max_dual_norm)
        if k % constants.LOG_EVERY == 0:
            logger.debug(f'iteration {k}: objective={value:.10g}, relative change={change:.3e}')

        if cfg.tolerance is not None and change < cfg.tolerance:
            history.stop_reason = 'tolerance'
            break

    logger.info(f'nLasso stopped after {state.iteration} iterations ({history.stop_reason}), '
                f'objective={history.objectives[-1]:.10g}')
    return SolveResult(weights=state.weights, duals=state.duals, history=history, step_size_norm=norm_estimate)


def stationarity_residuals(
        g: EmpiricalGraph,
        model: ExpFamilyModel,
        training_set: Iterable[int],
        w: NodeSignal,
        u: EdgeSignal,
        lam: float
) -> StationarityReport:
    """
    measures how far (w, u) is from a saddle point: -D^T u must equal the local loss gradient on labeled nodes
        and vanish on unlabeled nodes, and every dual block must lie in the lambda-ball
    :param g: (EmpiricalGraph) graph
    :param model: (ExpFamilyModel) node model
    :param training_set: (Iterable[int]) labeled node ids
    :param w: (NodeSignal) primal weights
    :param u: (EdgeSignal) dual signal
    :param lam: (float) regularization strength
    :return: (StationarityReport) residuals
    """

    labeled: np.ndarray = as_training_set(model, training_set)
    weights: np.ndarray = graph_core.as_node_signal(g, w)
    coupling: np.ndarray = graph_core.apply_incidence_adjoint(g, u)

    gradients: np.ndarray = np.array([model.grad_log_partition(i, weights[i]) for i in labeled])
    gradients = (gradients - model.sufficient_statistics[labeled]) / len(labeled)
    labeled_residual: float = float(np.linalg.norm(gradients + coupling[labeled], axis=1).max())

    unlabeled_mask: np.ndarray = np.ones(g.node_count, dtype=bool)
    unlabeled_mask[labeled] = False
    unlabeled_residual: float = float(np.linalg.norm(coupling[unlabeled_mask], axis=1).max()) \
        if np.any(unlabeled_mask) else 0.0

    dual_norms: np.ndarray = np.linalg.norm(graph_core.as_edge_signal(g, u), axis=1)
    dual_excess: float = float(max(0.0, (dual_norms - lam).max())) if g.edge_count > 0 else 0.0
    return StationarityReport(labeled=labeled_residual, unlabeled=unlabeled_residual, dual_excess=dual_excess)


def __gaussian_batch(
        model: GaussianLinearModel,
        nodes: np.ndarray,
        w_bar: np.ndarray,
        tau: np.ndarray,
        training_size: int
) -> np.ndarray:
    """
    solves (a a^T + c I) w = t + c w_bar for several nodes at once, with a = x / sigma and c = 2 tau_tilde = M / tau_i:
        w = b / c - a (a^T b) / (c (c + a^T a))
    :param model: (GaussianLinearModel) node model
    :param nodes: (np.ndarray) labeled node ids
    :param w_bar: (np.ndarray) (len(nodes), d) blocks w_bar^(i)
    :param tau: (np.ndarray) primal step size per node
    :param training_size: (int) training set size M
    :return: (np.ndarray) (len(nodes), d) updated blocks
    """

    c: np.ndarray = training_size / tau
    a: np.ndarray = model.features[nodes] / np.sqrt(model.noise_variances[nodes])[:, None]
    b: np.ndarray = model.sufficient_statistics[nodes] + c[:, None] * w_bar
    a_dot_b: np.ndarray = np.einsum('nd,nd->n', a, b)
    a_dot_a: np.ndarray = np.einsum('nd,nd->n', a, a)
    return b / c[:, None] - a * (a_dot_b / (c * (c + a_dot_a)))[:, None]
