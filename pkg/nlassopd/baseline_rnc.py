from typing import Dict, Union
import logging
import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from nlassopd.data_types import EmpiricalGraph, NodeSignal, RncConfig
from nlassopd.exceptions import InvalidArgumentError, DomainError
from nlassopd import graph_core
from nlassopd import constants

logger = logging.getLogger(__name__)


def rnc_solve_scalar(
        g: EmpiricalGraph,
        labels: Dict[int, float],
        cfg: Union[RncConfig, float]
) -> NodeSignal:
    """
    solves the Laplacian-regularized least squares problem
        min_w sum over labeled i of (y^(i) - w^(i))^2 + lambda w^T L w,
        i.e., (S + lambda L) w = S y with S the labeled-node selector, by Jacobi-preconditioned conjugate gradients
    :param g: (EmpiricalGraph) graph
    :param labels: (Dict[int, float]) label of every labeled node (0-based ids)
    :param cfg: (Union[RncConfig, float]) configuration, or the regularization strength alone
    :return: (NodeSignal) (N, 1) estimate
    """

    if not isinstance(cfg, RncConfig):
        if not cfg >= 0:
            raise InvalidArgumentError(constants.RNC_LAMBDA_ERR.format(lam=cfg))
        cfg = RncConfig(lam=float(cfg))
    if len(labels) == 0:
        raise InvalidArgumentError(constants.RNC_NO_LABELS_ERR)

    selector: np.ndarray = np.zeros(g.node_count)
    observed: np.ndarray = np.zeros(g.node_count)
    for node, value in labels.items():
        if node < 0 or node >= g.node_count:
            raise InvalidArgumentError(constants.NODE_RANGE_ERR.format(node=node + 1, node_count=g.node_count))
        selector[node] = 1.0
        observed[node] = float(value)
    rhs: np.ndarray = selector * observed

    if cfg.lam == 0:
        if selector.min() == 0:
            raise DomainError(constants.RNC_SINGULAR_ERR)
        return observed.reshape(-1, 1)

    # every component needs a label, otherwise its constant mode lies in the kernel
    _, components = graph_core.connected_components(g)
    if np.any(np.bincount(components, weights=selector) == 0):
        raise DomainError(constants.RNC_SINGULAR_ERR)

    diagonal: np.ndarray = selector + cfg.lam * g.degrees
    adjacency = g.adjacency

    def matvec(x: np.ndarray) -> np.ndarray:
        return diagonal * x - cfg.lam * (adjacency @ x)

    system = scipy.sparse.linalg.LinearOperator((g.node_count, g.node_count), matvec=matvec, dtype=float)
    jacobi = scipy.sparse.linalg.LinearOperator((g.node_count, g.node_count), matvec=lambda x: x / diagonal,
                                                dtype=float)
    w, info = scipy.sparse.linalg.cg(system, rhs, rtol=cfg.cg_tol, maxiter=cfg.cg_max_iterations, M=jacobi)

    residual: float = float(np.linalg.norm(matvec(w) - rhs)) / max(float(np.linalg.norm(rhs)), constants.NORM_ZERO_EPS)
    if info != 0 or not residual <= cfg.cg_tol * constants.RNC_RESIDUAL_SLACK:
        logger.warning(f'conjugate gradients stopped with info={info}, relative residual {residual:.3e}; '
                       f'falling back to a direct sparse solve')
        matrix = (scipy.sparse.diags(diagonal) - cfg.lam * adjacency).tocsc()
        w = scipy.sparse.linalg.spsolve(matrix, rhs)
    else:
        logger.debug(f'conjugate gradients converged, relative residual {residual:.3e}')
    return np.asarray(w, dtype=float).reshape(-1, 1)


def rnc_residual(
        g: EmpiricalGraph,
        labels: Dict[int, float],
        lam: float,
        w: NodeSignal
) -> float:
    """
    returns the relative residual ||(S + lambda L) w - S y|| / ||S y|| of the normal equations
    :param g: (EmpiricalGraph) graph
    :param labels: (Dict[int, float]) label of every labeled node
    :param lam: (float) regularization strength
    :param w: (NodeSignal) estimate
    :return: (float) relative residual
    """

    selector: np.ndarray = np.zeros(g.node_count)
    observed: np.ndarray = np.zeros(g.node_count)
    for node, value in labels.items():
        selector[node] = 1.0
        observed[node] = float(value)
    x: np.ndarray = graph_core.as_node_signal(g, w)[:, 0]
    lhs: np.ndarray = selector * x + lam * graph_core.laplacian_apply(g, x)[:, 0]
    rhs: np.ndarray = selector * observed
    return float(np.linalg.norm(lhs - rhs)) / max(float(np.linalg.norm(rhs)), constants.NORM_ZERO_EPS)
