from typing import Dict, Any, Iterable, Optional, Tuple
import logging
import math
import numpy as np
import scipy.linalg
import scipy.sparse
from nlassopd.data_types import EmpiricalGraph, Partition, NodeSignal, ClusteredSignalSpec, Theorem1Params, \
    Theorem1Result, PseudoInverseBound
from nlassopd.exp_family import ExpFamilyModel, as_training_set
from nlassopd.exceptions import InvalidArgumentError, DomainError
from nlassopd import graph_core
from nlassopd import constants

logger = logging.getLogger(__name__)


def nmse(
        w_hat: NodeSignal,
        w_bar: NodeSignal
) -> float:
    """
    returns the normalized mean squared error ||w_bar - w_hat||^2 / ||w_bar||^2
    :param w_hat: (NodeSignal) estimate
    :param w_bar: (NodeSignal) true weights
    :return: (float) NMSE
    """

    estimate: np.ndarray = np.asarray(w_hat, dtype=float)
    truth: np.ndarray = np.asarray(w_bar, dtype=float)
    if estimate.size != truth.size:
        raise InvalidArgumentError(constants.DIMENSION_MISMATCH_ERR.format(expected=truth.shape, actual=estimate.shape))
    estimate = estimate.reshape(truth.shape)

    truth_energy: float = float(np.sum(truth ** 2))
    if truth_energy == 0:
        raise DomainError(constants.ZERO_TRUTH_ERR)
    return float(np.sum((truth - estimate) ** 2)) / truth_energy


def theorem1_bound(
        p: Theorem1Params
) -> Theorem1Result:
    """
    evaluates the upper bound on P{||w_hat - w_bar||_TV >= eta} for nLasso run with lambda = eta / (5 kappa^2):
        2 |P| max_l exp(-|C_l| eta^2 / (8 * 25 d U kappa^2))
        + 2 |E| exp(-M rho_P^2 eta^2 / (64 * 25 U d kappa^4 ||A||_inf^2))
    :param p: (Theorem1Params) validated constants
    :return: (Theorem1Result) bound, its two terms, kappa and the prescribed lambda
    """

    kappa: float = p.kappa
    eta_squared: float = p.eta ** 2
    cluster_term: float = 2 * p.partition_count * \
        math.exp(-min(p.cluster_sizes) * eta_squared / (8 * 25 * p.d * p.U * kappa ** 2))
    edge_term: float = 2 * p.edge_count * \
        math.exp(-p.M * p.rho_partition ** 2 * eta_squared / (64 * 25 * p.U * p.d * kappa ** 4 * p.max_weight ** 2))
    bound: float = cluster_term + edge_term
    vacuous: bool = bound >= 1

    if vacuous:
        logger.warning(f'TV error bound {bound:.6g} is vacuous (>= 1) for eta={p.eta}')
    else:
        logger.info(f'TV error bound {bound:.6g} for eta={p.eta}')
    return Theorem1Result(bound=bound, cluster_term=cluster_term, edge_term=edge_term, kappa=kappa,
                          kappa_proof=(p.K + 1) / (p.asspt3_L - 1), lambda_prescribed=p.eta / (5 * kappa ** 2),
                          vacuous=vacuous)


def expand_clustered(
        spec: ClusteredSignalSpec
) -> NodeSignal:
    """
    expands a clustered signal into the node signal w^(i) = sum over clusters C of v^(C) I_C[i]
    :param spec: (ClusteredSignalSpec) partition and cluster values
    :return: (NodeSignal) piece-wise constant node signal
    """

    return spec.cluster_values[spec.partition.assignment].copy()


def compatibility_ratio(
        g: EmpiricalGraph,
        p: Partition,
        training_set: Iterable[int],
        samples: int,
        seed: int,
        asspt3_L: float,
        dim: int = 1
) -> Tuple[float, Optional[NodeSignal]]:
    """
    estimates the smallest K with L ||z||_boundary <= K ||z||_M + ||z||_interior over random piece-wise constant
        signals z, where ||z||_M = sqrt((1/M) sum over i in M of ||z^(i)||^2); the result is a lower estimate of the
        worst case, not a certificate
    :param g: (EmpiricalGraph) graph
    :param p: (Partition) partition
    :param training_set: (Iterable[int]) labeled node ids
    :param samples: (int) number of random signals
    :param seed: (int) random seed
    :param asspt3_L: (float) constant L
    :param dim: (int) signal dimension d
    :return: (Tuple[float, Optional[NodeSignal]]) K estimate (>= 0) and the signal attaining it
    """

    graph_core.validate_partition(g, p)
    labeled: np.ndarray = np.unique(np.asarray(list(training_set), dtype=np.int64))
    if len(labeled) == 0:
        raise InvalidArgumentError(constants.EMPTY_TRAINING_SET_ERR)
    if labeled.min() < 0 or labeled.max() >= g.node_count:
        raise InvalidArgumentError(constants.NODE_RANGE_ERR.format(node=labeled.max() + 1, node_count=g.node_count))
    if samples < 1:
        raise InvalidArgumentError(constants.SAMPLES_ERR.format(samples=samples))

    boundary_mask: np.ndarray = np.zeros(g.edge_count, dtype=bool)
    boundary_mask[graph_core.boundary_edges(g, p)] = True
    rng = np.random.default_rng(seed)

    k_estimate: float = 0.0
    worst: Optional[NodeSignal] = None
    for _ in range(samples):
        values: np.ndarray = rng.standard_normal((p.cluster_count, dim))
        values /= max(float(np.linalg.norm(values)), constants.NORM_ZERO_EPS)
        z: NodeSignal = values[p.assignment]

        block_norms: np.ndarray = np.linalg.norm(graph_core.apply_incidence(g, z), axis=1)
        boundary_tv: float = float(block_norms[boundary_mask].sum())
        interior_tv: float = float(block_norms[~boundary_mask].sum())
        labeled_norm: float = math.sqrt(float(np.sum(z[labeled] ** 2)) / len(labeled))

        excess: float = asspt3_L * boundary_tv - interior_tv
        if excess <= 0:
            continue
        ratio: float = excess / labeled_norm if labeled_norm > 0 else float('inf')
        if ratio > k_estimate:
            k_estimate, worst = ratio, z

    return k_estimate, worst


def pseudo_inverse_column_bound(
        g: EmpiricalGraph,
        dim: int = 1
) -> PseudoInverseBound:
    """
    computes the bound sqrt(2 d max A_ij) / rho(G) on the column blocks of the incidence pseudo-inverse and, for small
        graphs, the exact largest block entry from a dense pseudo-inverse. The bound is checked against the incidence
        with sqrt(A_ij) entries, whose Gram matrix is the Laplacian L; with A_ij entries the Gram matrix is the Laplacian
        of the squared weights and the bound can fail once weights drop below 1, so that value is only reported
    :param g: (EmpiricalGraph) connected graph
    :param dim: (int) signal dimension d
    :return: (PseudoInverseBound) bound, exact values and whether the bound holds
    """

    rho: float = graph_core.spectral_gap(g)
    bound: float = math.sqrt(2 * dim * g.max_weight) / rho
    if g.node_count > constants.EXACT_PINV_MAX_NODES:
        return PseudoInverseBound(bound=bound)

    # blocks of D^+ are s I_d, so the (2, inf) block norm is the largest scalar entry
    exact: float = __largest_pinv_entry(graph_core.incidence_matrix(g, sqrt_weights=True))
    holds: bool = exact <= bound * (1 + 1e-12)
    if not holds:
        logger.warning(f'pseudo-inverse block norm {exact:.6g} exceeds the bound {bound:.6g}')
    return PseudoInverseBound(bound=bound, exact=exact, holds=holds,
                              exact_weighted=__largest_pinv_entry(graph_core.incidence_matrix(g)))


def normalized_prediction_error(
        model: ExpFamilyModel,
        w: NodeSignal,
        targets: np.ndarray,
        nodes: Iterable[int]
) -> float:
    """
    returns sum over nodes of (y^(i) - (w^(i))^T x^(i))^2 divided by sum over nodes of (y^(i))^2
    :param model: (ExpFamilyModel) node model with features
    :param w: (NodeSignal) weights
    :param targets: (np.ndarray) label of every node
    :param nodes: (Iterable[int]) evaluation nodes
    :return: (float) normalized squared prediction error
    """

    ids: np.ndarray = np.asarray(list(nodes), dtype=np.int64)
    if len(ids) == 0:
        raise InvalidArgumentError(constants.EMPTY_TRAINING_SET_ERR)
    truth: np.ndarray = np.asarray(targets, dtype=float)[ids]
    scores: np.ndarray = model.predict_scores(w)[ids]
    energy: float = float(np.sum(truth ** 2))
    if energy == 0:
        raise DomainError(constants.ZERO_TRUTH_ERR)
    return float(np.sum((truth - scores) ** 2)) / energy


def pooled_linear_fit(
        model: ExpFamilyModel,
        nodes: Iterable[int]
) -> np.ndarray:
    """
    fits one least-squares weight vector to the features and labels of a set of labeled nodes
    :param model: (ExpFamilyModel) node model with features
    :param nodes: (Iterable[int]) labeled node ids
    :return: (np.ndarray) d-vector
    """

    ids: np.ndarray = as_training_set(model, nodes)
    if len(ids) < model.dim:
        raise InvalidArgumentError(constants.TRAINING_SET_SIZE_ERR.format(needed=model.dim, actual=len(ids)))
    solution, _, _, _ = np.linalg.lstsq(model.features[ids], model.labels[ids], rcond=None)
    return solution


def diagnostic_report(
        g: EmpiricalGraph,
        p: Partition,
        model: ExpFamilyModel,
        training_set: Iterable[int],
        K: float,
        asspt3_L: float,
        eta: float,
        samples: int,
        seed: int,
        U: Optional[float] = None
) -> Dict[str, Any]:
    """
    assembles the error-analysis report of an instance and partition:
        spectral gaps, kappa, prescribed lambda, TV error bound and the sampled compatibility constant
    :param g: (EmpiricalGraph) connected graph
    :param p: (Partition) partition with connected clusters
    :param model: (ExpFamilyModel) node model
    :param training_set: (Iterable[int]) labeled node ids
    :param K: (float) compatibility constant K
    :param asspt3_L: (float) compatibility constant L
    :param eta: (float) target TV error
    :param samples: (int) compatibility samples
    :param seed: (int) random seed
    :param U: (Optional[float]) Fisher information upper bound, by default the largest node bound of the model
    :return: (Dict[str, Any]) report
    """

    labeled: np.ndarray = as_training_set(model, training_set)
    rho: float = graph_core.spectral_gap(g)
    rho_partition: float = graph_core.partition_spectral_gap(g, p)
    fim_upper: float = U if U is not None else max(model.fim_upper_bound(i) for i in range(model.node_count))
    fim_lower: float = min(model.fim_lower_bound(i) for i in range(model.node_count))

    params = Theorem1Params(K=K, asspt3_L=asspt3_L, U=fim_upper, d=model.dim, cluster_sizes=tuple(p.cluster_sizes()),
                            M=len(labeled), rho_partition=rho_partition, max_weight=g.max_weight,
                            edge_count=g.edge_count, eta=eta, asspt2_L=fim_lower)
    result: Theorem1Result = theorem1_bound(params)
    k_estimate, _ = compatibility_ratio(g, p, labeled, samples, seed, asspt3_L, model.dim)

    return {
        'spectral_gap': rho,
        'partition_gap': rho_partition,
        'kappa': result.kappa,
        'kappa_proof': result.kappa_proof,
        'lambda_prescribed': result.lambda_prescribed,
        'bound_value': result.bound,
        'vacuous': result.vacuous,
        'K_est': k_estimate,
        'K_est_exceeds_K': bool(k_estimate > K),
        'fim_upper_bound': fim_upper,
        'fim_lower_bound': fim_lower,
        'boundary_size': int(len(graph_core.boundary_edges(g, p))),
        'training_size': int(len(labeled)),
    }


def __largest_pinv_entry(
        incidence: scipy.sparse.csr_matrix
) -> float:
    return float(np.abs(scipy.linalg.pinv(incidence.toarray())).max())
