from typing import Iterable
from abc import ABC, abstractmethod
import numpy as np
from nlassopd.data_types import NodeSignal
from nlassopd.exceptions import InvalidArgumentError
from nlassopd import constants


class ExpFamilyModel(ABC):
    """this class represents a networked exponential family, i.e., one exponential-family model per node
        p(z; w) = b(z) exp(t(z)^T w - Phi(w)), observed through precomputed sufficient statistics t^(i)

    Attributes:  # noqa
        kind: (str) model kind
        labels: (np.ndarray) observed label per node, NaN where unobserved
        sufficient_statistics: (np.ndarray) t^(i) per node, shape (N, d), zero where unobserved
    """
    kind: str = ''

    def __init__(self, labels: np.ndarray, sufficient_statistics: np.ndarray):
        self.labels: np.ndarray = labels
        self.sufficient_statistics: np.ndarray = sufficient_statistics
        self.labels.flags.writeable = False
        self.sufficient_statistics.flags.writeable = False

    @property
    def node_count(self) -> int:
        return self.sufficient_statistics.shape[0]

    @property
    def dim(self) -> int:
        return self.sufficient_statistics.shape[1]

    def has_label(self, i: int) -> bool:
        return bool(np.isfinite(self.labels[i]))

    @abstractmethod
    def log_partition(self, i: int, w: np.ndarray) -> float:
        """
        evaluates the log-partition function Phi^(i)
        :param i: (int) node
        :param w: (np.ndarray) d-vector
        :return: (float) Phi^(i)(w)
        """

    @abstractmethod
    def log_partition_batch(self, nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
        """
        evaluates Phi^(i)(w^(i)) for several nodes at once
        :param nodes: (np.ndarray) node ids
        :param w: (np.ndarray) (len(nodes), d) weight blocks
        :return: (np.ndarray) log-partition values
        """

    @abstractmethod
    def grad_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        """
        evaluates the gradient of Phi^(i), i.e., the expected sufficient statistic
        :param i: (int) node
        :param w: (np.ndarray) d-vector
        :return: (np.ndarray) d-vector
        """

    @abstractmethod
    def hessian_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        """
        evaluates the Fisher information matrix F = Hessian of Phi^(i)
        :param i: (int) node
        :param w: (np.ndarray) d-vector
        :return: (np.ndarray) d x d matrix
        """

    @abstractmethod
    def fim_upper_bound(self, i: int) -> float:
        """upper bound U on the spectral norm of the Fisher information at node i over all weights"""

    @abstractmethod
    def fim_lower_bound(self, i: int) -> float:
        """lower bound L on the smallest eigenvalue of the Fisher information at node i over all weights"""

    @abstractmethod
    def predict_scores(self, w: NodeSignal) -> np.ndarray:
        """
        returns the linear predictor (w^(i))^T x^(i) of every node
        :param w: (NodeSignal) weights
        :return: (np.ndarray) score per node
        """


class GaussianLinearModel(ExpFamilyModel):
    """this class represents networked linear regression y = w^T x + noise with noise variance sigma_i^2:
        t = (y / sigma^2) x, Phi(w) = (w^T x)^2 / (2 sigma^2)

    Attributes:  # noqa
        features: (np.ndarray) feature vector x^(i) per node, shape (N, d)
        noise_variances: (np.ndarray) sigma_i^2 per node
    """
    kind: str = constants.GAUSSIAN

    def __init__(self, features: np.ndarray, labels: np.ndarray, noise_variances: np.ndarray = None):
        features = np.array(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        labels = np.array(labels, dtype=float).ravel()
        if labels.shape[0] != features.shape[0]:
            raise InvalidArgumentError(
                constants.DIMENSION_MISMATCH_ERR.format(expected=features.shape[0], actual=labels.shape[0])
            )

        if noise_variances is None:
            noise_variances = np.ones(features.shape[0])
        noise_variances = np.array(np.broadcast_to(noise_variances, labels.shape), dtype=float)
        if np.any(~(noise_variances > 0)):
            raise InvalidArgumentError(constants.NOISE_VARIANCE_ERR)

        self.features: np.ndarray = features
        self.noise_variances: np.ndarray = noise_variances
        observed: np.ndarray = np.where(np.isfinite(labels), labels, 0.0)
        super().__init__(labels, (observed / noise_variances)[:, None] * features)
        self.features.flags.writeable = False
        self.noise_variances.flags.writeable = False

    def log_partition(self, i: int, w: np.ndarray) -> float:
        score: float = float(np.dot(w, self.features[i]))
        return score ** 2 / (2.0 * self.noise_variances[i])

    def log_partition_batch(self, nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
        scores: np.ndarray = np.einsum('nd,nd->n', w, self.features[nodes])
        return scores ** 2 / (2.0 * self.noise_variances[nodes])

    def grad_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        return (np.dot(w, self.features[i]) / self.noise_variances[i]) * self.features[i]

    def hessian_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        return np.outer(self.features[i], self.features[i]) / self.noise_variances[i]

    def fim_upper_bound(self, i: int) -> float:
        return float(np.dot(self.features[i], self.features[i]) / self.noise_variances[i])

    def fim_lower_bound(self, i: int) -> float:
        # x x^T has rank one, so it is singular unless d = 1
        return self.fim_upper_bound(i) if self.dim == 1 else 0.0

    def predict_scores(self, w: NodeSignal) -> np.ndarray:
        return np.einsum('nd,nd->n', np.asarray(w, dtype=float).reshape(self.node_count, -1), self.features)


class ScalarSignalModel(GaussianLinearModel):
    """this class represents the networked signal-in-noise model y = w + noise (d = 1, x^(i) = 1)"""
    kind: str = constants.SCALAR

    def __init__(self, labels: np.ndarray, variance: float = 1.0):
        labels = np.array(labels, dtype=float).ravel()
        super().__init__(np.ones((labels.shape[0], 1)), labels, np.full(labels.shape[0], variance, dtype=float))


class LogisticModel(ExpFamilyModel):
    """this class represents networked logistic regression with labels y in {-1, +1}:
        t = x y / 2, Phi(w) = log(exp(w^T x / 2) + exp(-w^T x / 2))

    Attributes:  # noqa
        features: (np.ndarray) feature vector x^(i) per node, shape (N, d)
    """
    kind: str = constants.LOGISTIC

    def __init__(self, features: np.ndarray, labels: np.ndarray):
        features = np.array(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        labels = np.array(labels, dtype=float).ravel()
        if labels.shape[0] != features.shape[0]:
            raise InvalidArgumentError(
                constants.DIMENSION_MISMATCH_ERR.format(expected=features.shape[0], actual=labels.shape[0])
            )
        observed: np.ndarray = np.isfinite(labels)
        invalid: np.ndarray = observed & (np.abs(labels) != 1.0)
        if np.any(invalid):
            raise InvalidArgumentError(constants.LOGISTIC_LABEL_ERR.format(label=labels[invalid][0]))

        self.features: np.ndarray = features
        super().__init__(labels, (np.where(observed, labels, 0.0) / 2.0)[:, None] * features)
        self.features.flags.writeable = False

    def log_partition(self, i: int, w: np.ndarray) -> float:
        half_score: float = float(np.dot(w, self.features[i])) / 2.0
        return float(np.logaddexp(half_score, -half_score))

    def log_partition_batch(self, nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
        half_scores: np.ndarray = np.einsum('nd,nd->n', w, self.features[nodes]) / 2.0
        return np.logaddexp(half_scores, -half_scores)

    def grad_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        return (self.features[i] / 2.0) * np.tanh(np.dot(w, self.features[i]) / 2.0)

    def hessian_log_partition(self, i: int, w: np.ndarray) -> np.ndarray:
        sech_squared: float = 1.0 - np.tanh(np.dot(w, self.features[i]) / 2.0) ** 2
        return np.outer(self.features[i], self.features[i]) * sech_squared / 4.0

    def fim_upper_bound(self, i: int) -> float:
        return float(np.dot(self.features[i], self.features[i]) / 4.0)

    def fim_lower_bound(self, i: int) -> float:
        return 0.0

    def predict_scores(self, w: NodeSignal) -> np.ndarray:
        return np.einsum('nd,nd->n', np.asarray(w, dtype=float).reshape(self.node_count, -1), self.features)


def as_training_set(
        model: ExpFamilyModel,
        training_set: Iterable[int]
) -> np.ndarray:
    """
    validates a training set against a model
    :param model: (ExpFamilyModel) node model
    :param training_set: (Iterable[int]) labeled node ids
    :return: (np.ndarray) sorted unique node ids
    """

    nodes: np.ndarray = np.unique(np.asarray(list(training_set), dtype=np.int64))
    if len(nodes) == 0:
        raise InvalidArgumentError(constants.EMPTY_TRAINING_SET_ERR)
    for node in nodes:
        if node < 0 or node >= model.node_count:
            raise InvalidArgumentError(constants.TRAINING_NODE_ERR.format(node=node + 1, node_count=model.node_count))
        if not model.has_label(node):
            raise InvalidArgumentError(constants.UNLABELED_TRAINING_NODE_ERR.format(node=node + 1))
    return nodes


def neg_log_likelihood(
        model: ExpFamilyModel,
        w: NodeSignal,
        training_set: Iterable[int]
) -> float:
    """
    returns the empirical risk (1/M) sum over i in M of -(t^(i))^T w^(i) + Phi^(i)(w^(i))
    :param model: (ExpFamilyModel) node model
    :param w: (NodeSignal) weights
    :param training_set: (Iterable[int]) labeled node ids
    :return: (float) average negative log-likelihood
    """

    nodes: np.ndarray = as_training_set(model, training_set)
    weights: np.ndarray = __as_weights(model, w)
    blocks: np.ndarray = weights[nodes]
    linear: np.ndarray = np.einsum('nd,nd->n', blocks, model.sufficient_statistics[nodes])
    return float(np.mean(model.log_partition_batch(nodes, blocks) - linear))


def grad_log_partition(
        model: ExpFamilyModel,
        i: int,
        w: np.ndarray
) -> np.ndarray:
    """
    returns the closed-form gradient of Phi^(i) at w
    :param model: (ExpFamilyModel) node model
    :param i: (int) node
    :param w: (np.ndarray) d-vector
    :return: (np.ndarray) d-vector
    """

    return model.grad_log_partition(i, np.asarray(w, dtype=float))


def hessian_log_partition(
        model: ExpFamilyModel,
        i: int,
        w: np.ndarray
) -> np.ndarray:
    """
    returns the closed-form Fisher information matrix of node i at w
    :param model: (ExpFamilyModel) node model
    :param i: (int) node
    :param w: (np.ndarray) d-vector
    :return: (np.ndarray) d x d matrix
    """

    return model.hessian_log_partition(i, np.asarray(w, dtype=float))


def fim_norm_bound(
        model: ExpFamilyModel,
        i: int
) -> float:
    """
    returns an upper bound on the spectral norm of the Fisher information of node i over all weights
    :param model: (ExpFamilyModel) node model
    :param i: (int) node
    :return: (float) bound U_i
    """

    return model.fim_upper_bound(i)


def fim_lower_bound(
        model: ExpFamilyModel,
        i: int
) -> float:
    return model.fim_lower_bound(i)


def local_loss_gradient(
        model: ExpFamilyModel,
        i: int,
        w: np.ndarray,
        training_size: int
) -> np.ndarray:
    """
    returns the gradient of node i's term (1/M)(-(t^(i))^T w + Phi^(i)(w)) of the empirical risk
    :param model: (ExpFamilyModel) node model
    :param i: (int) labeled node
    :param w: (np.ndarray) d-vector
    :param training_size: (int) training set size M
    :return: (np.ndarray) d-vector
    """

    return (model.grad_log_partition(i, np.asarray(w, dtype=float)) - model.sufficient_statistics[i]) / training_size


def predict_scores(
        model: ExpFamilyModel,
        w: NodeSignal
) -> np.ndarray:
    return model.predict_scores(w)


def __as_weights(
        model: ExpFamilyModel,
        w: NodeSignal
) -> np.ndarray:
    weights: np.ndarray = np.asarray(w, dtype=float)
    if weights.ndim == 1:
        weights = weights.reshape(-1, 1)
    if weights.shape != (model.node_count, model.dim):
        raise InvalidArgumentError(
            constants.DIMENSION_MISMATCH_ERR.format(expected=(model.node_count, model.dim), actual=np.shape(w))
        )
    return weights
