import math
import numpy as np
import pytest
from nlassopd.exp_family import GaussianLinearModel, ScalarSignalModel, LogisticModel, as_training_set, \
    neg_log_likelihood, grad_log_partition, hessian_log_partition, fim_norm_bound, fim_lower_bound, \
    local_loss_gradient, predict_scores
from nlassopd.exceptions import InvalidArgumentError
from nlassopd import constants


def __random_models(
        seed: int
):
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((5, 3))
    gaussian = GaussianLinearModel(features, rng.standard_normal(5), rng.uniform(0.5, 2.0, 5))
    logistic = LogisticModel(features, rng.choice([-1.0, 1.0], 5))
    return [gaussian, logistic], rng


def test_gaussian_sufficient_statistics(
):
    """t = (y / sigma^2) x, U = ||x||^2 / sigma^2 and unobserved nodes carry t = 0"""

    model = GaussianLinearModel(np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([3.0, np.nan]), np.array([2.0, 1.0]))

    assert model.kind == constants.GAUSSIAN
    assert model.dim == 2
    assert model.sufficient_statistics.tolist() == [[1.5, 3.0], [0.0, 0.0]]
    assert model.has_label(0) and not model.has_label(1)
    assert fim_norm_bound(model, 0) == pytest.approx(2.5)
    assert fim_lower_bound(model, 0) == 0.0
    assert not model.labels.flags.writeable


def test_scalar_model(
):
    """the signal-in-noise model has unit features and identical Fisher bounds"""

    model = ScalarSignalModel(np.array([1.0, -1.0, np.nan]), variance=0.5)

    assert model.kind == constants.SCALAR
    assert model.features.tolist() == [[1.0], [1.0], [1.0]]
    assert fim_norm_bound(model, 1) == pytest.approx(2.0)
    assert fim_lower_bound(model, 1) == pytest.approx(2.0)


def test_model_validation(
):
    """labels and features must match, variances must be positive, logistic labels must be +-1"""

    with pytest.raises(InvalidArgumentError):
        GaussianLinearModel(np.ones((3, 2)), np.ones(2))
    with pytest.raises(InvalidArgumentError):
        GaussianLinearModel(np.ones((2, 2)), np.ones(2), np.array([1.0, 0.0]))
    with pytest.raises(InvalidArgumentError):
        LogisticModel(np.ones((2, 1)), np.array([1.0, 0.0]))
    LogisticModel(np.ones((2, 1)), np.array([1.0, np.nan]))


def test_logistic_log_partition(
):
    """Phi(0) = log 2 and Phi stays finite (about |s| / 2) for huge scores"""

    model = LogisticModel(np.array([[1.0, 1.0]]), np.array([1.0]))

    assert model.log_partition(0, np.zeros(2)) == pytest.approx(math.log(2.0))
    assert model.log_partition(0, np.array([1000.0, 1000.0])) == pytest.approx(1000.0)
    assert model.log_partition_batch(np.array([0]), np.array([[-1000.0, -1000.0]]))[0] == pytest.approx(1000.0)
    assert model.sufficient_statistics.tolist() == [[0.5, 0.5]]


@pytest.mark.parametrize('seed', range(3))
def test_gradient_and_hessian_match_finite_differences(
        seed
):
    """closed-form gradients and Fisher information agree with central differences"""

    models, rng = __random_models(seed)
    step = 1e-5
    for model in models:
        for i in range(model.node_count):
            w = rng.standard_normal(3)
            gradient = grad_log_partition(model, i, w)
            hessian = hessian_log_partition(model, i, w)
            for k in range(3):
                e = np.zeros(3)
                e[k] = step
                numeric = (model.log_partition(i, w + e) - model.log_partition(i, w - e)) / (2 * step)
                assert gradient[k] == pytest.approx(numeric, rel=1e-6, abs=1e-8)
                numeric_row = (model.grad_log_partition(i, w + e) - model.grad_log_partition(i, w - e)) / (2 * step)
                assert hessian[k] == pytest.approx(numeric_row, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize('seed', range(3))
def test_fisher_information_bounds(
        seed
):
    """the spectrum of the Fisher information lies in [L, U] for every weight"""

    models, rng = __random_models(seed)
    for model in models:
        for i in range(model.node_count):
            eigenvalues = np.linalg.eigvalsh(hessian_log_partition(model, i, 3 * rng.standard_normal(3)))
            assert eigenvalues.max() <= fim_norm_bound(model, i) * (1 + 1e-12)
            assert eigenvalues.min() >= fim_lower_bound(model, i) - 1e-12


def test_training_set_validation(
):
    """training sets are sorted and deduplicated; empty, out-of-range and unlabeled nodes are rejected"""

    model = ScalarSignalModel(np.array([1.0, np.nan, 2.0]))

    assert as_training_set(model, [2, 0, 2]).tolist() == [0, 2]
    with pytest.raises(InvalidArgumentError):
        as_training_set(model, [])
    with pytest.raises(InvalidArgumentError):
        as_training_set(model, [3])
    with pytest.raises(InvalidArgumentError, match='node 2'):
        as_training_set(model, [1])


def test_empirical_risk(
):
    """for unit-variance scalar labels the risk is the mean of (y - w)^2 / 2 - y^2 / 2"""

    model = ScalarSignalModel(np.array([1.0, np.nan, -2.0]))
    w = np.array([3.0, 5.0, 0.0])

    expected = ((2.0 - 0.5) + (2.0 - 2.0)) / 2
    assert neg_log_likelihood(model, w, [0, 2]) == pytest.approx(expected)
    assert local_loss_gradient(model, 0, np.array([3.0]), 2).tolist() == pytest.approx([1.0])
    with pytest.raises(InvalidArgumentError):
        neg_log_likelihood(model, np.zeros(4), [0])


def test_predict_scores(
):
    """scores are the inner products of weights and features"""

    model = LogisticModel(np.array([[1.0, 2.0], [3.0, -1.0]]), np.array([1.0, -1.0]))
    scores = predict_scores(model, np.array([[1.0, 1.0], [0.5, 2.0]]))

    assert scores.tolist() == pytest.approx([3.0, -0.5])
