import json
import numpy as np
import pandas as pd
import pytest
from nlassopd.data_types import EmpiricalGraph, ChainSpec, SolverConfig
from nlassopd.exp_family import GaussianLinearModel, LogisticModel
from nlassopd.run import main
from nlassopd import baseline_rnc
from nlassopd import data_gen
from nlassopd import pd_solver
from nlassopd import constants

COARSE_STEP = 0.05
FINE_STEP = 1e-3
FINE_HALF_WIDTH = 50
NMSE_LEVEL = 0.05


def __write_json(
        path,
        document: dict
) -> str:
    path.write_text(json.dumps(document))
    return str(path)


def __random_instance(
        seed: int
):
    """draws a connected graph on 2 or 3 nodes, every node labeled, with a Gaussian or a logistic model"""

    rng = np.random.default_rng(seed)
    node_count = int(rng.integers(2, 4))
    pairs = [(0, 1)] if node_count == 2 else [(0, 1), (1, 2)] + ([(0, 2)] if rng.random() < 0.5 else [])
    g = EmpiricalGraph.from_edges(node_count, [(i, j, float(rng.uniform(1.0, 2.0))) for i, j in pairs])
    features = rng.uniform(0.5, 1.5, (node_count, 1))

    if seed % 2 == 0:
        model = GaussianLinearModel(features, rng.uniform(-2.0, 2.0, node_count))
        return g, model, 0.5
    labels = rng.permutation(np.array([1.0, -1.0] + [float(rng.choice([-1.0, 1.0]))] * (node_count - 2)))
    return g, LogisticModel(features, labels), 1.0


def __grid_objective(
        g: EmpiricalGraph,
        model,
        lam: float,
        points: np.ndarray
) -> np.ndarray:
    """evaluates E(w) + lambda TV(w) at every row of points, written out independently of the library"""

    x = model.features[:, 0]
    scores = points * x
    if isinstance(model, LogisticModel):
        log_partition = np.logaddexp(scores / 2, -scores / 2)
        sufficient = x * model.labels / 2
    else:
        log_partition = scores ** 2 / (2 * model.noise_variances)
        sufficient = x * model.labels / model.noise_variances
    risk = np.mean(log_partition - sufficient * points, axis=1)
    variation = sum(a * np.abs(points[:, i] - points[:, j]) for i, j, a in zip(g.heads, g.tails, g.weights))
    return risk + lam * variation


def __grid_minimum(
        g: EmpiricalGraph,
        model,
        lam: float
) -> float:
    """searches [-3, 3]^N on a 0.05 grid, then the 1e-3 grid around the best coarse point"""

    coarse_axis = np.round(np.arange(-60, 61) * COARSE_STEP, 10)
    coarse = np.stack(np.meshgrid(*[coarse_axis] * g.node_count, indexing='ij'), axis=-1).reshape(-1, g.node_count)
    center = coarse[np.argmin(__grid_objective(g, model, lam, coarse))]

    offsets = np.arange(-FINE_HALF_WIDTH, FINE_HALF_WIDTH + 1) * FINE_STEP
    fine_axes = [np.clip(c + offsets, -3.0, 3.0) for c in center]
    fine = np.stack(np.meshgrid(*fine_axes, indexing='ij'), axis=-1).reshape(-1, g.node_count)
    return float(__grid_objective(g, model, lam, fine).min())


def test_oracle_equivalence(
):
    """on 20 random instances with N <= 3 and d = 1 the solver is never worse than the grid search by 1e-4"""

    for seed in range(20):
        g, model, lam = __random_instance(seed)
        training_set = np.arange(g.node_count)
        result = pd_solver.solve(g, model, training_set, SolverConfig(lam=lam, max_iterations=3000))
        solver_value = pd_solver.objective(g, model, training_set, result.weights, lam)

        assert solver_value <= __grid_minimum(g, model, lam) + 1e-4


def __chain_subgradients(
        w: np.ndarray,
        model,
        training_set: np.ndarray,
        lam: float
) -> np.ndarray:
    """edge subgradients s_k = -(1/lambda) sum_{i<=k} dE/dw_i that balance the risk gradient on a unit chain;
        the last entry is the residual at the far end"""

    gradient = np.zeros(len(w))
    variances = model.noise_variances[training_set]
    gradient[training_set] = (w[training_set] - model.labels[training_set]) / (len(training_set) * variances)
    return -np.cumsum(gradient) / lam


def __chain_minimizer(
        model,
        training_set: np.ndarray,
        node_count: int,
        lam: float
) -> np.ndarray:
    """fuses each labeled end at its mean shrunk by lambda M sigma^2 / 3 and joins the ends by a linear ramp"""

    left, right = training_set[:3], training_set[3:]
    shift = lam * len(training_set) * model.noise_variances[0] / len(left)
    high = float(np.mean(model.labels[left])) - shift
    low = float(np.mean(model.labels[right])) + shift
    w = np.empty(node_count)
    w[:left[-1]] = high
    w[right[0] + 1:] = low
    w[left[-1]:right[0] + 1] = np.linspace(high, low, right[0] - left[-1] + 1)
    return w


def test_nlasso_reaches_chain_minimizer(
):
    """on the 40-node chain 1000 iterations at lambda = 10 reach the certified minimizer: equal objective, equal
        labeled values and a non-increasing interior between the two end levels"""

    lam = 10.0
    instance = data_gen.gen_chain_signal(ChainSpec(node_count=40, noise=0.1, seed=0))
    g, model, training_set = instance.graph, instance.model, instance.training_set

    reference = __chain_minimizer(model, training_set, g.node_count, lam)
    subgradients = __chain_subgradients(reference, model, training_set, lam)
    assert abs(subgradients[-1]) <= 1e-9
    assert np.all(np.abs(subgradients[:-1]) <= 1.0 + 1e-9)
    jumps = np.flatnonzero(np.abs(np.diff(reference)) > 1e-12)
    assert subgradients[jumps] == pytest.approx(np.sign(reference[jumps] - reference[jumps + 1]), abs=1e-9)
    reference_value = pd_solver.objective(g, model, training_set, reference, lam)

    result = pd_solver.solve(g, model, training_set, SolverConfig(lam=lam, max_iterations=1000))
    nlasso = result.weights[:, 0]

    assert pd_solver.objective(g, model, training_set, nlasso, lam) <= reference_value + 1e-2
    assert np.max(np.abs(nlasso - reference)[training_set]) <= 0.05
    assert np.all(np.diff(nlasso) <= 1e-3)
    assert reference[-1] - 0.05 <= nlasso.min() and nlasso.max() <= reference[0] + 0.05
    assert np.max(np.abs(nlasso - instance.true_weights[:, 0])[training_set]) <= 0.45


def test_laplacian_regularization_misses_clusters(
):
    """each baseline strength misses the clustered chain signal somewhere by at least 0.3 and none of them beats
        nLasso on its own objective"""

    instance = data_gen.gen_chain_signal(ChainSpec(node_count=40, noise=0.1, seed=0))
    g, model, training_set = instance.graph, instance.model, instance.training_set
    truth = instance.true_weights[:, 0]

    result = pd_solver.solve(g, model, training_set, SolverConfig(lam=10.0, max_iterations=1000))
    nlasso_value = pd_solver.objective(g, model, training_set, result.weights[:, 0], 10.0)

    labels = {int(i): float(model.labels[i]) for i in training_set}
    for lam in (0.01, 1.0, 100.0):
        rnc = baseline_rnc.rnc_solve_scalar(g, labels, lam)[:, 0]
        assert np.max(np.abs(rnc - truth)) >= 0.3
        assert nlasso_value <= pd_solver.objective(g, model, training_set, rnc, 10.0)


def test_connectivity_sweep_thresholds(
        tmp_path
):
    """on the default sweep every point with rho_bar > 1.6 has NMSE <= 0.05 and every point with rho_bar < 0.7 has
        NMSE >= 0.25"""

    assert main(['sweep-connectivity', '--threads', '4', '--out-dir', str(tmp_path)]) == constants.EXIT_OK

    aggregate = pd.read_csv(tmp_path / constants.SWEEP_FILE, comment='#')
    connected = aggregate[aggregate['rho_bar'] > 1.6]
    weak = aggregate[aggregate['rho_bar'] < 0.7]
    assert len(connected) > 0 and len(weak) > 0
    assert (connected['nmse'] <= NMSE_LEVEL).all()
    assert (weak['nmse'] >= 5 * NMSE_LEVEL).all()
    assert aggregate['rho_bar'].is_monotonic_decreasing


def test_image_segmentation_accuracy(
        tmp_path
):
    """the noisy 32 x 32 red square is segmented with at least 95% pixel accuracy"""

    image_dir = tmp_path / 'image'
    assert main(['gen', '--kind', constants.IMAGE, '--out-dir', str(image_dir)]) == constants.EXIT_OK
    out_dir = tmp_path / 'segment'
    assert main(['segment', '-i', str(image_dir / constants.IMAGE_FILE),
                 '--truth-mask', str(image_dir / constants.TRUTH_MASK_FILE), '--lam', '100', '--iterations', '10',
                 '--out-dir', str(out_dir)]) == constants.EXIT_OK

    report = json.loads((out_dir / constants.REPORT_FILE).read_text())
    assert report['accuracy'] >= 0.95
    assert report['seed_agreement'] >= 0.95


@pytest.mark.parametrize('command, config, output', [
    ('bench', {'node_count': 20, 'max_iterations': 200}, constants.BENCH_FILE),
    ('sweep-connectivity', {'cluster_size': 10, 'average_degree': 4.0, 'inter_cluster_edges': [1, 4],
                            'repetitions': 2, 'max_iterations': 100}, constants.SWEEP_FILE),
])
def test_reruns_are_byte_identical(
        tmp_path,
        command,
        config,
        output
):
    """the same configuration and seed reproduce the same CSV bytes"""

    config_path = __write_json(tmp_path / 'config.json', config)
    contents = []
    for run in ('first', 'second'):
        out_dir = tmp_path / run
        assert main([command, '--config', config_path, '--seed', '11', '--threads', '2',
                     '--out-dir', str(out_dir)]) == constants.EXIT_OK
        contents.append((out_dir / output).read_bytes())
    assert contents[0] == contents[1]


def test_segmentation_reruns_are_byte_identical(
        tmp_path
):
    """segmenting the same image twice writes the same scores"""

    assert main(['gen', '--kind', constants.IMAGE, '--seed', '2', '--out-dir', str(tmp_path)]) == constants.EXIT_OK
    scores = []
    for run in ('first', 'second'):
        assert main(['segment', '-i', str(tmp_path / constants.IMAGE_FILE), '--out-dir', str(tmp_path / run)]) == \
            constants.EXIT_OK
        scores.append((tmp_path / run / constants.SCORES_FILE).read_bytes())
    assert scores[0] == scores[1]
