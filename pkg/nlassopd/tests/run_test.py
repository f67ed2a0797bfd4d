import json
import numpy as np
import pandas as pd
import pytest
from nlassopd.run import main
from nlassopd import pd_solver
from nlassopd import run
from nlassopd import constants


def __write_json(
        path,
        document: dict
) -> str:
    path.write_text(json.dumps(document))
    return str(path)


def __read_json(
        path
) -> dict:
    return json.loads(path.read_text())


def __read_csv(
        path
) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def test_gen_writes_bundle_and_manifest(
        tmp_path
):
    """gen writes every bundle file and a manifest naming the subcommand and seed"""

    out_dir = tmp_path / 'bundle'
    config = __write_json(tmp_path / 'gen.json', {'cluster_size': 8, 'average_degree': 4.0, 'inter_cluster_edges': 2})

    assert main(['gen', '--kind', constants.TWO_CLUSTER, '--config', config, '--seed', '7',
                 '--out-dir', str(out_dir)]) == constants.EXIT_OK
    for name in (constants.GRAPH_FILE, constants.ATTRIBUTES_FILE, constants.TRAINING_FILE, constants.PARTITION_FILE,
                 constants.TRUTH_FILE, constants.BUNDLE_FILE, constants.MANIFEST_FILE):
        assert (out_dir / name).is_file()
    manifest = __read_json(out_dir / constants.MANIFEST_FILE)
    assert manifest['subcommand'] == 'gen'
    assert manifest['seed'] == 7
    assert manifest['config']['cluster_size'] == 8
    assert 'generate' in manifest['timings']


def test_fit_nlasso_and_rnc(
        tmp_path
):
    """both estimators fit a chain bundle; nLasso also writes its iteration history"""

    bundle = tmp_path / 'chain'
    config = __write_json(tmp_path / 'chain.json', {'node_count': 12})
    assert main(['gen', '--kind', constants.CHAIN, '--config', config, '--out-dir', str(bundle)]) == constants.EXIT_OK

    nlasso_dir = tmp_path / 'nlasso'
    assert main(['fit', '-b', str(bundle), '--max-iterations', '200', '--out-dir', str(nlasso_dir)]) == \
        constants.EXIT_OK
    weights = __read_csv(nlasso_dir / constants.WEIGHTS_FILE)
    assert list(weights.columns) == ['node_id', 'w_1']
    assert weights['node_id'].tolist() == list(range(1, 13))
    assert len(__read_csv(nlasso_dir / constants.HISTORY_FILE)) == 200
    report = __read_json(nlasso_dir / constants.REPORT_FILE)
    assert report['iterations'] == 200
    assert report['stop_reason'] == 'max_iterations'
    assert report['step_size_norm'] < 1
    for key in ('objective', 'empirical_risk', 'total_variation', 'nmse', 'stationarity'):
        assert key in report
    assert __read_json(nlasso_dir / constants.CONFIG_ECHO_FILE)['lam'] == 10.0

    rnc_dir = tmp_path / 'rnc'
    assert main(['fit', '-b', str(bundle), '--method', constants.RNC, '--lam', '1',
                 '--out-dir', str(rnc_dir)]) == constants.EXIT_OK
    assert __read_json(rnc_dir / constants.REPORT_FILE)['rnc_residual'] <= 1e-8
    assert not (rnc_dir / constants.HISTORY_FILE).exists()


def test_fit_weather_reports_held_out_error(
        tmp_path
):
    """a weather bundle carries held-out labels and a focus cluster, so the report compares nLasso with a linear model
        fitted to the labeled stations of the cluster and with one fitted to all labeled stations"""

    bundle = tmp_path / 'weather'
    config = __write_json(tmp_path / 'weather.json', {'station_count': 30, 'day_count': 6, 'target_day': 5})
    assert main(['gen', '--kind', constants.WEATHER, '--config', config, '--out-dir', str(bundle)]) == \
        constants.EXIT_OK
    assert (bundle / constants.WEATHER_FILE).is_file()
    assert len((bundle / constants.FOCUS_FILE).read_text().splitlines()) == 1 + 9

    out_dir = tmp_path / 'fit'
    assert main(['fit', '-b', str(bundle), '--lam', '1', '--max-iterations', '300', '--out-dir', str(out_dir)]) == \
        constants.EXIT_OK
    report = __read_json(out_dir / constants.REPORT_FILE)
    assert report['held_out_size'] == 6
    assert report['held_out_error'] >= 0
    assert len(report['pooled_weights']) == 3
    assert report['focus_size'] == 9
    assert report['focus_labeled'] == 3
    assert len(report['cluster_weights']) == 3
    assert report['cluster_held_out_error'] >= 0


def test_fit_input_errors(
        tmp_path
):
    """missing bundles, unknown config fields and the baseline on a non-scalar bundle exit with code 2"""

    assert main(['fit', '-b', str(tmp_path / 'missing'), '--out-dir', str(tmp_path / 'a')]) == constants.EXIT_INPUT

    bundle = tmp_path / 'two_cluster'
    config = __write_json(tmp_path / 'gen.json', {'cluster_size': 6, 'average_degree': 3.0, 'inter_cluster_edges': 1})
    assert main(['gen', '--config', config, '--out-dir', str(bundle)]) == constants.EXIT_OK
    assert main(['fit', '-b', str(bundle), '--method', constants.RNC, '--out-dir', str(tmp_path / 'b')]) == \
        constants.EXIT_INPUT

    bad_config = __write_json(tmp_path / 'fit.json', {'lam': 1.0, 'step': 0.5})
    assert main(['fit', '-b', str(bundle), '--config', bad_config, '--out-dir', str(tmp_path / 'c')]) == \
        constants.EXIT_INPUT
    negative = __write_json(tmp_path / 'neg.json', {'lam': -1.0})
    assert main(['fit', '-b', str(bundle), '--config', negative, '--out-dir', str(tmp_path / 'd')]) == \
        constants.EXIT_INPUT


def test_fit_numerical_failure(
        tmp_path
):
    """overflowing iterates exit with code 1"""

    bundle = tmp_path / 'overflow'
    bundle.mkdir()
    (bundle / constants.GRAPH_FILE).write_text('2 1 1\n1 2 1\n')
    (bundle / constants.ATTRIBUTES_FILE).write_text('node_id,y,x_1,sigma2\n1,1e308,1,1e-10\n2,1e308,1,1e-10\n')
    (bundle / constants.TRAINING_FILE).write_text('1\n2\n')
    __write_json(bundle / constants.BUNDLE_FILE, {'kind': 'manual', 'model': constants.GAUSSIAN})

    with np.errstate(all='ignore'):
        assert main(['fit', '-b', str(bundle), '--out-dir', str(tmp_path / 'out')]) == constants.EXIT_NUMERICAL


def test_library_errors_map_to_exit_codes(
        tmp_path,
        monkeypatch
):
    """a linear algebra failure exits with code 1, a table pandas cannot parse with code 2"""

    bundle = tmp_path / 'chain'
    assert main(['gen', '--kind', constants.CHAIN, '--out-dir', str(bundle)]) == constants.EXIT_OK

    def fail_to_converge(*args, **kwargs):
        raise np.linalg.LinAlgError('SVD did not converge')

    monkeypatch.setattr(pd_solver, 'solve', fail_to_converge)
    assert main(['fit', '-b', str(bundle), '--out-dir', str(tmp_path / 'a')]) == constants.EXIT_NUMERICAL

    def fail_to_parse(*args, **kwargs):
        raise pd.errors.ParserError('Error tokenizing data')

    monkeypatch.setattr(run, 'load_bundle', fail_to_parse)
    assert main(['fit', '-b', str(bundle), '--out-dir', str(tmp_path / 'b')]) == constants.EXIT_INPUT


def test_segment(
        tmp_path
):
    """segment writes a mask, per-pixel scores and, given a truth mask, the pixel accuracy"""

    image_dir = tmp_path / 'image'
    config = __write_json(tmp_path / 'image.json', {'rows': 12, 'cols': 12, 'square': 4})
    assert main(['gen', '--kind', constants.IMAGE, '--config', config, '--out-dir', str(image_dir)]) == \
        constants.EXIT_OK

    out_dir = tmp_path / 'segment'
    assert main(['segment', '-i', str(image_dir / constants.IMAGE_FILE),
                 '--truth-mask', str(image_dir / constants.TRUTH_MASK_FILE), '--out-dir', str(out_dir)]) == \
        constants.EXIT_OK
    assert (out_dir / constants.MASK_FILE).read_bytes().startswith(b'P6\n12 12\n255\n')
    scores = __read_csv(out_dir / constants.SCORES_FILE)
    assert list(scores.columns) == ['node_id', 'row', 'col', 'score', 'probability', 'label']
    assert len(scores) == 144
    report = __read_json(out_dir / constants.REPORT_FILE)
    assert report['iterations'] == 10
    assert 0 <= report['accuracy'] <= 1

    assert main(['segment', '-i', str(tmp_path / 'missing.ppm'), '--out-dir', str(out_dir)]) == constants.EXIT_INPUT


def test_diag(
        tmp_path
):
    """diag reports gaps, the bound and the pseudo-inverse check for the bundle's own partition"""

    bundle = tmp_path / 'bundle'
    config = __write_json(tmp_path / 'gen.json', {'cluster_size': 8, 'average_degree': 4.0, 'inter_cluster_edges': 2})
    assert main(['gen', '--config', config, '--out-dir', str(bundle)]) == constants.EXIT_OK

    out_dir = tmp_path / 'diag'
    diag_config = __write_json(tmp_path / 'diag.json', {'samples': 100})
    assert main(['diag', '-b', str(bundle), '--config', diag_config, '--out-dir', str(out_dir)]) == constants.EXIT_OK
    report = __read_json(out_dir / constants.REPORT_FILE)
    for key in ('spectral_gap', 'partition_gap', 'kappa', 'lambda_prescribed', 'bound_value', 'vacuous', 'K_est',
                'pseudo_inverse_bound', 'pseudo_inverse_exact', 'pseudo_inverse_bound_holds'):
        assert key in report
    assert report['lambda_prescribed'] == pytest.approx(0.128)
    assert report['boundary_size'] == 2

    chain = tmp_path / 'chain'
    assert main(['gen', '--kind', constants.CHAIN, '--out-dir', str(chain)]) == constants.EXIT_OK
    (chain / constants.PARTITION_FILE).unlink()
    assert main(['diag', '-b', str(chain), '--out-dir', str(tmp_path / 'd')]) == constants.EXIT_INPUT


def test_bench(
        tmp_path
):
    """bench writes one column per estimator and a summary per estimator"""

    config = __write_json(tmp_path / 'bench.json', {'node_count': 12, 'max_iterations': 100})
    assert main(['bench', '--config', config, '--out-dir', str(tmp_path)]) == constants.EXIT_OK

    table = __read_csv(tmp_path / constants.BENCH_FILE)
    assert list(table.columns) == ['node_id', 'truth', 'observed', 'nlasso', 'rnc_0.01', 'rnc_1', 'rnc_100']
    assert len(table) == 12
    summary = __read_json(tmp_path / constants.BENCH_SUMMARY_FILE)
    assert set(summary['estimators']) == {'nlasso', 'rnc_0.01', 'rnc_1', 'rnc_100'}
    assert (tmp_path / constants.BENCH_PLOT_FILE).is_file()


def test_sweep_connectivity(
        tmp_path
):
    """one aggregate row per sweep point and one run row per repetition"""

    config = __write_json(tmp_path / 'sweep.json', {
        'cluster_size': 10, 'average_degree': 4.0, 'inter_cluster_edges': [1, 8], 'repetitions': 2,
        'max_iterations': 100
    })
    assert main(['sweep-connectivity', '--config', config, '--threads', '2', '--seed', '3',
                 '--out-dir', str(tmp_path)]) == constants.EXIT_OK

    aggregate = __read_csv(tmp_path / constants.SWEEP_FILE)
    assert list(aggregate.columns) == ['inter_cluster_edges', 'rho_bar', 'nmse', 'nmse_std', 'runs']
    assert aggregate['inter_cluster_edges'].tolist() == [1, 8]
    assert aggregate['runs'].tolist() == [2, 2]
    assert (aggregate['nmse'] >= 0).all()
    runs = __read_csv(tmp_path / constants.SWEEP_RUNS_FILE)
    assert runs['seed'].tolist() == [3, 4, 5, 6]
    assert runs['boundary_size'].tolist() == [1, 1, 8, 8]
    assert runs['no_interior_clusters'].tolist() == [0, 0, 0, 0]
    assert __read_json(tmp_path / constants.MANIFEST_FILE)['seed'] == 3
