from typing import List, Dict, Any, Optional, Callable
from dataclasses import asdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
import itertools
import logging
import sys
import time
import numpy as np
import pandas as pd
from nlassopd.data_types import EmpiricalGraph, Partition, LearningInstance, SolverConfig, SolveResult
from nlassopd.exp_family import ExpFamilyModel, GaussianLinearModel, neg_log_likelihood, predict_scores
from nlassopd.exceptions import NLassoError, NumericalError, InvalidArgumentError, InputFormatError, \
    ConfigurationError
from nlassopd.instance_io import write_bundle, load_bundle, read_partition, read_ppm, read_json, write_weather_csv
from nlassopd.result_writing import write_weights, write_history, write_json, write_mask, write_ppm, write_scores, \
    write_csv, write_gnuplot_script
from nlassopd import analysis
from nlassopd import baseline_rnc
from nlassopd import data_gen
from nlassopd import graph_core
from nlassopd import pd_solver
from nlassopd import utils
from nlassopd import constants

logger = logging.getLogger(__name__)


def cmd_gen(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    generates an instance bundle (and, for weather and image instances, the raw table or image) in the output directory
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    data: Dict[str, Any] = read_json(args['config']) if args['config'] is not None else {}
    kind_in_file: Optional[str] = data.pop('kind', None)
    kind: str = args['kind'] or kind_in_file or constants.TWO_CLUSTER
    if kind not in utils.GEN_SPECS:
        raise ConfigurationError(constants.INSTANCE_KIND_ERR.format(kinds=constants.INSTANCE_KINDS, kind=kind))
    spec_type: type = utils.GEN_SPECS[kind]
    spec = utils.config_from_dict(spec_type, utils.with_cli_values(spec_type, data, args['seed']))

    with timer.phase('generate'):
        if kind == constants.TWO_CLUSTER:
            instance: LearningInstance = data_gen.gen_two_cluster(spec)
        elif kind == constants.CHAIN:
            instance = data_gen.gen_chain_signal(spec)
        elif kind == constants.WEATHER:
            table: pd.DataFrame = data_gen.gen_synthetic_weather(spec)
            instance = data_gen.weather_to_instance(table, spec)
        else:
            image, mask = data_gen.synthetic_square_image(spec)
            instance = data_gen.image_to_instance(image)

    with timer.phase('write'):
        write_bundle(instance, str(out_dir))
        if kind == constants.WEATHER:
            write_weather_csv(table, str(out_dir / constants.WEATHER_FILE), constants.MANIFEST_FILE)
        elif kind == constants.IMAGE:
            write_ppm(image, str(out_dir / constants.IMAGE_FILE))
            write_mask(mask, str(out_dir / constants.TRUTH_MASK_FILE))

    logger.info(f'{kind} instance: N={instance.graph.node_count}, E={instance.graph.edge_count}, '
                f'M={len(instance.training_set)} written to {out_dir}')
    return {'kind': kind, **asdict(spec)}


def cmd_fit(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    fits a bundle with primal-dual nLasso or the Laplacian-regularized baseline and writes weights and a report
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    cfg: utils.FitConfig = utils.load_config(utils.FitConfig, args['config'], overrides={
        'method': args['method'], 'lam': args['lam'], 'max_iterations': args['max_iterations']
    })
    with timer.phase('read'):
        instance: LearningInstance = load_bundle(args['bundle'])
    g: EmpiricalGraph = instance.graph
    model: ExpFamilyModel = instance.model
    training_set: np.ndarray = instance.training_set

    report: Dict[str, Any] = {
        'method': cfg.method,
        'kind': instance.kind,
        'node_count': g.node_count,
        'edge_count': g.edge_count,
        'training_size': int(len(training_set)),
    }
    result: Optional[SolveResult] = None
    with timer.phase('fit'):
        if cfg.method == constants.NLASSO:
            result = pd_solver.solve(g, model, training_set, cfg.solver_config())
            w: np.ndarray = result.weights
        else:
            if model.kind != constants.SCALAR:
                raise InvalidArgumentError(constants.RNC_MODEL_ERR)
            labels: Dict[int, float] = {int(i): float(model.labels[i]) for i in training_set}
            w = baseline_rnc.rnc_solve_scalar(g, labels, cfg.rnc_config())
            report['rnc_residual'] = baseline_rnc.rnc_residual(g, labels, cfg.lam, w)

    with timer.phase('report'):
        report['empirical_risk'] = neg_log_likelihood(model, w, training_set)
        report['total_variation'] = graph_core.tv_norm(g, w)
        if result is not None:
            report['objective'] = result.history.objectives[-1]
            report['iterations'] = len(result.history.iterations)
            report['stop_reason'] = result.history.stop_reason
            report['step_size_norm'] = result.step_size_norm
            report['stationarity'] = asdict(
                pd_solver.stationarity_residuals(g, model, training_set, w, result.duals, cfg.lam)
            )
        if instance.true_weights is not None:
            report['nmse'] = analysis.nmse(w, instance.true_weights)
        report.update(__held_out_report(instance, w))

    with timer.phase('write'):
        write_weights(w, str(out_dir / constants.WEIGHTS_FILE))
        if result is not None:
            write_history(result.history, str(out_dir / constants.HISTORY_FILE))
        config: Dict[str, Any] = {'bundle': args['bundle'], **asdict(cfg)}
        write_json(config, str(out_dir / constants.CONFIG_ECHO_FILE))
        write_json(report, str(out_dir / constants.REPORT_FILE))
    return config


def cmd_sweep_connectivity(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    sweeps the number of inter-cluster edges of the two-cluster setup and records normalized connectivity and NMSE
        of every run and their means per sweep point; run r uses seed + r
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    cfg: utils.SweepConfig = utils.load_config(utils.SweepConfig, args['config'], args['seed'])
    jobs: List[tuple] = [
        (edges, repetition, cfg.seed + index)
        for index, (edges, repetition) in enumerate(itertools.product(cfg.inter_cluster_edges, range(cfg.repetitions)))
    ]

    with timer.phase('sweep'):
        with ThreadPoolExecutor(max_workers=args['threads']) as executor:
            runs: List[Dict[str, Any]] = list(executor.map(lambda job: __sweep_run(cfg, *job), jobs))

    runs_table = pd.DataFrame(runs)
    aggregate: pd.DataFrame = runs_table.groupby('inter_cluster_edges', sort=False).agg(
        rho_bar=('rho_bar', 'mean'),
        nmse=('nmse', 'mean'),
        nmse_std=('nmse', lambda values: float(np.std(values))),
        runs=('nmse', 'size'),
    ).reset_index()

    with timer.phase('write'):
        write_csv(aggregate, str(out_dir / constants.SWEEP_FILE))
        write_csv(runs_table, str(out_dir / constants.SWEEP_RUNS_FILE))
        write_gnuplot_script(str(out_dir / constants.SWEEP_PLOT_FILE), constants.SWEEP_FILE,
                             'NMSE versus normalized connectivity', 'rho_bar', 'NMSE',
                             [{'x': 2, 'y': 3, 'title': 'nLasso'}])
    logger.info(f'connectivity sweep: {len(aggregate)} points x {cfg.repetitions} runs')
    return asdict(cfg)


def cmd_segment(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    segments a PPM image into foreground and background with networked logistic regression (Newton primal updates)
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    cfg: utils.SegmentConfig = utils.load_config(utils.SegmentConfig, args['config'], overrides={
        'lam': args['lam'], 'iterations': args['iterations']
    })
    with timer.phase('read'):
        pixels: np.ndarray = read_ppm(args['image'])
    rows, cols = pixels.shape[0], pixels.shape[1]

    with timer.phase('fit'):
        instance: LearningInstance = data_gen.image_to_instance(pixels, cfg.image_spec())
        result: SolveResult = pd_solver.solve(instance.graph, instance.model, instance.training_set,
                                              cfg.solver_config())
    scores: np.ndarray = predict_scores(instance.model, result.weights)
    mask: np.ndarray = (scores > 0).reshape(rows, cols)

    seeds: np.ndarray = instance.training_set
    seed_labels: np.ndarray = instance.model.labels[seeds]
    report: Dict[str, Any] = {
        'rows': rows,
        'cols': cols,
        'foreground_seeds': int(np.sum(seed_labels > 0)),
        'background_seeds': int(np.sum(seed_labels < 0)),
        'foreground_pixels': int(mask.sum()),
        'seed_agreement': float(np.mean(np.where(scores[seeds] > 0, 1.0, -1.0) == seed_labels)),
        'iterations': len(result.history.iterations),
        'objective': result.history.objectives[-1],
    }
    if args['truth_mask'] is not None:
        truth: np.ndarray = read_ppm(args['truth_mask'])[..., 0] > 0.5
        if truth.shape != mask.shape:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
                path=args['truth_mask'], line=1,
                reason=constants.MASK_SHAPE_ERR.format(actual=truth.shape, expected=mask.shape)
            ))
        report['accuracy'] = float(np.mean(mask == truth))
        logger.info(f'segmentation accuracy {report["accuracy"]:.4f}')

    with timer.phase('write'):
        write_mask(mask, str(out_dir / constants.MASK_FILE))
        write_scores(scores, cols, str(out_dir / constants.SCORES_FILE))
        config: Dict[str, Any] = {'image': args['image'], 'truth_mask': args['truth_mask'], **asdict(cfg)}
        write_json(config, str(out_dir / constants.CONFIG_ECHO_FILE))
        write_json(report, str(out_dir / constants.REPORT_FILE))
    return config


def cmd_diag(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    writes the error-analysis report of a bundle and a partition (the bundle's own one unless a file is given)
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    cfg: utils.DiagConfig = utils.load_config(utils.DiagConfig, args['config'], args['seed'])
    with timer.phase('read'):
        instance: LearningInstance = load_bundle(args['bundle'])
        partition: Optional[Partition] = instance.partition
        if args['partition'] is not None:
            partition = read_partition(args['partition'], instance.graph.node_count)
    if partition is None:
        raise InvalidArgumentError(constants.MISSING_PARTITION_ERR.format(file=constants.PARTITION_FILE))
    graph_core.validate_partition(instance.graph, partition)

    with timer.phase('diagnostics'):
        report: Dict[str, Any] = analysis.diagnostic_report(
            instance.graph, partition, instance.model, instance.training_set, cfg.K, cfg.asspt3_L, cfg.eta,
            cfg.samples, cfg.seed, cfg.U
        )
        pseudo_inverse = analysis.pseudo_inverse_column_bound(instance.graph, instance.model.dim)
        report['pseudo_inverse_bound'] = pseudo_inverse.bound
        report['pseudo_inverse_exact'] = pseudo_inverse.exact
        report['pseudo_inverse_bound_holds'] = pseudo_inverse.holds
        report['pseudo_inverse_exact_weighted'] = pseudo_inverse.exact_weighted

    config: Dict[str, Any] = {'bundle': args['bundle'], 'partition': args['partition'], **asdict(cfg)}
    with timer.phase('write'):
        write_json(config, str(out_dir / constants.CONFIG_ECHO_FILE))
        write_json(report, str(out_dir / constants.REPORT_FILE))
    return config


def cmd_bench(
        args: Dict[str, Any],
        out_dir: Path,
        timer: utils.PhaseTimer
) -> Dict[str, Any]:
    """
    compares nLasso with the Laplacian-regularized baseline at several strengths on the signal-in-noise setup
    :param args: (Dict[str, Any]) parsed arguments
    :param out_dir: (Path) output directory
    :param timer: (utils.PhaseTimer) phase timer
    :return: (Dict[str, Any]) configuration echo
    """

    cfg: utils.BenchConfig = utils.load_config(utils.BenchConfig, args['config'], args['seed'])
    instance: LearningInstance = data_gen.gen_chain_signal(cfg.chain_spec())
    g: EmpiricalGraph = instance.graph
    truth: np.ndarray = instance.true_weights[:, 0]

    estimates: Dict[str, np.ndarray] = {}
    with timer.phase(constants.NLASSO):
        result: SolveResult = pd_solver.solve(g, instance.model, instance.training_set,
                                              SolverConfig(lam=cfg.lam, max_iterations=cfg.max_iterations))
        estimates[constants.NLASSO] = result.weights[:, 0]
    labels: Dict[int, float] = {int(i): float(instance.model.labels[i]) for i in instance.training_set}
    for lam in cfg.rnc_lams:
        name: str = f'{constants.RNC}_{lam:g}'
        with timer.phase(name):
            estimates[name] = baseline_rnc.rnc_solve_scalar(g, labels, lam)[:, 0]

    summary: Dict[str, Any] = {}
    for name, w in estimates.items():
        summary[name] = {
            'max_error': float(np.max(np.abs(w - truth))),
            'labeled_max_error': float(np.max(np.abs(w - truth)[instance.training_set])),
            'nmse': analysis.nmse(w, truth),
            'objective': pd_solver.objective(g, instance.model, instance.training_set, w, cfg.lam),
        }
        logger.info(f'{name}: max error {summary[name]["max_error"]:.4g}, objective {summary[name]["objective"]:.6g}')

    table = pd.DataFrame({'node_id': np.arange(1, g.node_count + 1), 'truth': truth, 'observed': instance.model.labels,
                          **estimates})
    with timer.phase('write'):
        write_csv(table, str(out_dir / constants.BENCH_FILE))
        write_json({'lam': cfg.lam, 'estimators': summary}, str(out_dir / constants.BENCH_SUMMARY_FILE))
        series: List[Dict[str, Any]] = [{'x': 1, 'y': 2, 'title': 'truth', 'style': 'lines'},
                                        {'x': 1, 'y': 3, 'title': 'observed', 'style': 'points'}]
        series.extend({'x': 1, 'y': 4 + k, 'title': name} for k, name in enumerate(estimates))
        write_gnuplot_script(str(out_dir / constants.BENCH_PLOT_FILE), constants.BENCH_FILE,
                             'nLasso versus Laplacian regularization', 'node', 'weight', series)
    return asdict(cfg)


COMMANDS: Dict[str, Callable[[Dict[str, Any], Path, utils.PhaseTimer], Dict[str, Any]]] = {
    'gen': cmd_gen,
    'fit': cmd_fit,
    'sweep-connectivity': cmd_sweep_connectivity,
    'segment': cmd_segment,
    'diag': cmd_diag,
    'bench': cmd_bench,
}


def main(
        argv: Optional[List[str]] = None
) -> int:
    """
    runs one CLI subcommand and writes its manifest
    :param argv: (Optional[List[str]]) arguments, sys.argv[1:] if None
    :return: (int) exit code: 0 success, 1 numerical failure, 2 input error
    """

    args: Dict[str, Any] = utils.parse_arguments(argv)
    utils.set_up_logging(args['verbose'])
    subcommand: str = args['subcommand']
    print(f'***START***\nrunning nlassopd {subcommand}, seed - {args["seed"]}, output - {args["out_dir"]}.')

    start_time: float = time.time()
    timer = utils.PhaseTimer()
    try:
        out_dir: Path = utils.out_dir_set_up(args['out_dir'])
        config: Dict[str, Any] = COMMANDS[subcommand](args, out_dir, timer)
        manifest = utils.make_manifest(subcommand, config, config.get('seed', args['seed']), timer.timings)
        write_json(manifest.to_dict(), str(out_dir / constants.MANIFEST_FILE))
    except NumericalError as err:
        logger.error(f'{subcommand} failed at iteration {err.iteration}: {err}')
        return constants.EXIT_NUMERICAL
    except np.linalg.LinAlgError as err:
        logger.error(f'{subcommand} failed in a linear algebra routine: {err}')
        return constants.EXIT_NUMERICAL
    # pandas parser errors are ValueErrors
    except (NLassoError, OSError, ValueError) as err:
        logger.error(f'{subcommand} failed: {err}')
        return constants.EXIT_INPUT
    end_time: float = time.time()

    runtime_sec: float = end_time - start_time
    print(f'***FINISHED***\nruntime - {runtime_sec} (sec).')
    return constants.EXIT_OK


def __held_out_report(
        instance: LearningInstance,
        w: np.ndarray
) -> Dict[str, Any]:
    """
    compares the prediction error of the fitted weights on the unlabeled nodes with that of one linear model fitted
        to the labeled nodes of the focus cluster, and with one linear model fitted to all labeled nodes, for linear
        models whose held-out labels are known
    :param instance: (LearningInstance) instance
    :param w: (np.ndarray) fitted weights
    :return: (Dict[str, Any]) report entries, empty when not applicable
    """

    model: ExpFamilyModel = instance.model
    if instance.targets is None or not isinstance(model, GaussianLinearModel):
        return {}
    held_out: np.ndarray = np.setdiff1d(np.arange(model.node_count), instance.training_set)
    if len(held_out) == 0 or len(instance.training_set) < model.dim:
        return {}

    def shared_model_error(weights: np.ndarray) -> float:
        return analysis.normalized_prediction_error(model, np.tile(weights, (model.node_count, 1)), instance.targets,
                                                    held_out)

    pooled: np.ndarray = analysis.pooled_linear_fit(model, instance.training_set)
    report: Dict[str, Any] = {
        'held_out_size': int(len(held_out)),
        'held_out_error': analysis.normalized_prediction_error(model, w, instance.targets, held_out),
        'pooled_weights': pooled,
        'pooled_held_out_error': shared_model_error(pooled),
    }
    if instance.focus_nodes is None:
        return report

    focus_labeled: np.ndarray = np.intersect1d(instance.focus_nodes, instance.training_set)
    report['focus_size'] = int(len(instance.focus_nodes))
    report['focus_labeled'] = int(len(focus_labeled))
    if len(focus_labeled) >= model.dim:
        cluster: np.ndarray = analysis.pooled_linear_fit(model, focus_labeled)
        report['cluster_weights'] = cluster
        report['cluster_held_out_error'] = shared_model_error(cluster)
    else:
        logger.warning(f'focus cluster has {len(focus_labeled)} labeled nodes, fewer than d={model.dim}; '
                       f'no cluster fit')
    return report


def __sweep_run(
        cfg: utils.SweepConfig,
        inter_cluster_edges: int,
        repetition: int,
        seed: int
) -> Dict[str, Any]:
    instance: LearningInstance = data_gen.gen_two_cluster(cfg.two_cluster_spec(inter_cluster_edges, seed))
    representatives: Dict[int, int] = data_gen.two_cluster_representatives(instance.graph, instance.partition,
                                                                           instance.training_set)
    connectivity = graph_core.normalized_connectivity(instance.graph, instance.partition, representatives)
    result: SolveResult = pd_solver.solve(instance.graph, instance.model, instance.training_set,
                                          SolverConfig(lam=cfg.lam, tau=cfg.tau, max_iterations=cfg.max_iterations))
    return {
        'inter_cluster_edges': inter_cluster_edges,
        'repetition': repetition,
        'seed': seed,
        'boundary_size': int(sum(connectivity.boundary_sizes) // 2),
        'no_interior_clusters': int(sum(connectivity.no_interior)),
        'rho_bar': connectivity.mean,
        'nmse': analysis.nmse(result.weights, instance.true_weights),
    }


if __name__ == '__main__':
    sys.exit(main())
