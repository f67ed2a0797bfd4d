from typing import List, Dict, Any, Optional, Tuple, Type, TypeVar
from dataclasses import dataclass, fields, MISSING
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
import argparse
import logging
import subprocess
import time
import nlassopd
from nlassopd.data_types import SolverConfig, RncConfig, RunManifest, TwoClusterSpec, ChainSpec, WeatherSpec, \
    SquareImageSpec, ImageGraphSpec
from nlassopd.exceptions import ConfigurationError
from nlassopd.instance_io import read_json
from nlassopd import constants

ConfigType = TypeVar('ConfigType')

# gen: instance kind -> spec of its generator
GEN_SPECS: Dict[str, type] = {
    constants.TWO_CLUSTER: TwoClusterSpec,
    constants.CHAIN: ChainSpec,
    constants.WEATHER: WeatherSpec,
    constants.IMAGE: SquareImageSpec,
}


@dataclass
class FitConfig:
    """this class represents a fit configuration

    Attributes:  # noqa
        method: (str) nlasso or rnc
        lam: (float) regularization strength (TV for nlasso, Laplacian for rnc)
        tau: (float) global primal step factor of nlasso
        max_iterations: (int) nlasso iteration budget
        tolerance: (Optional[float]) nlasso relative-change tolerance
        primal_update: (str) node-wise primal update for non-quadratic models
        inexactness_floor: (float) cap of the fixed-point inexactness schedule
        cg_tol: (float) rnc conjugate-gradient tolerance
        cg_max_iterations: (int) rnc conjugate-gradient budget
    """
    method: str = constants.NLASSO
    lam: float = 10.0
    tau: float = constants.DEFAULT_TAU
    max_iterations: int = constants.DEFAULT_MAX_ITERATIONS
    tolerance: Optional[float] = None
    primal_update: str = constants.FIXED_POINT
    inexactness_floor: float = constants.DEFAULT_INEXACTNESS_FLOOR
    cg_tol: float = constants.DEFAULT_RNC_CG_TOL
    cg_max_iterations: int = constants.DEFAULT_RNC_CG_MAX_ITERATIONS

    def __post_init__(self):
        if self.method not in (constants.NLASSO, constants.RNC):
            raise ConfigurationError(constants.FIT_METHOD_ERR.format(method=self.method))
        # builds (and so validates) the configuration the method will run with
        if self.method == constants.NLASSO:
            self.solver_config()
        else:
            self.rnc_config()

    def solver_config(self) -> SolverConfig:
        return SolverConfig(lam=self.lam, tau=self.tau, max_iterations=self.max_iterations, tolerance=self.tolerance,
                            primal_update=self.primal_update, inexactness_floor=self.inexactness_floor)

    def rnc_config(self) -> RncConfig:
        return RncConfig(lam=self.lam, cg_tol=self.cg_tol, cg_max_iterations=self.cg_max_iterations)


@dataclass
class SweepConfig:
    """this class represents a connectivity sweep over the number of inter-cluster edges

    Attributes:  # noqa
        cluster_size: (int) nodes per cluster
        average_degree: (float) target average degree inside each cluster
        inter_cluster_edges: (Tuple[int, ...]) sweep points
        repetitions: (int) i.i.d. runs per sweep point
        labels_per_cluster: (int) labeled nodes per cluster
        dim: (int) feature dimension
        weights_a: (Tuple[float, ...]) true weights of the first cluster
        weights_b: (Tuple[float, ...]) true weights of the second cluster
        noise: (float) label noise standard deviation
        lam: (float) TV regularization strength
        tau: (float) global primal step factor
        max_iterations: (int) iteration budget per run
        seed: (int) base seed, run r uses seed + r
    """
    cluster_size: int = 40
    average_degree: float = 10.0
    inter_cluster_edges: Tuple[int, ...] = (2, 4, 8, 16, 32, 48, 64)
    repetitions: int = 10
    labels_per_cluster: int = 3
    dim: int = 2
    weights_a: Tuple[float, ...] = (1.0, 1.0)
    weights_b: Tuple[float, ...] = (-1.0, 1.0)
    noise: float = 0.0
    lam: float = 0.1
    tau: float = constants.DEFAULT_TAU
    max_iterations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not self.repetitions >= 1:
            raise ConfigurationError(constants.SPEC_POSITIVE_ERR.format(name='repetitions', value=self.repetitions))
        if len(self.inter_cluster_edges) == 0:
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(field='inter_cluster_edges',
                                                                       reason='no sweep points'))
        for edges in self.inter_cluster_edges:
            self.two_cluster_spec(edges, self.seed)
        SolverConfig(lam=self.lam, tau=self.tau, max_iterations=self.max_iterations)

    def two_cluster_spec(self, inter_cluster_edges: int, seed: int) -> TwoClusterSpec:
        return TwoClusterSpec(cluster_size=self.cluster_size, average_degree=self.average_degree,
                              inter_cluster_edges=inter_cluster_edges, dim=self.dim, weights_a=self.weights_a,
                              weights_b=self.weights_b, labels_per_cluster=self.labels_per_cluster, noise=self.noise,
                              seed=seed)


@dataclass
class DiagConfig:
    """this class represents the constants of the error-analysis report

    Attributes:  # noqa
        K: (float) compatibility constant K
        asspt3_L: (float) compatibility constant L
        eta: (float) target TV error level
        samples: (int) random signals drawn to estimate K
        seed: (int) random seed of the sampler
        U: (Optional[float]) Fisher information upper bound, by default taken from the model
    """
    K: float = 2.0
    asspt3_L: float = 7.0
    eta: float = 1.0
    samples: int = 1000
    seed: int = 0
    U: Optional[float] = None

    def __post_init__(self):
        if not self.asspt3_L > 3:
            raise ConfigurationError(constants.THEOREM_L_ERR.format(L=self.asspt3_L))
        if not 1 < self.K < self.asspt3_L - 2:
            raise ConfigurationError(constants.THEOREM_K_ERR.format(upper=self.asspt3_L - 2, K=self.K))
        if self.samples < 1:
            raise ConfigurationError(constants.SAMPLES_ERR.format(samples=self.samples))


@dataclass
class BenchConfig:
    """this class represents the nLasso versus Laplacian-regularization comparison on the signal-in-noise setup

    Attributes:  # noqa
        node_count: (int) number of nodes N
        noise: (float) label noise standard deviation
        topology: (str) chain or two_cluster
        lam: (float) nLasso regularization strength
        max_iterations: (int) nLasso iteration budget
        rnc_lams: (Tuple[float, ...]) Laplacian regularization strengths of the baseline
        seed: (int) random seed
    """
    node_count: int = 40
    noise: float = 0.1
    topology: str = constants.CHAIN
    lam: float = 10.0
    max_iterations: int = constants.DEFAULT_MAX_ITERATIONS
    rnc_lams: Tuple[float, ...] = (0.01, 1.0, 100.0)
    seed: int = 0

    def __post_init__(self):
        self.chain_spec()
        SolverConfig(lam=self.lam, max_iterations=self.max_iterations)
        for lam in self.rnc_lams:
            RncConfig(lam=lam)

    def chain_spec(self) -> ChainSpec:
        return ChainSpec(node_count=self.node_count, noise=self.noise, seed=self.seed, topology=self.topology)


@dataclass
class SegmentConfig:
    """this class represents a foreground/background segmentation run

    Attributes:  # noqa
        lam: (float) TV regularization strength
        iterations: (int) fixed number of primal-dual iterations
        tau: (float) global primal step factor
        background_threshold: (float) normalized redness below which a pixel is a background seed
        foreground_threshold: (float) normalized redness above which a pixel is a foreground seed
    """
    lam: float = 100.0
    iterations: int = 10
    tau: float = constants.DEFAULT_TAU
    background_threshold: float = constants.BACKGROUND_THRESHOLD
    foreground_threshold: float = constants.FOREGROUND_THRESHOLD

    def __post_init__(self):
        if not 0 <= self.background_threshold <= self.foreground_threshold <= 1:
            raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(
                field='background_threshold', reason='thresholds must satisfy 0 <= background <= foreground <= 1'
            ))
        self.solver_config()

    def solver_config(self) -> SolverConfig:
        return SolverConfig(lam=self.lam, tau=self.tau, max_iterations=self.iterations,
                            primal_update=constants.NEWTON_STEP)

    def image_spec(self) -> ImageGraphSpec:
        return ImageGraphSpec(background_threshold=self.background_threshold,
                              foreground_threshold=self.foreground_threshold)


class PhaseTimer:
    """this class represents a wall-clock timer recording the duration of named run phases

    Attributes:  # noqa
        timings: (Dict[str, float]) seconds spent per phase
    """

    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        start_time: float = time.time()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.time() - start_time


def parse_arguments(
        argv: Optional[List[str]] = None
) -> Dict[str, Any]:
    """
    parses input arguments
    :param argv: (Optional[List[str]]) arguments, sys.argv[1:] if None
    :return: (Dict[str, Any]) parsed arguments
    """

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--seed', type=int, default=0
    )
    common.add_argument(
        '--config', type=str, default=None
    )
    common.add_argument(
        '--out-dir', dest='out_dir', type=str, default='out'
    )
    common.add_argument(
        '--threads', type=int, default=1
    )
    common.add_argument(
        '-v', '--verbose', action='store_true'
    )

    parser = argparse.ArgumentParser(prog='nlassopd')
    subparsers = parser.add_subparsers(dest='subcommand', required=True)

    gen = subparsers.add_parser('gen', parents=[common])
    gen.add_argument(
        '--kind', type=str, choices=constants.INSTANCE_KINDS, default=None
    )

    fit = subparsers.add_parser('fit', parents=[common])
    fit.add_argument(
        '-b', '--bundle', type=str, required=True
    )
    fit.add_argument(
        '--method', type=str, choices=(constants.NLASSO, constants.RNC), default=None
    )
    fit.add_argument(
        '--lam', type=float, default=None
    )
    fit.add_argument(
        '--max-iterations', dest='max_iterations', type=int, default=None
    )

    subparsers.add_parser('sweep-connectivity', parents=[common])

    segment = subparsers.add_parser('segment', parents=[common])
    segment.add_argument(
        '-i', '--image', type=str, required=True
    )
    segment.add_argument(
        '--lam', type=float, default=None
    )
    segment.add_argument(
        '--iterations', type=int, default=None
    )
    segment.add_argument(
        '--truth-mask', dest='truth_mask', type=str, default=None
    )

    diag = subparsers.add_parser('diag', parents=[common])
    diag.add_argument(
        '-b', '--bundle', type=str, required=True
    )
    diag.add_argument(
        '-p', '--partition', type=str, default=None
    )

    subparsers.add_parser('bench', parents=[common])

    parsed_args = parser.parse_args(argv)
    if parsed_args.threads < 1:
        parser.error(f'--threads must be >= 1, got {parsed_args.threads}')

    return parsed_args.__dict__


def set_up_logging(
        verbose: bool
) -> None:
    """
    configures the root logger once for a CLI run
    :param verbose: (bool) whether to log at DEBUG instead of INFO
    :return: (None)
    """

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        force=True,
    )


def config_from_dict(
        cls: Type[ConfigType],
        data: Dict[str, Any]
) -> ConfigType:
    """
    builds a configuration dataclass from a JSON object, naming unknown, missing or invalid fields;
        JSON lists become tuples
    :param cls: (Type[ConfigType]) dataclass
    :param data: (Dict[str, Any]) field values
    :return: (ConfigType) validated configuration
    """

    known: Dict[str, Any] = {f.name: f for f in fields(cls)}
    for name in data:
        if name not in known:
            raise ConfigurationError(constants.CONFIG_UNKNOWN_FIELD_ERR.format(field=name))
    for name, f in known.items():
        if f.init and f.default is MISSING and f.default_factory is MISSING and name not in data:
            raise ConfigurationError(constants.CONFIG_MISSING_ERR.format(field=name))

    values: Dict[str, Any] = {name: tuple(value) if isinstance(value, list) else value for name, value in data.items()}
    try:
        return cls(**values)
    except TypeError as err:
        raise ConfigurationError(constants.CONFIG_FIELD_ERR.format(field=cls.__name__, reason=err))


def load_config(
        cls: Type[ConfigType],
        config_path: Optional[str],
        seed: Optional[int] = None,
        overrides: Optional[Dict[str, Any]] = None
) -> ConfigType:
    """
    loads a configuration: JSON file values (if a file is given) on top of the defaults, the CLI seed when the file
        sets none, and explicit CLI values on top of everything
    :param cls: (Type[ConfigType]) dataclass
    :param config_path: (Optional[str]) JSON file path
    :param seed: (Optional[int]) CLI seed
    :param overrides: (Optional[Dict[str, Any]]) CLI values, None entries are ignored
    :return: (ConfigType) validated configuration
    """

    data: Dict[str, Any] = read_json(config_path) if config_path is not None else {}
    return config_from_dict(cls, with_cli_values(cls, data, seed, overrides))


def with_cli_values(
        cls: type,
        data: Dict[str, Any],
        seed: Optional[int],
        overrides: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    merged: Dict[str, Any] = dict(data)
    names = {f.name for f in fields(cls)}
    if seed is not None and 'seed' in names:
        merged.setdefault('seed', seed)
    for name, value in (overrides or {}).items():
        if value is not None:
            merged[name] = value
    return merged


def out_dir_set_up(
        out_dir: str
) -> Path:
    """
    sets-up the output directory, creating it if missing
    :param out_dir: (str) output directory path
    :return: (Path) output directory
    """

    path: Path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def version_string(
) -> str:
    """
    returns the git-style version of the working tree, the package version outside a git checkout
    :return: (str) version string
    """

    try:
        described = subprocess.run(['git', 'describe', '--always', '--dirty', '--tags'], capture_output=True,
                                   text=True, timeout=5, cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return nlassopd.__version__
    if described.returncode != 0 or len(described.stdout.strip()) == 0:
        return nlassopd.__version__
    return described.stdout.strip()


def make_manifest(
        subcommand: str,
        config: Dict[str, Any],
        seed: int,
        timings: Dict[str, float]
) -> RunManifest:
    """
    builds the manifest of a CLI run
    :param subcommand: (str) CLI subcommand
    :param config: (Dict[str, Any]) full configuration echo
    :param seed: (int) random seed
    :param timings: (Dict[str, float]) seconds per phase
    :return: (RunManifest) manifest
    """

    return RunManifest(subcommand=subcommand, config=config, seed=seed, version=version_string(),
                       timings=dict(timings), created=datetime.now(timezone.utc).isoformat(timespec='seconds'))
