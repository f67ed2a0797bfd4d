from typing import List, Dict, Any, Optional, Tuple
from pathlib import Path
import json
import logging
import numpy as np
import pandas as pd
from nlassopd.data_types import EmpiricalGraph, Partition, LearningInstance, NodeSignal
from nlassopd.exp_family import ExpFamilyModel, GaussianLinearModel, ScalarSignalModel, LogisticModel
from nlassopd.exceptions import NLassoError, InputFormatError
from nlassopd.result_writing import write_csv, write_manifest_comment, write_weights, write_json
from nlassopd import constants

logger = logging.getLogger(__name__)


def write_bundle(
        instance: LearningInstance,
        directory: str,
        manifest_ref: Optional[str] = constants.MANIFEST_FILE
) -> None:
    """
    writes an instance bundle: graph file, node attributes, training set and, when known, partition, true weights
        and focus cluster
    :param instance: (LearningInstance) instance
    :param directory: (str) bundle directory (created if missing)
    :param manifest_ref: (Optional[str]) manifest file name referenced from every file
    :return: (None)
    """

    root: Path = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    model: ExpFamilyModel = instance.model

    write_graph(instance.graph, model.dim, str(root / constants.GRAPH_FILE), manifest_ref)
    write_attributes(model, str(root / constants.ATTRIBUTES_FILE), instance.targets, manifest_ref)
    __write_ids(instance.training_set + 1, root / constants.TRAINING_FILE, manifest_ref)
    if instance.partition is not None:
        __write_ids(instance.partition.assignment + 1, root / constants.PARTITION_FILE, manifest_ref)
    if instance.true_weights is not None:
        write_weights(instance.true_weights, str(root / constants.TRUTH_FILE), manifest_ref,
                      constants.BUNDLE_FLOAT_FORMAT)
    if instance.focus_nodes is not None:
        __write_ids(np.asarray(instance.focus_nodes) + 1, root / constants.FOCUS_FILE, manifest_ref)

    description: Dict[str, Any] = {
        'kind': instance.kind,
        'model': model.kind,
        'node_count': instance.graph.node_count,
        'edge_count': instance.graph.edge_count,
        'dim': model.dim,
        'training_size': int(len(instance.training_set)),
        'has_partition': instance.partition is not None,
        'has_truth': instance.true_weights is not None,
        'has_focus': instance.focus_nodes is not None,
        'manifest': manifest_ref,
    }
    write_json(description, str(root / constants.BUNDLE_FILE))


def load_bundle(
        directory: str
) -> LearningInstance:
    """
    loads an instance bundle written by write_bundle (or by hand in the same layout)
    :param directory: (str) bundle directory
    :return: (LearningInstance) instance
    """

    root: Path = Path(directory)
    description: Dict[str, Any] = read_json(str(root / constants.BUNDLE_FILE))
    model_kind: str = description.get('model', constants.GAUSSIAN)
    if model_kind not in constants.MODEL_KINDS:
        raise InputFormatError(constants.MODEL_KIND_ERR.format(kinds=constants.MODEL_KINDS, kind=model_kind))

    graph, dim = read_graph(str(root / constants.GRAPH_FILE))
    model, targets = read_attributes(str(root / constants.ATTRIBUTES_FILE), model_kind)
    if model.node_count != graph.node_count or model.dim != dim:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
            path=root / constants.ATTRIBUTES_FILE, line=1,
            reason=f'attributes describe {model.node_count} nodes of dimension {model.dim}, '
                   f'graph has {graph.node_count} nodes of dimension {dim}'
        ))
    training_set: np.ndarray = read_training_set(str(root / constants.TRAINING_FILE), graph.node_count)

    partition: Optional[Partition] = None
    if (root / constants.PARTITION_FILE).is_file():
        partition = read_partition(str(root / constants.PARTITION_FILE), graph.node_count)
    true_weights: Optional[NodeSignal] = None
    if (root / constants.TRUTH_FILE).is_file():
        true_weights = read_node_table(str(root / constants.TRUTH_FILE), graph.node_count)
    focus_nodes: Optional[np.ndarray] = None
    if (root / constants.FOCUS_FILE).is_file():
        focus_nodes = read_training_set(str(root / constants.FOCUS_FILE), graph.node_count)

    return LearningInstance(graph=graph, model=model, training_set=training_set, true_weights=true_weights,
                            partition=partition, kind=description.get('kind', ''), targets=targets,
                            focus_nodes=focus_nodes)


def write_graph(
        g: EmpiricalGraph,
        dim: int,
        path: str,
        manifest_ref: Optional[str] = None
) -> None:
    """
    writes the edge-list graph file: header line "N E d", then one line "i j A_ij" per edge (1-based ids)
    :param g: (EmpiricalGraph) graph
    :param dim: (int) weight dimension d
    :param path: (str) output path
    :param manifest_ref: (Optional[str]) manifest reference comment
    :return: (None)
    """

    with open(path, 'w') as out_file:
        write_manifest_comment(out_file, manifest_ref)
        out_file.write(f'{g.node_count} {g.edge_count} {dim}\n')
        for i, j, weight in zip(g.heads, g.tails, g.weights):
            out_file.write(f'{i + 1} {j + 1} {constants.BUNDLE_FLOAT_FORMAT % weight}\n')


def read_graph(
        path: str
) -> Tuple[EmpiricalGraph, int]:
    """
    reads an edge-list graph file
    :param path: (str) graph file path
    :return: (Tuple[EmpiricalGraph, int]) graph and the weight dimension d of its header
    """

    lines: List[Tuple[int, List[str]]] = __significant_lines(path)
    if len(lines) == 0:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='missing header "N E d"'))

    header_line, header = lines[0]
    node_count, edge_count, dim = __parse_ints(path, header_line, header, 3)
    if len(lines) - 1 != edge_count:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
            path=path, line=header_line, reason=f'header announces {edge_count} edges, file has {len(lines) - 1}'
        ))

    heads: np.ndarray = np.zeros(edge_count, dtype=np.int64)
    tails: np.ndarray = np.zeros(edge_count, dtype=np.int64)
    weights: np.ndarray = np.zeros(edge_count)
    for e, (line_number, tokens) in enumerate(lines[1:]):
        if len(tokens) != 3:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=line_number,
                                                                        reason='expected "i j weight"'))
        i, j = __parse_ints(path, line_number, tokens[:2], 2)
        heads[e], tails[e] = i - 1, j - 1
        weights[e] = __parse_float(path, line_number, tokens[2])

    try:
        return EmpiricalGraph(node_count, heads, tails, weights), dim
    except NLassoError as err:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=header_line, reason=err))


def write_attributes(
        model: ExpFamilyModel,
        path: str,
        targets: Optional[np.ndarray] = None,
        manifest_ref: Optional[str] = None
) -> None:
    """
    writes the node-attribute CSV: node_id, y (empty if unobserved), x_1..x_d, sigma2 for Gaussian models
        and target (every label, held-out ones included) when known
    :param model: (ExpFamilyModel) node model
    :param path: (str) output path
    :param targets: (Optional[np.ndarray]) label of every node
    :param manifest_ref: (Optional[str]) manifest reference comment
    :return: (None)
    """

    table = pd.DataFrame({'node_id': np.arange(1, model.node_count + 1), 'y': model.labels})
    for k in range(model.dim):
        table[f'x_{k + 1}'] = model.features[:, k]
    if isinstance(model, GaussianLinearModel):
        table['sigma2'] = model.noise_variances
    if targets is not None:
        table['target'] = targets
    write_csv(table, path, manifest_ref, constants.BUNDLE_FLOAT_FORMAT)


def read_attributes(
        path: str,
        model_kind: str
) -> Tuple[ExpFamilyModel, Optional[np.ndarray]]:
    """
    reads a node-attribute CSV into a model; logistic labels may be given as {0, 1} and are mapped to {-1, +1}
    :param path: (str) attribute file path
    :param model_kind: (str) gaussian, logistic or scalar
    :return: (Tuple[ExpFamilyModel, Optional[np.ndarray]]) model and the target column if present
    """

    table: pd.DataFrame = __read_table(path)
    feature_columns: List[str] = [f'x_{k + 1}' for k in range(sum(c.startswith('x_') for c in table.columns))]
    for column in ['node_id', 'y'] + feature_columns:
        if column not in table.columns:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1,
                                                                        reason=f'missing column {column}'))
    if len(feature_columns) == 0 and model_kind != constants.SCALAR:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='no feature columns'))

    table = table.sort_values('node_id', kind='stable')
    node_ids: np.ndarray = table['node_id'].to_numpy()
    if not np.array_equal(node_ids, np.arange(1, len(table) + 1)):
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1,
                                                                    reason='node ids must be 1..N, each once'))

    labels: np.ndarray = __numeric(table, 'y', path)
    targets: Optional[np.ndarray] = __numeric(table, 'target', path) if 'target' in table.columns else None
    try:
        if model_kind == constants.SCALAR:
            variance: float = float(__numeric(table, 'sigma2', path)[0]) if 'sigma2' in table.columns else 1.0
            return ScalarSignalModel(labels, variance), targets

        features: np.ndarray = np.column_stack([__numeric(table, c, path) for c in feature_columns])
        if model_kind == constants.LOGISTIC:
            labels = np.where(labels == 0, -1.0, labels)
            return LogisticModel(features, labels), targets
        variances: Optional[np.ndarray] = __numeric(table, 'sigma2', path) if 'sigma2' in table.columns else None
        return GaussianLinearModel(features, labels, variances), targets
    except NLassoError as err:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason=err))


def read_training_set(
        path: str,
        node_count: int
) -> np.ndarray:
    """
    reads a node-id file (training set or focus cluster), one 1-based node id per line
    :param path: (str) training-set file path
    :param node_count: (int) number of nodes
    :return: (np.ndarray) sorted 0-based node ids
    """

    ids: List[int] = []
    for line_number, tokens in __significant_lines(path):
        node, = __parse_ints(path, line_number, tokens, 1)
        if not 1 <= node <= node_count:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
                path=path, line=line_number, reason=constants.NODE_RANGE_ERR.format(node=node, node_count=node_count)
            ))
        ids.append(node - 1)
    return np.unique(np.array(ids, dtype=np.int64))


def read_partition(
        path: str,
        node_count: int
) -> Partition:
    """
    reads a partition file, one 1-based cluster id per line in node order
    :param path: (str) partition file path
    :param node_count: (int) number of nodes
    :return: (Partition) partition
    """

    clusters: List[int] = []
    for line_number, tokens in __significant_lines(path):
        cluster, = __parse_ints(path, line_number, tokens, 1)
        clusters.append(cluster - 1)
    if len(clusters) != node_count:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
            path=path, line=len(clusters), reason=constants.PARTITION_SIZE_ERR.format(actual=len(clusters),
                                                                                       expected=node_count)
        ))
    try:
        return Partition(np.array(clusters, dtype=np.int64))
    except NLassoError as err:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason=err))


def read_node_table(
        path: str,
        node_count: int
) -> NodeSignal:
    """
    reads a node signal CSV with columns node_id, w_1..w_d
    :param path: (str) input path
    :param node_count: (int) number of nodes
    :return: (NodeSignal) (N, d) node signal
    """

    table: pd.DataFrame = __read_table(path).sort_values('node_id', kind='stable')
    columns: List[str] = [c for c in table.columns if c.startswith('w_')]
    if len(table) != node_count or len(columns) == 0:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
            path=path, line=1, reason=f'expected {node_count} rows with columns w_1..w_d'
        ))
    return np.column_stack([__numeric(table, c, path) for c in columns])


def read_ppm(
        path: str
) -> np.ndarray:
    """
    reads a plain (P3) or binary (P6) PPM image
    :param path: (str) image path
    :return: (np.ndarray) (P, Q, 3) image scaled to [0, 1]
    """

    if not Path(path).is_file():
        raise InputFormatError(constants.IN_FILE_NOT_EXISTS_ERR.format(path=path))
    data: bytes = Path(path).read_bytes()

    tokens: List[bytes] = []
    position: int = 0
    while len(tokens) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if position >= len(data):
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='truncated header'))
        if data[position:position + 1] == b'#':
            while position < len(data) and data[position:position + 1] not in (b'\n', b'\r'):
                position += 1
            continue
        start: int = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        tokens.append(data[start:position])

    magic: bytes = tokens[0]
    if magic not in (b'P3', b'P6'):
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='expected P3 or P6'))
    try:
        cols, rows, max_value = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='bad header values'))
    if cols <= 0 or rows <= 0 or not 0 < max_value < 65536:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='bad header values'))

    count: int = rows * cols * 3
    if magic == b'P3':
        values = data[position:].split()
        if len(values) < count:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='truncated raster'))
        raster: np.ndarray = np.array([int(v) for v in values[:count]], dtype=float)
    else:
        dtype = np.dtype('>u2') if max_value > 255 else np.dtype('u1')
        body: bytes = data[position + 1:]
        if len(body) < count * dtype.itemsize:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1, reason='truncated raster'))
        raster = np.frombuffer(body, dtype=dtype, count=count).astype(float)
    return raster.reshape(rows, cols, 3) / max_value


def read_weather_csv(
        path: str
) -> pd.DataFrame:
    """
    reads a weather-station table with columns station_id, lat, lon followed by one column per day
    :param path: (str) CSV path
    :return: (pd.DataFrame) table sorted by station id
    """

    table: pd.DataFrame = __read_table(path)
    for column in ('station_id', 'lat', 'lon'):
        if column not in table.columns:
            raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=1,
                                                                        reason=f'missing column {column}'))
    for column in table.columns:
        __numeric(table, column, path)
    return table.sort_values('station_id', kind='stable').reset_index(drop=True)


def write_weather_csv(
        table: pd.DataFrame,
        path: str,
        manifest_ref: Optional[str] = None
) -> None:
    write_csv(table, path, manifest_ref, constants.BUNDLE_FLOAT_FORMAT)


def read_json(
        path: str
) -> Dict[str, Any]:
    """
    reads a JSON object, reporting syntax errors with line and column
    :param path: (str) JSON path
    :return: (Dict[str, Any]) parsed object
    """

    if not Path(path).is_file():
        raise InputFormatError(constants.IN_FILE_NOT_EXISTS_ERR.format(path=path))
    with open(path, 'r') as in_file:
        try:
            document = json.load(in_file)
        except json.JSONDecodeError as err:
            raise InputFormatError(constants.CONFIG_JSON_ERR.format(path=path, line=err.lineno, column=err.colno,
                                                                    reason=err.msg))
    if not isinstance(document, dict):
        raise InputFormatError(constants.CONFIG_JSON_ERR.format(path=path, line=1, column=1,
                                                                reason='top-level value must be an object'))
    return document


def __read_table(
        path: str
) -> pd.DataFrame:
    if not Path(path).is_file():
        raise InputFormatError(constants.IN_FILE_NOT_EXISTS_ERR.format(path=path))
    try:
        return pd.read_csv(path, comment='#', skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line='?', reason=err))


def __numeric(
        table: pd.DataFrame,
        column: str,
        path: str
) -> np.ndarray:
    """
    returns a column as floats (empty cells become NaN), naming the first malformed row otherwise
    :param table: (pd.DataFrame) table
    :param column: (str) column name
    :param path: (str) source path, for messages
    :return: (np.ndarray) column values
    """

    values = pd.to_numeric(table[column], errors='coerce')
    bad: np.ndarray = np.flatnonzero(values.isna().to_numpy() & table[column].notna().to_numpy())
    if len(bad) > 0:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(
            path=path, line=f'data row {bad[0] + 1}', reason=f'column {column} is not numeric'
        ))
    return values.to_numpy(dtype=float)


def __write_ids(
        ids: np.ndarray,
        path: Path,
        manifest_ref: Optional[str]
) -> None:
    with open(path, 'w') as out_file:
        write_manifest_comment(out_file, manifest_ref)
        out_file.writelines(f'{int(i)}\n' for i in ids)


def __significant_lines(
        path: str
) -> List[Tuple[int, List[str]]]:
    """
    reads a whitespace-separated text file, skipping blank and '#' comment lines
    :param path: (str) file path
    :return: (List[Tuple[int, List[str]]]) 1-based line number and tokens of every significant line
    """

    if not Path(path).is_file():
        raise InputFormatError(constants.IN_FILE_NOT_EXISTS_ERR.format(path=path))
    lines: List[Tuple[int, List[str]]] = []
    with open(path, 'r') as in_file:
        for line_number, line in enumerate(in_file, start=1):
            stripped: str = line.strip()
            if len(stripped) == 0 or stripped.startswith('#'):
                continue
            lines.append((line_number, stripped.split()))
    return lines


def __parse_ints(
        path: str,
        line_number: int,
        tokens: List[str],
        count: int
) -> List[int]:
    if len(tokens) != count:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=line_number,
                                                                    reason=f'expected {count} integer(s)'))
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=line_number,
                                                                    reason='expected integers'))


def __parse_float(
        path: str,
        line_number: int,
        token: str
) -> float:
    try:
        return float(token)
    except ValueError:
        raise InputFormatError(constants.IN_FILE_FORMAT_ERR.format(path=path, line=line_number,
                                                                    reason=f'not a number: {token}'))
