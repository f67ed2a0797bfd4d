from typing import Dict, Any, List, Optional, TextIO
import json
import math
import numpy as np
import pandas as pd
from nlassopd.data_types import NodeSignal, SolverHistory
from nlassopd import constants


def write_manifest_comment(
        out_file: TextIO,
        manifest_ref: Optional[str]
) -> None:
    """
    writes the '# manifest: <file>' reference line that heads every CSV and text output
    :param out_file: (TextIO) output file
    :param manifest_ref: (Optional[str]) manifest file name, nothing is written if None
    :return: (None)
    """

    if manifest_ref is not None:
        out_file.write(f'{constants.MANIFEST_COMMENT}{manifest_ref}\n')


def write_csv(
        table: pd.DataFrame,
        path: str,
        manifest_ref: Optional[str] = constants.MANIFEST_FILE,
        float_format: str = constants.FLOAT_FORMAT
) -> None:
    """
    writes a table as CSV with a fixed float format, empty cells for NaN and '\\n' line endings
    :param table: (pd.DataFrame) table
    :param path: (str) output path
    :param manifest_ref: (Optional[str]) manifest reference comment
    :param float_format: (str) printf-style float format
    :return: (None)
    """

    with open(path, 'w', newline='') as out_file:
        write_manifest_comment(out_file, manifest_ref)
        table.to_csv(out_file, index=False, float_format=float_format, na_rep='', lineterminator='\n')


def write_weights(
        w: NodeSignal,
        path: str,
        manifest_ref: Optional[str] = constants.MANIFEST_FILE,
        float_format: str = constants.FLOAT_FORMAT
) -> None:
    """
    writes a node signal as CSV with columns node_id, w_1..w_d (1-based node ids)
    :param w: (NodeSignal) node signal
    :param path: (str) output path
    :param manifest_ref: (Optional[str]) manifest reference comment
    :param float_format: (str) printf-style float format
    :return: (None)
    """

    signal: np.ndarray = np.asarray(w, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)
    table = pd.DataFrame({'node_id': np.arange(1, signal.shape[0] + 1)})
    for k in range(signal.shape[1]):
        table[f'w_{k + 1}'] = signal[:, k]
    write_csv(table, path, manifest_ref, float_format)


def write_history(
        history: SolverHistory,
        path: str,
        manifest_ref: Optional[str] = constants.MANIFEST_FILE
) -> None:
    """
    writes the solver history as CSV with columns k, objective, iterate_change, max_dual_norm
    :param history: (SolverHistory) history
    :param path: (str) output path
    :param manifest_ref: (Optional[str]) manifest reference comment
    :return: (None)
    """

    table = pd.DataFrame({
        'k': history.iterations,
        'objective': history.objectives,
        'iterate_change': history.iterate_changes,
        'max_dual_norm': history.max_dual_norms,
    })
    write_csv(table, path, manifest_ref)


def write_json(
        document: Dict[str, Any],
        path: str
) -> None:
    """
    writes a standard JSON document with sorted keys; numpy scalars and arrays are converted to plain values and
        non-finite floats to the strings "inf", "-inf" and "nan"
    :param document: (Dict[str, Any]) document
    :param path: (str) output path
    :return: (None)
    """

    with open(path, 'w') as out_file:
        json.dump(__finite_json(document), out_file, indent=2, sort_keys=True, allow_nan=False)
        out_file.write('\n')


def write_mask(
        mask: np.ndarray,
        path: str
) -> None:
    """
    writes a boolean (P, Q) mask as binary PPM, white where True
    :param mask: (np.ndarray) mask
    :param path: (str) output path
    :return: (None)
    """

    image: np.ndarray = np.repeat(np.asarray(mask, dtype=float)[:, :, None], 3, axis=2)
    write_ppm(image, path)


def write_ppm(
        image: np.ndarray,
        path: str
) -> None:
    """
    writes an image in [0, 1] as binary PPM (P6, 8 bit)
    :param image: (np.ndarray) (P, Q, 3) image
    :param path: (str) output path
    :return: (None)
    """

    pixels: np.ndarray = np.round(np.clip(np.asarray(image, dtype=float), 0.0, 1.0) * 255).astype(np.uint8)
    rows, cols = pixels.shape[0], pixels.shape[1]
    with open(path, 'wb') as out_file:
        out_file.write(f'P6\n{cols} {rows}\n255\n'.encode('ascii'))
        out_file.write(pixels.tobytes())


def write_scores(
        scores: np.ndarray,
        cols: int,
        path: str,
        manifest_ref: Optional[str] = constants.MANIFEST_FILE
) -> None:
    """
    writes per-pixel scores w^T x, the logistic probability of the foreground and the predicted label
    :param scores: (np.ndarray) score per pixel in row-major order
    :param cols: (int) image width Q
    :param path: (str) output path
    :param manifest_ref: (Optional[str]) manifest reference comment
    :return: (None)
    """

    pixel_ids: np.ndarray = np.arange(len(scores))
    table = pd.DataFrame({
        'node_id': pixel_ids + 1,
        'row': pixel_ids // cols + 1,
        'col': pixel_ids % cols + 1,
        'score': scores,
        'probability': 0.5 * (1.0 + np.tanh(np.asarray(scores, dtype=float) / 2.0)),
        'label': np.where(np.asarray(scores) > 0, 1, -1),
    })
    write_csv(table, path, manifest_ref)


def write_gnuplot_script(
        path: str,
        data_file: str,
        title: str,
        x_label: str,
        y_label: str,
        series: List[Dict[str, Any]],
        log_y: bool = False
) -> None:
    """
    writes a gnuplot script plotting columns of a CSV file
    :param path: (str) script path
    :param data_file: (str) CSV file name, relative to the script
    :param title: (str) plot title
    :param x_label: (str) x-axis label
    :param y_label: (str) y-axis label
    :param series: (List[Dict[str, Any]]) one {'x': column, 'y': column, 'title': legend, 'style': style} per curve
    :param log_y: (bool) logarithmic y-axis
    :return: (None)
    """

    plots: List[str] = [
        f"'{data_file}' using {s['x']}:{s['y']} with {s.get('style', 'linespoints')} title '{s['title']}'"
        for s in series
    ]
    with open(path, 'w') as out_file:
        out_file.write("set datafile separator ','\n")
        out_file.write('set key autotitle columnhead\n')
        out_file.write(f"set title '{title}'\n")
        out_file.write(f"set xlabel '{x_label}'\n")
        out_file.write(f"set ylabel '{y_label}'\n")
        if log_y:
            out_file.write('set logscale y\n')
        out_file.write('plot ' + ', \\\n     '.join(plots) + '\n')


def __to_plain(
        value: Any
) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f'not JSON serializable: {type(value).__name__}')


def __finite_json(
        value: Any
) -> Any:
    if isinstance(value, (np.generic, np.ndarray)):
        value = __to_plain(value)
    if isinstance(value, dict):
        return {key: __finite_json(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [__finite_json(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if value is None or isinstance(value, (str, int, float)):
        return value
    return __to_plain(value)
