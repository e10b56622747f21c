"""
CSV import and export.

Every file is UTF-8 with LF line endings and a header row; floats use
CSV_FLOAT_FORMAT so identical runs give byte-identical files. Complex values
are split into re/im columns.
"""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Optional

import numpy as np

from fredholm_backstepping.constants import CSV_FLOAT_FORMAT
from fredholm_backstepping.decorators import kernel_type
from fredholm_backstepping.exceptions import ConfigError
from fredholm_backstepping.grid import GridSpec
from fredholm_backstepping.kernels import KernelFunction, SampledKernel, Tabulated

logger = logging.getLogger(__name__)

KERNEL_HEADER = ("i", "j", "re", "im")
TRACES_HEADER = ("i", "re_minus", "im_minus", "re_plus", "im_plus")
STATE_HEADER = ("i", "re", "im")
TRAJECTORY_HEADER = ("t", "x", "re", "im")
CONTROL_HEADER = ("t", "re", "im")
EIGENPAIR_HEADER = ("k", "re_lambda", "im_lambda", "re_b", "im_b")
VERDICT_HEADER = ("k", "re_value", "im_value", "abs_value")
STATUS_HEADER = ("status", "K_max", "fails_at", "re_lambda0", "im_lambda0")
FEEDBACK_HEADER = ("j", "re_h", "im_h")
DIAGNOSTICS_HEADER = ("name", "value")
METRIC_HEADER = ("n", "N", "metric", "sigma_min", "pde_residual")


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return CSV_FLOAT_FORMAT % value
    return str(value)


def _complex_columns(value) -> tuple:
    value = complex(value)
    return format_value(value.real), format_value(value.imag)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(cell) for cell in row])
            count += 1
    logger.debug(f"wrote {count} rows to {path}")
    return path


def _read_rows(path, header: Sequence[str]) -> list:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            found = next(reader, None)
            if found is None or tuple(cell.strip() for cell in found) != tuple(header):
                raise ConfigError(f"{path}: expected header {','.join(header)}, got {found}")
            return [row for row in reader if row]
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


def _parse_float(text: str, path, line: int) -> float:
    try:
        return float(text)
    except ValueError as e:
        raise ConfigError(f"{path}:{line}: not a number: {text!r}") from e


def _parse_index(text: str, path, line: int) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise ConfigError(f"{path}:{line}: not an index: {text!r}") from e


def traces_path_for(path) -> Path:
    """Sidecar holding the diagonal traces: <stem>_traces.csv next to the kernel file."""
    path = Path(path)
    return path.with_name(f"{path.stem}_traces{path.suffix}")


def read_kernel(path, traces_path=None) -> Tabulated:
    """
    Tabulated kernel from an `i,j,re,im` file listing every node pair once.

    The traces sidecar is read when given, or when it exists next to the file.
    """
    rows = _read_rows(path, KERNEL_HEADER)
    if not rows:
        raise ConfigError(f"{path}: kernel file has no entries")
    entries = {}
    for line, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise ConfigError(f"{path}:{line}: expected 4 columns, got {len(row)}")
        key = (_parse_index(row[0], path, line), _parse_index(row[1], path, line))
        if key in entries:
            raise ConfigError(f"{path}:{line}: duplicate entry {key}")
        entries[key] = complex(_parse_float(row[2], path, line), _parse_float(row[3], path, line))
    size = max(max(key) for key in entries) + 1
    if len(entries) != size * size or min(min(key) for key in entries) < 0:
        raise ConfigError(f"{path}: expected all {size * size} entries of a {size}x{size} table")
    values = np.empty((size, size), dtype=complex)
    for (i, j), value in entries.items():
        values[i, j] = value

    if traces_path is None and traces_path_for(path).exists():
        traces_path = traces_path_for(path)
    diag_minus = diag_plus = None
    if traces_path is not None:
        diag_minus, diag_plus = _read_traces(traces_path, size)
    logger.debug(f"read_kernel {path}: size={size} traces={traces_path is not None}")
    return Tabulated(values=values, diag_minus=diag_minus, diag_plus=diag_plus, name=Path(path).stem)


def _read_traces(path, size: int) -> tuple:
    rows = _read_rows(path, TRACES_HEADER)
    if len(rows) != size:
        raise ConfigError(f"{path}: expected {size} trace rows, got {len(rows)}")
    minus = np.empty(size, dtype=complex)
    plus = np.empty(size, dtype=complex)
    for line, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise ConfigError(f"{path}:{line}: expected 5 columns, got {len(row)}")
        i = _parse_index(row[0], path, line)
        if not 0 <= i < size:
            raise ConfigError(f"{path}:{line}: node {i} outside 0..{size - 1}")
        re_m, im_m, re_p, im_p = (_parse_float(cell, path, line) for cell in row[1:])
        minus[i] = complex(re_m, im_m)
        plus[i] = complex(re_p, im_p)
    return minus, plus


def read_state(path, grid: GridSpec) -> np.ndarray:
    """Initial state from an `i,re,im` file with one row per node."""
    rows = _read_rows(path, STATE_HEADER)
    if len(rows) != grid.size:
        raise ConfigError(f"{path}: expected {grid.size} nodes, got {len(rows)}")
    state = np.empty(grid.size, dtype=complex)
    seen = set()
    for line, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise ConfigError(f"{path}:{line}: expected 3 columns, got {len(row)}")
        i = _parse_index(row[0], path, line)
        if not 0 <= i < grid.size or i in seen:
            raise ConfigError(f"{path}:{line}: bad or repeated node {i}")
        seen.add(i)
        state[i] = complex(_parse_float(row[1], path, line), _parse_float(row[2], path, line))
    return state


@kernel_type("file")
def _file_from_config(params: dict) -> KernelFunction:
    if not params.get("file"):
        raise ConfigError("kernel.type=file needs kernel.file")
    return read_kernel(params["file"])


def write_kernel(path, sk: SampledKernel) -> Path:
    """Kernel samples row-major, with the traces in the sidecar file."""
    size = sk.grid.size
    rows = (
        (i, j, *_complex_columns(sk.G[i, j]))
        for i in range(size)
        for j in range(size)
    )
    path = write_rows(path, KERNEL_HEADER, rows)
    write_rows(
        traces_path_for(path),
        TRACES_HEADER,
        (
            (i, *_complex_columns(sk.diag_minus[i]), *_complex_columns(sk.diag_plus[i]))
            for i in range(size)
        ),
    )
    return path


def write_state(path, u, grid: GridSpec) -> Path:
    return write_rows(path, STATE_HEADER, ((i, *_complex_columns(u[i])) for i in range(grid.size)))


def write_trajectory(path, traj) -> Path:
    nodes = traj.grid.nodes
    times = traj.times
    rows = (
        (float(times[m]), float(nodes[i]), *_complex_columns(traj.states[m, i]))
        for m in range(traj.M + 1)
        for i in range(traj.grid.size)
    )
    return write_rows(path, TRAJECTORY_HEADER, rows)


def write_control(path, U) -> Path:
    times = U.times
    return write_rows(
        path, CONTROL_HEADER, ((float(times[m]), *_complex_columns(U.samples[m])) for m in range(len(U)))
    )


def write_eigenpairs(path, pairs: Sequence) -> Path:
    return write_rows(
        path,
        EIGENPAIR_HEADER,
        ((pair.k, *_complex_columns(pair.lam), *_complex_columns(pair.b)) for pair in pairs),
    )


def write_verdict(path, verdict, status_path=None) -> Path:
    """Per-k values, and the one-line status record in `status_path`."""
    rows = (
        (k, *_complex_columns(value), float(abs(value)))
        for k, value in sorted(verdict.values.items())
    )
    path = write_rows(path, VERDICT_HEADER, rows)
    status_path = status_path or path.with_name(f"{path.stem}_status{path.suffix}")
    write_rows(
        status_path,
        STATUS_HEADER,
        [
            (
                verdict.status.value,
                verdict.K_max,
                " ".join(str(k) for k in sorted(verdict.failing)),
                *_complex_columns(verdict.lambda0),
            )
        ],
    )
    return path


def write_feedback(path, law) -> Path:
    return write_rows(
        path, FEEDBACK_HEADER, ((j, *_complex_columns(law.hrow[j])) for j in range(law.grid.size))
    )


def write_diagnostics(path, values: dict) -> Path:
    """One `name,value` row per entry, in the given order."""
    return write_rows(path, DIAGNOSTICS_HEADER, values.items())


def write_metric_report(path, reports: Sequence) -> Path:
    return write_rows(
        path,
        METRIC_HEADER,
        ((r.n, r.N, r.metric, r.sigma_min, r.pde_residual) for r in reports),
    )


def read_rows(path, header: Optional[Sequence[str]] = None) -> list:
    """Rows of a file written here, as lists of strings (header checked when given)."""
    if header is None:
        with Path(path).open("r", encoding="utf-8", newline="") as f:
            header = next(csv.reader(f))
    return _read_rows(path, header)
