"""
Flat key=value pipeline configuration.

    # comment
    L = 1
    n = 256
    kernel.type = constant
    kernel.c = 0.5

Unknown keys, repeated keys and unparsable values raise ConfigError.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from fredholm_backstepping import csv_io
from fredholm_backstepping.constants import (
    CSV_FLOAT_FORMAT,
    DEFAULT_FATTORINI_TOL,
    DEFAULT_TRUNCATION,
)
from fredholm_backstepping.enums import MomentAnsatz, SimulationMode
from fredholm_backstepping.exceptions import BacksteppingError, ConfigError
from fredholm_backstepping.grid import GridSpec, make_grid
from fredholm_backstepping.kernels import SampledKernel, sample_kernel
from fredholm_backstepping.registry import get_kernel_factory, list_all_kernels

logger = logging.getLogger(__name__)

KERNEL_KEYS = ("c", "a0", "N", "file")
KERNEL_DEFAULTS = {"c": "1", "a0": "1", "N": "1", "file": ""}

INITIAL_STATES = ("sine", "bump", "constant", "zero", "file")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise ValueError(f"{text} is not positive")
    return value


def _optional_positive_float(text: str) -> Optional[float]:
    if text.strip().lower() in ("", "none", "default"):
        return None
    return _positive_float(text)


def _count(minimum: int):
    def parse(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise ValueError(f"{text} is below {minimum}")
        return value

    return parse


def _choice(*choices: str):
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in choices:
            raise ValueError(f"{text!r} is not one of {', '.join(choices)}")
        return value

    return parse


# config key -> (PipelineConfig field, parser)
_KEYS = {
    "L": ("L", _positive_float),
    "n": ("n", _count(2)),
    "N": ("N", _count(0)),
    "T": ("T", _optional_positive_float),
    "kernel.type": ("kernel_type", lambda text: text.strip().lower()),
    "u0.type": ("u0_type", _choice(*INITIAL_STATES)),
    "u0.file": ("u0_file", str.strip),
    "u0.c": ("u0_c", complex),
    "tol.fattorini": ("tol_fattorini", _positive_float),
    "tol.invert": ("tol_invert", _optional_positive_float),
    "out.dir": ("out_dir", str.strip),
    "sim.mode": ("sim_mode", SimulationMode),
    "sim.control": ("sim_control", complex),
    "moments.ansatz": ("ansatz", MomentAnsatz),
    "convergence.levels": ("convergence_levels", _count(1)),
}


@dataclass(frozen=True)
class PipelineConfig:
    L: float = 1.0
    n: int = 256
    N: int = DEFAULT_TRUNCATION
    T: Optional[float] = None
    kernel_type: str = "zero"
    kernel_params: dict = field(default_factory=lambda: dict(KERNEL_DEFAULTS))
    u0_type: str = "sine"
    u0_file: str = ""
    u0_c: complex = 1.0
    tol_fattorini: float = DEFAULT_FATTORINI_TOL
    tol_invert: Optional[float] = None
    out_dir: str = "out"
    sim_mode: SimulationMode = SimulationMode.DIRICHLET
    sim_control: complex = 0.0
    ansatz: MomentAnsatz = MomentAnsatz.FOURIER
    convergence_levels: int = 2

    @property
    def horizon(self) -> float:
        """T, defaulting to 2L (one crossing to stabilize, one to observe)."""
        return 2 * self.L if self.T is None else self.T

    def grid(self, n: Optional[int] = None) -> GridSpec:
        return make_grid(self.L, self.n if n is None else n)

    def truncation(self, n: Optional[int] = None, N: Optional[int] = None) -> int:
        """N for a grid of n cells; the moment solve needs 2N < n."""
        n = self.n if n is None else n
        N = self.N if N is None else N
        if 2 * N >= n:
            raise ConfigError(
                f"N={N} is too large for n={n}: the moment solve needs 2N < n, "
                f"set N <= {(n - 1) // 2} or n >= {2 * N + 1}"
            )
        return N

    def kernel(self, grid: GridSpec) -> SampledKernel:
        try:
            factory = get_kernel_factory(self.kernel_type)
        except KeyError:
            raise ConfigError(
                f"unknown kernel.type={self.kernel_type!r}; known: {', '.join(list_all_kernels())}"
            ) from None
        params = dict(self.kernel_params, L=self.L)
        try:
            descriptor = factory(params)
        except (ValueError, TypeError) as e:
            if isinstance(e, BacksteppingError) and not isinstance(e, ConfigError):
                raise
            raise ConfigError(f"kernel.type={self.kernel_type}: {e}") from e
        return sample_kernel(descriptor, grid)

    def initial_state(self, grid: GridSpec) -> np.ndarray:
        x, L, c = grid.nodes, self.L, self.u0_c
        if self.u0_type == "sine":
            return c * np.sin(np.pi * x / L).astype(complex)
        if self.u0_type == "bump":
            return c * np.exp(-(((x - L / 2) / (0.15 * L)) ** 2)).astype(complex)
        if self.u0_type == "constant":
            return np.full(grid.size, c, dtype=complex)
        if self.u0_type == "zero":
            return np.zeros(grid.size, dtype=complex)
        if not self.u0_file:
            raise ConfigError("u0.type=file needs u0.file")
        return csv_io.read_state(self.u0_file, grid)

    def resolved(self) -> dict:
        """Every effective parameter, defaults included, keyed as in the file."""
        values = {}
        for key, (name, _) in _KEYS.items():
            values[key] = _render(getattr(self, name))
            if key == "kernel.type":
                for param in KERNEL_KEYS:
                    values[f"kernel.{param}"] = self.kernel_params.get(param, KERNEL_DEFAULTS[param])
        values["T"] = _render(self.horizon)
        values["tol.invert"] = "default" if self.tol_invert is None else _render(self.tol_invert)
        return values


def _render(value) -> str:
    if isinstance(value, (SimulationMode, MomentAnsatz)):
        return value.value
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT % value
    if isinstance(value, complex):
        return repr(value) if value.imag else CSV_FLOAT_FORMAT % value.real
    return str(value)


def parse_config(text: str, source: str = "<config>") -> PipelineConfig:
    values = {}
    kernel_params = dict(KERNEL_DEFAULTS)
    seen = set()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_number}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{source}:{line_number}: key {key} given twice")
        seen.add(key)
        if key.startswith("kernel.") and key[len("kernel."):] in KERNEL_KEYS:
            kernel_params[key[len("kernel."):]] = value
            continue
        if key not in _KEYS:
            raise ConfigError(f"{source}:{line_number}: unknown key {key}")
        name, parser = _KEYS[key]
        try:
            values[name] = parser(value)
        except ValueError as e:
            raise ConfigError(f"{source}:{line_number}: bad value for {key}: {e}") from e
    config = PipelineConfig(kernel_params=kernel_params, **values)
    logger.debug(f"parsed {source}: {len(seen)} keys")
    return config


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, source=str(path))


def write_resolved_config(config: PipelineConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={value}\n" for key, value in config.resolved().items()]
    with path.open("w", encoding="utf-8", newline="") as f:
        f.writelines(lines)
    return path
