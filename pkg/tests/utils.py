"""
Utility functions and helpers for testing fredholm-backstepping.
"""

from functools import lru_cache

import numpy as np

from fredholm_backstepping.config import PipelineConfig
from fredholm_backstepping.engine import run_closed_loop, run_synthesis
from fredholm_backstepping.grid import GridSpec, l2_norm_1d, make_grid
from fredholm_backstepping.kernels import Constant, sample_kernel


def smooth_state(grid: GridSpec, seed: int = 0) -> np.ndarray:
    """Random complex combination of a few low cosine and sine modes."""
    rng = np.random.default_rng(seed)
    x = grid.nodes / grid.L
    state = np.zeros(grid.size, dtype=complex)
    for j in range(5):
        a, b, c, d = rng.normal(size=4) / (1 + j * j)
        state += (a + 1j * b) * np.cos(j * np.pi * x) + (c + 1j * d) * np.sin((j + 1) * np.pi * x)
    return state


def smooth_kernel_values(grid: GridSpec, scale: float = 1.0) -> np.ndarray:
    """A smooth complex kernel that depends on both variables."""
    X, Y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    return scale * (np.cos(2 * X) * np.sin(Y + 0.3) + 0.5j * X * Y)


def sine_state(grid: GridSpec) -> np.ndarray:
    return np.sin(np.pi * grid.nodes / grid.L).astype(complex)


def relative_error(a, b, grid: GridSpec) -> float:
    scale = l2_norm_1d(b, grid.rule)
    return l2_norm_1d(np.asarray(a) - np.asarray(b), grid.rule) / scale


def constant_kernel(c: complex, n: int, L: float = 1.0):
    return sample_kernel(Constant(c=c), make_grid(L, n))


def pipeline_config(c: float = 0.5, n: int = 64, N: int = 8, **overrides) -> PipelineConfig:
    params = {"c": str(c), "a0": "1", "N": "1", "file": ""}
    return PipelineConfig(L=1.0, n=n, N=N, T=2.0, kernel_type="constant", kernel_params=params, **overrides)


@lru_cache(maxsize=None)
def synthesized(c: float, n: int, N: int):
    """(sampled g, synthesized k*) for g = Constant(c) on [0, 1], shared between tests."""
    return run_synthesis(pipeline_config(c, n, N))


@lru_cache(maxsize=None)
def closed_loop(c: float, n: int, N: int):
    """ClosedLoopReport for g = Constant(c), u0 = sin(pi x), T = 2, shared between tests."""
    return run_closed_loop(pipeline_config(c, n, N))
