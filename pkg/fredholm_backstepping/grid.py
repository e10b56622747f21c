"""
Uniform space grid on [0, L] with the characteristics-aligned time step.

The transport part of u_t - u_x = F moves exactly one node per time step
because dt = h; every simulator in the package relies on this.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from fredholm_backstepping.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform grid x_i = i * h, i = 0..n, with h = L / n and dt = h.

    Only L and n are stored; h, dt and the nodes are derived so they can never
    disagree.
    """

    L: float
    n: int

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def dt(self) -> float:
        return self.h

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.arange(self.n + 1) * self.h
        nodes[-1] = self.L
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def rule(self) -> "QuadratureRule":
        return trapezoid_rule(self)

    @property
    def size(self) -> int:
        return self.n + 1

    def steps(self, T: float) -> int:
        """
        Number of time steps M with T = M * h.

        Raises InvalidArgumentError when T is not an integer multiple of h.
        """
        if T < 0:
            raise InvalidArgumentError(f"horizon must be nonnegative, got T={T}")
        M = int(round(T / self.h))
        if abs(M * self.h - T) > 1e-9 * max(1.0, T):
            raise InvalidArgumentError(
                f"horizon T={T} is not a multiple of the step h={self.h}"
            )
        return M

    def times(self, M: int) -> np.ndarray:
        return np.arange(M + 1) * self.h

    def refine(self, factor: int = 2) -> "GridSpec":
        return make_grid(self.L, self.n * factor)


@dataclass(frozen=True)
class QuadratureRule:
    """Trapezoid weights: h/2 at both endpoints, h in the interior."""

    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


def make_grid(L: float, n: int) -> GridSpec:
    """Build a GridSpec after checking L > 0 and n >= 2."""
    if not np.isfinite(L) or L <= 0:
        raise InvalidArgumentError(f"domain length must be positive, got L={L}")
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"need at least two cells, got n={n}")
    grid = GridSpec(L=float(L), n=int(n))
    logger.debug(f"make_grid L={grid.L} n={grid.n} h={grid.h}")
    return grid


def trapezoid_rule(grid: GridSpec) -> QuadratureRule:
    weights = np.full(grid.n + 1, grid.h)
    weights[0] = weights[-1] = grid.h / 2
    weights.flags.writeable = False
    return QuadratureRule(weights=weights)


def time_rule(grid: GridSpec, M: int) -> QuadratureRule:
    """Trapezoid weights on the time samples t_0..t_M (step dt = h)."""
    if M < 1:
        raise InvalidArgumentError(f"need at least one time step, got M={M}")
    weights = np.full(M + 1, grid.dt)
    weights[0] = weights[-1] = grid.dt / 2
    weights.flags.writeable = False
    return QuadratureRule(weights=weights)


def quad(values, rule: QuadratureRule) -> complex:
    """
    Integrate sampled values with the given rule: sum_i w_i * values_i.

    The last axis of `values` is the one integrated, so a stack of vectors is
    integrated row by row.
    """
    values = np.asarray(values)
    if values.shape[-1] != len(rule.weights):
        raise InvalidArgumentError(
            f"quadrature expects {len(rule.weights)} samples, got {values.shape[-1]}"
        )
    return values @ rule.weights


def l2_norm_1d(values, rule: QuadratureRule) -> float:
    """Discrete L2(0, L) norm of a sampled function."""
    values = np.asarray(values)
    return float(np.sqrt(np.real(quad(np.abs(values) ** 2, rule))))


def inner(u, v, rule: QuadratureRule) -> complex:
    """Discrete <u, v> = integral of u * conj(v)."""
    return quad(np.asarray(u) * np.conj(v), rule)
