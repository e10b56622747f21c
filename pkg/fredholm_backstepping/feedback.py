"""
Fredholm transformation P = Id - K, its invertibility, and the boundary
feedback Gamma u = int_0^L h(L, y) u(y) dy derived from h = -(Id - K)^-1 k.

K is discretized Nystrom style: Kmat[i, j] = w_j k(x_i, x_j), with the
diagonal taken from the one-sided traces of k.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve, norm, svdvals

from fredholm_backstepping.constants import INVERT_RTOL
from fredholm_backstepping.exceptions import InvalidArgumentError, SingularTransformError
from fredholm_backstepping.grid import GridSpec, l2_norm_1d
from fredholm_backstepping.kernels import SampledKernel
from fredholm_backstepping.synthesis import SynthesizedKernel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FredholmOp:
    """Kmat acts as u -> int k(., y) u(y) dy; Id - Kmat is the transformation."""

    Kmat: np.ndarray
    grid: GridSpec

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.eye(self.grid.size) - self.Kmat

    @cached_property
    def sigma_min(self) -> float:
        return float(svdvals(self.matrix).min())

    @cached_property
    def norm(self) -> float:
        """||Kmat||_2."""
        return float(norm(self.Kmat, 2))

    @cached_property
    def factorization(self):
        return lu_factor(self.matrix)

    @property
    def default_tol(self) -> float:
        return INVERT_RTOL * (1 + self.norm)


@dataclass(frozen=True)
class Invertibility:
    sigma_min: float
    invertible: bool
    tol: float


@dataclass(frozen=True)
class FeedbackLaw:
    """
    hrow samples h(L, y) (the trace from x > y); gamma_vector = hrow * weights,
    so that Gamma u = gamma_vector @ u.
    """

    hrow: np.ndarray
    gamma_vector: np.ndarray
    grid: GridSpec
    field: Optional[SampledKernel] = None
    sigma_min: float = float("nan")

    def apply(self, u, jump_node: int = -1, jump: complex = 0.0) -> complex:
        """
        Gamma u. `jump` = u(y+) - u(y-) across node `jump_node`, which is
        taken to store u(y+).
        """
        value = self.gamma_vector @ np.asarray(u)
        if jump != 0 and 1 <= jump_node <= self.grid.n:
            value -= (self.grid.h / 2) * jump * self.hrow[jump_node]
        return value

    @classmethod
    def zero(cls, grid: GridSpec) -> "FeedbackLaw":
        zeros = np.zeros(grid.size, dtype=complex)
        return cls(hrow=zeros, gamma_vector=zeros.copy(), grid=grid)


def _as_kernel(kernel, grid: Optional[GridSpec]) -> SampledKernel:
    if isinstance(kernel, SynthesizedKernel):
        kernel = kernel.kernel
    if isinstance(kernel, SampledKernel):
        if grid is not None and grid != kernel.grid:
            raise InvalidArgumentError(f"kernel sampled on {kernel.grid}, operator asked on {grid}")
        return kernel
    if grid is None:
        raise InvalidArgumentError("a raw kernel array needs its grid")
    values = np.asarray(kernel, dtype=complex)
    if values.shape != (grid.size, grid.size):
        raise InvalidArgumentError(
            f"kernel has shape {values.shape}, grid needs {(grid.size, grid.size)}"
        )
    return SampledKernel.from_values(values, grid, label="k")


def assemble_K(kernel, grid: Optional[GridSpec] = None, transpose_conjugate: bool = False) -> FredholmOp:
    """
    Nystrom matrix of K. With `transpose_conjugate` the input is k* and K is
    built from k(x, y) = conj(k*(y, x)).
    """
    ks = _as_kernel(kernel, grid)
    if transpose_conjugate:
        ks = ks.adjoint()
    return FredholmOp(Kmat=ks.weighted(), grid=ks.grid)


def invertibility(op: FredholmOp, tol: Optional[float] = None) -> Invertibility:
    """sigma_min(Id - Kmat) against tol (default 1e-6 (1 + ||Kmat||_2))."""
    tol = op.default_tol if tol is None else tol
    sigma_min = op.sigma_min
    invertible = sigma_min > tol
    logger.debug(f"invertibility n={op.grid.n}: sigma_min={sigma_min:.3e} tol={tol:.3e}")
    if invertible and sigma_min < 1e3 * tol:
        logger.warning(f"Id - K is close to singular: sigma_min={sigma_min:.3e}")
    return Invertibility(sigma_min=sigma_min, invertible=invertible, tol=tol)


def _require_invertible(op: FredholmOp, tol: Optional[float]) -> Invertibility:
    report = invertibility(op, tol)
    if not report.invertible:
        raise SingularTransformError(
            f"Id - K is singular: sigma_min={report.sigma_min:.3e} <= tol={report.tol:.3e}",
            report.sigma_min,
        )
    return report


def feedback_kernel_h(kstar, grid: Optional[GridSpec] = None, tol: Optional[float] = None) -> FeedbackLaw:
    """
    Solve (Id - K) h(., y_j) = -k(., y_j) for every column with one LU
    factorization, and read the feedback off the row x = L.

    h jumps across x = y by minus the jump of k; the solve stores the x > y
    value on the diagonal and adds the matching one-sided quadrature term to
    the right-hand side.
    """
    k = _as_kernel(kstar, grid).adjoint()
    grid = k.grid
    op = assemble_K(k)
    report = _require_invertible(op, tol)

    jump = -(k.diag_plus - k.diag_minus)  # h(x, x+) - h(x, x-) in x at fixed y
    rhs = -k.G.copy()
    np.fill_diagonal(rhs, -k.diag_minus)
    rhs[:, 1:] += (grid.h / 2) * k.G[:, 1:] * jump[None, 1:]
    H = lu_solve(op.factorization, rhs)

    diag_minus = np.diagonal(H).copy()
    field = SampledKernel(
        G=H,
        diag_minus=diag_minus,
        diag_plus=diag_minus + jump,
        grid=grid,
        label="h",
    )
    hrow = H[-1].copy()
    logger.debug(f"feedback_kernel_h n={grid.n}: ||hrow||={l2_norm_1d(hrow, grid.rule):.3e}")
    return FeedbackLaw(
        hrow=hrow,
        gamma_vector=hrow * grid.rule.weights,
        grid=grid,
        field=field,
        sigma_min=report.sigma_min,
    )


def h_equation_residual(H, sk: SampledKernel, grid: Optional[GridSpec] = None) -> float:
    """
    Residual of h_x + h_y - int g(s, y) h(x, s) ds + g(x, y) = 0 off the
    diagonal band, plus the boundary defects ||h(., 0)|| and ||h(., L)||.
    """
    if isinstance(H, FeedbackLaw):
        if H.field is None:
            raise InvalidArgumentError("feedback law carries no h field")
        H = H.field
    field = _as_kernel(H, grid or sk.grid)
    grid = field.grid
    h = grid.h
    derivative = (field.G[2:, 2:] - field.G[:-2, :-2]) / (2 * h)
    coupling = sk.G - field.weighted() @ sk.G
    residual = derivative + coupling[1:-1, 1:-1]
    i, j = np.indices(residual.shape)
    residual[np.abs(i - j) <= 1] = 0.0
    pde = np.sqrt(np.sum(np.abs(residual) ** 2) * h * h)
    # h(x, L) = 0 holds for x < L; at the corner use the x < y trace
    last_column = field.G[:, -1].copy()
    last_column[-1] = field.diag_plus[-1]
    return float(pde + l2_norm_1d(field.G[:, 0], grid.rule) + l2_norm_1d(last_column, grid.rule))


def transform_apply(op: FredholmOp, w, jump_node: int = -1, jump: complex = 0.0) -> np.ndarray:
    """
    u = (Id - K) w. `jump` = w(y+) - w(y-) across node `jump_node`, which is
    taken to store w(y+).
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (op.grid.size,):
        raise InvalidArgumentError(f"state has shape {w.shape}, operator needs {(op.grid.size,)}")
    Kw = op.Kmat @ w
    if jump != 0 and 1 <= jump_node <= op.grid.n:
        weight = op.grid.rule.weights[jump_node]
        Kw = Kw - (op.grid.h / 2) * jump * op.Kmat[:, jump_node] / weight
    return w - Kw


def transform_invert(op: FredholmOp, u, tol: Optional[float] = None) -> np.ndarray:
    """w = (Id - K)^-1 u; raises SingularTransformError when Id - K is singular."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (op.grid.size,):
        raise InvalidArgumentError(f"state has shape {u.shape}, operator needs {(op.grid.size,)}")
    _require_invertible(op, tol)
    return lu_solve(op.factorization, u)
