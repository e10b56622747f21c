"""
Backstepping kernel k*(x, y) for kernels g(x, y) = g(x).

k* is obtained from the auxiliary field h^(t, y) solving the Dirichlet
transport equation with source -g(y, L - t), zero initial data, and a
boundary control chosen so that h^(L, .) = 0; then k*(x, y) = conj(h^(L - x, y)).
The control splits as h^ = p + q: p is the free solution with the source, and
q is steered from 0 to -p(L) through the periodic moment method.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from fredholm_backstepping.conditions import IsXOnly
from fredholm_backstepping.constants import DEFAULT_FATTORINI_TOL, DEFAULT_TRUNCATION
from fredholm_backstepping.debug_utils import track_stage
from fredholm_backstepping.enums import FattoriniStatus, MomentAnsatz
from fredholm_backstepping.exceptions import (
    DegenerateSpectrumError,
    InvalidArgumentError,
    NotControllableError,
    UnsupportedKernelError,
)
from fredholm_backstepping.grid import GridSpec, l2_norm_1d
from fredholm_backstepping.kernels import SampledKernel
from fredholm_backstepping.moments import moment_targets, solve_moments
from fredholm_backstepping.spectral import fattorini_check, spectrum
from fredholm_backstepping.transport import (
    ControlSignal,
    SourceTerm,
    StateTrajectory,
    dirichlet_from_periodic,
    simulate_dirichlet,
    simulate_periodic,
    simulate_periodic_reverse,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelDiagnostics:
    pde_residual: float
    bc0_defect: float
    bcL_defect: float
    reverse_defect: float = 0.0


@dataclass(frozen=True)
class SynthesizedKernel:
    """
    k* on the grid (rows x, columns y) with its diagonal traces, the boundary
    data U(x) = k*(x, L) and the residual diagnostics.
    """

    kernel: SampledKernel
    U: ControlSignal
    diagnostics: KernelDiagnostics
    steering: Optional[ControlSignal] = None

    @property
    def kstar(self) -> np.ndarray:
        return self.kernel.G

    @property
    def grid(self) -> GridSpec:
        return self.kernel.grid

    @property
    def diagonal_jump(self) -> complex:
        """k*(x, x+) - k*(x, x-), constant along the diagonal."""
        return complex(self.kernel.diag_plus[0] - self.kernel.diag_minus[0])


def reverse_time(field: np.ndarray) -> np.ndarray:
    """(t, y) -> conj(field(L - t, y)) on the aligned grid; an involution."""
    return np.conj(np.asarray(field)[::-1, :])


def characteristics_solve(f, V, v0, grid: GridSpec) -> np.ndarray:
    """
    Solve v_x + v_y = f on the square along the diagonal characteristics:

        x < y:   v = V(L + x - y) - int_x^{L + x - y} f(s, s + y - x) ds
        x >= y:  v = v0(L + y - x) - int_x^{L} f(s, s + y - x) ds

    with the integrals by trapezoid over the aligned nodes.
    """
    f = np.asarray(f, dtype=complex)
    V = np.asarray(V, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    n = grid.n
    if f.shape != (n + 1, n + 1) or V.shape != (n + 1,) or v0.shape != (n + 1,):
        raise InvalidArgumentError(
            f"characteristics_solve needs f {(n + 1, n + 1)} and boundary data {(n + 1,)}, "
            f"got {f.shape}, {V.shape}, {v0.shape}"
        )
    v = np.empty_like(f)
    for d in range(-n, n + 1):
        # d = j - i; the characteristic through (i, j) visits rows first..last
        first = max(0, -d)
        rows = np.arange(first, n + 1 - max(0, d))
        along = np.diagonal(f, offset=d)
        running = cumulative_trapezoid(along, dx=grid.h, initial=0)
        tail = running[-1] - running
        boundary = V[n - d] if d > 0 else v0[n + d]
        v[rows, rows + d] = boundary - tail
    return v


def free_solution_p(sk: SampledKernel, grid: Optional[GridSpec] = None) -> StateTrajectory:
    """Dirichlet run on [0, L] from zero with U = 0 and source s(t, y) = -g(y, L - t)."""
    grid = grid or sk.grid
    source = SourceTerm(values=-sk.G[:, ::-1].T)
    return simulate_dirichlet(sk, np.zeros(grid.size), 0.0, grid.L, grid, src=source)


def _as_kernel(kernel: Union["SynthesizedKernel", SampledKernel, np.ndarray], grid: GridSpec) -> SampledKernel:
    if isinstance(kernel, SynthesizedKernel):
        return kernel.kernel
    if isinstance(kernel, SampledKernel):
        return kernel
    return SampledKernel.from_values(kernel, grid, label="k*")


def kernel_residual(kernel, sk: SampledKernel, grid: Optional[GridSpec] = None) -> KernelDiagnostics:
    """
    Residual of k*_x + k*_y + int conj(g(y, s)) k*(x, s) ds - conj(g(y, x)) = 0
    over the interior nodes off the two diagonals next to x = y, and the
    defects ||k*(0, .)|| and ||k*(L, .)||.
    """
    grid = grid or sk.grid
    ks = _as_kernel(kernel, grid)
    n, h = grid.n, grid.h
    gc = np.conj(sk.G).T
    derivative = (ks.G[2:, 2:] - ks.G[:-2, :-2]) / (2 * h)
    coupling = ks.weighted() @ gc - gc
    residual = derivative + coupling[1:-1, 1:-1]
    i, j = np.indices(residual.shape)
    residual[np.abs(i - j) <= 1] = 0.0
    pde = float(np.sqrt(np.sum(np.abs(residual) ** 2) * h * h))
    return KernelDiagnostics(
        pde_residual=pde,
        bc0_defect=l2_norm_1d(ks.G[0], grid.rule),
        bcL_defect=l2_norm_1d(ks.G[n], grid.rule),
    )


@track_stage
def synthesize_kernel(
    sk: SampledKernel,
    grid: Optional[GridSpec] = None,
    N: int = DEFAULT_TRUNCATION,
    tol: float = DEFAULT_FATTORINI_TOL,
    ansatz: MomentAnsatz = MomentAnsatz.FOURIER,
) -> SynthesizedKernel:
    """
    Build k* for an x-only kernel.

    Raises NotControllableError when the Fattorini criterion fails and
    DegenerateSpectrumError when lambda_0 collides with a harmonic.
    """
    grid = grid or sk.grid
    if grid != sk.grid:
        raise InvalidArgumentError(f"kernel sampled on {sk.grid}, synthesis asked on {grid}")
    if not IsXOnly()(sk):
        raise UnsupportedKernelError(f"kernel synthesis needs a kernel depending on x only, got {sk.label}")
    verdict = fattorini_check(sk, grid, tol)
    if verdict.status == FattoriniStatus.DEGENERATE_LAMBDA0:
        raise DegenerateSpectrumError(f"lambda_0={verdict.lambda0} coincides with a harmonic")
    if verdict.failing:
        raise NotControllableError(
            f"Fattorini criterion fails for {sk.label} at k={sorted(verdict.failing)}",
            verdict.failing,
        )

    L = grid.L
    zeros = np.zeros(grid.size, dtype=complex)
    p = free_solution_p(sk, grid)
    target = -p.final

    # S(L)^-1 target, with the periodic group run backwards
    z0 = simulate_periodic_reverse(sk, target, 0.0, L).initial
    reverse_defect = l2_norm_1d(simulate_periodic(sk, z0, 0.0, L).final - target, grid.rule)

    mp = moment_targets(-z0, spectrum(sk, grid, N), grid, ansatz)
    steering = solve_moments(mp)
    U_dir, _ = dirichlet_from_periodic(sk, zeros, steering, L)
    q = simulate_dirichlet(sk, zeros, U_dir, L)

    kstar = reverse_time(p.states + q.states)
    jump = np.conj(U_dir.samples[0])
    diag_plus = np.diagonal(kstar).copy()
    diag_plus[-1] += jump
    kernel = SampledKernel(
        G=kstar,
        diag_minus=diag_plus - jump,
        diag_plus=diag_plus,
        grid=grid,
        label=f"k*[{sk.label}]",
    )
    diagnostics = kernel_residual(kernel, sk, grid)
    diagnostics = KernelDiagnostics(
        pde_residual=diagnostics.pde_residual,
        bc0_defect=diagnostics.bc0_defect,
        bcL_defect=diagnostics.bcL_defect,
        reverse_defect=reverse_defect,
    )
    logger.debug(
        f"synthesize_kernel {sk.label} n={grid.n} N={N}: pde={diagnostics.pde_residual:.3e} "
        f"bc0={diagnostics.bc0_defect:.3e} bcL={diagnostics.bcL_defect:.3e} "
        f"reverse={reverse_defect:.3e}"
    )
    # k*(L, L) is read on the upper side of the diagonal, where U lives
    boundary = kstar[:, -1].copy()
    boundary[-1] = diag_plus[-1]
    return SynthesizedKernel(
        kernel=kernel,
        U=ControlSignal(samples=boundary, grid=grid),
        diagnostics=diagnostics,
        steering=steering,
    )
