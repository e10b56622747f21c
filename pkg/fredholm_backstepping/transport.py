"""
Characteristic marching for

    u_t(t, x) - u_x(t, x) = int_0^L g(x, y) u(t, y) dy + s(t, x),   x in (0, L)

with a Dirichlet boundary u(t, L) = U(t) or the periodic-jump closure
u(t, L) - u(t, 0) = U(t).

On the aligned grid (dt = h) the characteristic x(t) = x0 - t moves exactly
one node per step, so only the integral term is approximated, by one
predictor-corrector (Heun) pass.

Corner handling: when the data at x = L disagrees with the boundary value at
t = 0, the solution carries a jump along the characteristic x = L - t. The
node on that characteristic stores the boundary-side value (so a constant
boundary value sweeps the whole domain), and the integral term uses the
one-sided trapezoid contributions there, which keeps the scheme second order.
Under the periodic closure the jump leaves at x = 0 and re-enters at x = L
after every crossing; the reported state at t = kL holds the interior-side
value at node n, the only side inside the domain.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from fredholm_backstepping.constants import LONG_HORIZON_CROSSINGS
from fredholm_backstepping.exceptions import InvalidArgumentError
from fredholm_backstepping.grid import GridSpec, l2_norm_1d, quad, time_rule
from fredholm_backstepping.kernels import SampledKernel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControlSignal:
    """Boundary input sampled at t_m = m * h, m = 0..M."""

    samples: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))
        if self.samples.ndim != 1 or len(self.samples) < 1:
            raise InvalidArgumentError("control samples must be a non-empty vector")

    @property
    def M(self) -> int:
        return len(self.samples) - 1

    @property
    def T(self) -> float:
        return self.M * self.grid.dt

    @property
    def times(self) -> np.ndarray:
        return self.grid.times(self.M)

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def constant(cls, grid: GridSpec, T: float, value: complex = 0.0) -> "ControlSignal":
        return cls(samples=np.full(grid.steps(T) + 1, value, dtype=complex), grid=grid)

    @classmethod
    def zeros(cls, grid: GridSpec, T: float) -> "ControlSignal":
        return cls.constant(grid, T, 0.0)


@dataclass(frozen=True)
class SourceTerm:
    """s(t_m, x_i) as an (M + 1) x (n + 1) array."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))


@dataclass(frozen=True)
class StateTrajectory:
    """u(t_m, x_i) for m = 0..M; states[0] is the initial data as supplied."""

    states: np.ndarray
    grid: GridSpec
    T: float

    @property
    def M(self) -> int:
        return self.states.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.grid.times(self.M)

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t: float) -> np.ndarray:
        return self.states[self.grid.steps(t)]

    def norms(self) -> np.ndarray:
        """Discrete L2(0, L) norm of every state."""
        w = self.grid.rule.weights
        return np.sqrt(np.abs(np.abs(self.states) ** 2 @ w))


class CharacteristicMarcher:
    """
    One predictor-corrector step of the characteristic scheme, shared by the
    open-loop, periodic, reversed and closed-loop simulators. Boundary
    closures are left to the callers.
    """

    def __init__(self, sk: SampledKernel, src: Optional[SourceTerm] = None):
        self.grid = sk.grid
        self.n = sk.grid.n
        self.h = sk.grid.h
        self.G = sk.G
        self.Gw = sk.weighted()
        self.src = None if src is None else src.values

    def forcing(self, u: np.ndarray, m: int, jump_node: int = -1, jump: complex = 0.0) -> np.ndarray:
        """
        F(t_m, .) = int g(., y) u(y) dy + s(t_m, .).

        `jump` is u(x+) - u(x-) across node `jump_node`, which stores u(x+).
        """
        F = self.Gw @ u
        if self.src is not None:
            F = F + self.src[m]
        if jump != 0 and 1 <= jump_node <= self.n:
            F = F - (self.h / 2) * jump * self.G[:, jump_node]
        return F

    def predict(self, u: np.ndarray, F: np.ndarray) -> np.ndarray:
        """Euler predictor on nodes 0..n-1; node n is left to the closure."""
        P = np.zeros_like(u)
        P[:-1] = u[1:] + self.h * F[1:]
        return P

    def correct(self, u: np.ndarray, F: np.ndarray, Ft: np.ndarray) -> np.ndarray:
        new = np.zeros_like(u)
        new[:-1] = u[1:] + (self.h / 2) * (F[1:] + Ft[:-1])
        return new

    def predict_backward(self, u: np.ndarray, F: np.ndarray) -> np.ndarray:
        """Reversed-time predictor on nodes 1..n; node 0 is left to the closure."""
        P = np.zeros_like(u)
        P[1:] = u[:-1] - self.h * F[:-1]
        return P

    def correct_backward(self, u: np.ndarray, F: np.ndarray, Ft: np.ndarray) -> np.ndarray:
        new = np.zeros_like(u)
        new[1:] = u[:-1] - (self.h / 2) * (F[:-1] + Ft[1:])
        return new


def resolve_grid(sk: SampledKernel, grid: Optional[GridSpec]) -> GridSpec:
    if grid is not None and grid != sk.grid:
        raise InvalidArgumentError(f"kernel sampled on {sk.grid}, simulation asked on {grid}")
    return sk.grid


def as_state(u0, grid: GridSpec, name: str = "initial state") -> np.ndarray:
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (grid.size,):
        raise InvalidArgumentError(f"{name} has shape {u0.shape}, grid needs {(grid.size,)}")
    return u0


def _control(U: Union[ControlSignal, np.ndarray, complex, None], grid: GridSpec, M: int) -> np.ndarray:
    if U is None:
        return np.zeros(M + 1, dtype=complex)
    if isinstance(U, ControlSignal):
        samples = U.samples
    elif np.isscalar(U):
        return np.full(M + 1, U, dtype=complex)
    else:
        samples = np.asarray(U, dtype=complex)
    if samples.shape != (M + 1,):
        raise InvalidArgumentError(f"control has {samples.shape[0]} samples, horizon needs {M + 1}")
    return samples


def _source(src: Optional[SourceTerm], grid: GridSpec, M: int) -> Optional[SourceTerm]:
    if src is None:
        return None
    if src.values.shape != (M + 1, grid.size):
        raise InvalidArgumentError(
            f"source has shape {src.values.shape}, trajectory needs {(M + 1, grid.size)}"
        )
    return src


def horizon_steps(grid: GridSpec, T: float, name: str) -> int:
    M = grid.steps(T)
    if M > LONG_HORIZON_CROSSINGS * grid.n:
        logger.warning(f"{name}: horizon T={T} spans {M / grid.n:.0f} domain crossings")
    return M


def simulate_dirichlet(
    sk: SampledKernel,
    u0,
    U,
    T: float,
    grid: Optional[GridSpec] = None,
    src: Optional[SourceTerm] = None,
) -> StateTrajectory:
    """
    Open-loop run with u(t, L) = U(t).

    `U` is a ControlSignal, an array of M + 1 samples or a scalar; states[m][n]
    equals U_m for every m >= 1.
    """
    grid = resolve_grid(sk, grid)
    M = horizon_steps(grid, T, "simulate_dirichlet")
    u0 = as_state(u0, grid)
    b = _control(U, grid, M)
    marcher = CharacteristicMarcher(sk, _source(src, grid, M))
    n, h = grid.n, grid.h
    logger.debug(f"simulate_dirichlet kernel={sk.label} n={n} M={M} source={src is not None}")

    states = np.empty((M + 1, n + 1), dtype=complex)
    states[0] = u0
    u = u0.copy()
    u[-1] = b[0]
    jump = b[0] - u0[-1]
    for m in range(M):
        F = marcher.forcing(u, m, n - m, jump)
        P = marcher.predict(u, F)
        P[-1] = b[m + 1]
        Ft = marcher.forcing(P, m + 1, n - m - 1, jump)
        u = marcher.correct(u, F, Ft)
        u[-1] = b[m + 1]
        states[m + 1] = u
    return StateTrajectory(states=states, grid=grid, T=M * h)


def simulate_periodic(
    sk: SampledKernel,
    u0,
    U,
    T: float,
    grid: Optional[GridSpec] = None,
    src: Optional[SourceTerm] = None,
) -> StateTrajectory:
    """
    Run with the jump closure u(t, L) = u(t, 0) + U(t).

    Node n enters the integral term of node 0's corrector, so the closure is
    resolved as a scalar linear equation instead of by lagging it; with that
    choice simulate_dirichlet driven by dirichlet_from_periodic reproduces the
    run over one crossing.

    The corner jump u0(0) + U(0) - u0(L) is tracked for the whole horizon: it
    reaches x = 0 at t = L and re-enters at x = L. At t = kL, node n of the
    returned state is u(kL-, 0) + U(kL).
    """
    grid = resolve_grid(sk, grid)
    M = horizon_steps(grid, T, "simulate_periodic")
    u0 = as_state(u0, grid)
    jumps = _control(U, grid, M)
    marcher = CharacteristicMarcher(sk, _source(src, grid, M))
    n, h = grid.n, grid.h
    coupling = marcher.Gw[:, -1]
    logger.debug(f"simulate_periodic kernel={sk.label} n={n} M={M}")

    states = np.empty((M + 1, n + 1), dtype=complex)
    states[0] = u0
    u = u0.copy()
    u[-1] = u0[0] + jumps[0]
    jump = u[-1] - u0[-1]
    for m in range(M):
        F = marcher.forcing(u, m, n - m % n, jump)
        P = marcher.predict(u, F)
        Ft = marcher.forcing(P, m + 1, n - (m + 1) % n, jump)
        z = (u[1] + (h / 2) * (F[1] + Ft[0] + coupling[0] * jumps[m + 1])) / (
            1 - (h / 2) * coupling[0]
        )
        P[-1] = z + jumps[m + 1]
        Ft = Ft + coupling * P[-1]
        u = marcher.correct(u, F, Ft)
        u[0] = z
        u[-1] = z + jumps[m + 1]
        states[m + 1] = u
        if (m + 1) % n == 0:
            # the front is back on node n, which keeps the boundary side for marching
            states[m + 1, -1] -= jump
    return StateTrajectory(states=states, grid=grid, T=M * h)


def simulate_periodic_reverse(
    sk: SampledKernel,
    uT,
    U,
    T: float,
    grid: Optional[GridSpec] = None,
) -> StateTrajectory:
    """
    March the periodic system backwards from u(T) = uT.

    Returns the trajectory in forward time order: states[-1] is uT and
    states[0] the recovered initial state, so that simulate_periodic from
    states[0] approximately lands on uT again (second-order consistent, not
    exact).
    """
    grid = resolve_grid(sk, grid)
    M = horizon_steps(grid, T, "simulate_periodic_reverse")
    uT = as_state(uT, grid, "terminal state")
    jumps = _control(U, grid, M)
    marcher = CharacteristicMarcher(sk)
    n, h = grid.n, grid.h
    coupling = marcher.Gw[:, 0]
    logger.debug(f"simulate_periodic_reverse kernel={sk.label} n={n} M={M}")

    states = np.empty((M + 1, n + 1), dtype=complex)
    states[M] = uT
    u = uT.copy()
    # node 0 of uT travels right; its mismatch with the closure is a jump
    jump = uT[0] - (uT[-1] - jumps[M])
    for m in range(M, 0, -1):
        F = marcher.forcing(u, m, M - m, jump)
        P = marcher.predict_backward(u, F)
        Ft = marcher.forcing(P, m - 1, M - m + 1, jump)
        z = (u[-2] - (h / 2) * (F[-2] + Ft[-1] - coupling[-1] * jumps[m - 1])) / (
            1 + (h / 2) * coupling[-1]
        )
        P[0] = z - jumps[m - 1]
        Ft = Ft + coupling * P[0]
        u = marcher.correct_backward(u, F, Ft)
        u[-1] = z
        u[0] = z - jumps[m - 1]
        states[m - 1] = u
    if M == n:
        # the jump sits on node n at t = 0; store the interior-side value there
        states[0, -1] -= jump
    return StateTrajectory(states=states, grid=grid, T=M * h)


def trace_at_zero(traj: StateTrajectory) -> ControlSignal:
    """m -> u(t_m, 0)."""
    return ControlSignal(samples=traj.states[:, 0].copy(), grid=traj.grid)


def dirichlet_from_periodic(
    sk: SampledKernel,
    u0,
    U,
    T: float,
    grid: Optional[GridSpec] = None,
) -> tuple:
    """
    Dirichlet control reproducing a periodic run: U_dir(t) = u(t, 0) + U(t).

    At t = kL, k >= 1, the trace at 0 jumps and the sample takes its left
    limit, which is node n of the periodic state. The Dirichlet re-run is then
    exact up to t = L; past L it no longer sees the corner jump.

    Returns (U_dir, periodic trajectory).
    """
    traj = simulate_periodic(sk, u0, U, T, grid)
    n = traj.grid.n
    jumps = _control(U, traj.grid, traj.M)
    samples = trace_at_zero(traj).samples + jumps
    samples[n::n] = traj.states[n::n, -1]
    U_dir = ControlSignal(samples=samples, grid=traj.grid)
    return U_dir, traj


def trace_constant(traj: StateTrajectory, U=None) -> float:
    """
    ||u(., 0)||^2_{L2(0,T)} / (||u(0)||^2 + ||U||^2_{L2(0,T)}).

    Zero data gives 0.
    """
    if traj.M < 1:
        raise InvalidArgumentError("trace constant needs at least one time step")
    rule_t = time_rule(traj.grid, traj.M)
    jumps = _control(U, traj.grid, traj.M)
    trace = trace_at_zero(traj).samples
    numerator = np.real(quad(np.abs(trace) ** 2, rule_t))
    denominator = l2_norm_1d(traj.initial, traj.grid.rule) ** 2 + np.real(
        quad(np.abs(jumps) ** 2, rule_t)
    )
    if denominator == 0:
        return 0.0
    return float(numerator / denominator)
