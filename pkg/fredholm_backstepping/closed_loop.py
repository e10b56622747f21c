"""
Closed-loop runs under u(t, L) = Gamma u(t), the finite-time stabilization
metric, and the check of u = (Id - K) w against the target system.
"""

import logging
from typing import Optional

import numpy as np

from fredholm_backstepping.exceptions import InvalidArgumentError
from fredholm_backstepping.feedback import (
    FeedbackLaw,
    assemble_K,
    feedback_kernel_h,
    transform_apply,
    transform_invert,
)
from fredholm_backstepping.grid import GridSpec, l2_norm_1d
from fredholm_backstepping.kernels import SampledKernel, Zero, sample_kernel
from fredholm_backstepping.transport import (
    CharacteristicMarcher,
    StateTrajectory,
    as_state,
    horizon_steps,
    resolve_grid,
    simulate_dirichlet,
)

logger = logging.getLogger(__name__)


def _closure(law: FeedbackLaw, u: np.ndarray, boundary: complex, jump_node: int, jump: complex) -> complex:
    """Gamma of u with node n set to `boundary`, then one fixed-point pass."""
    trial = u.copy()
    trial[-1] = boundary
    first = law.apply(trial, jump_node, jump)
    trial[-1] = first
    return law.apply(trial, jump_node, jump)


def simulate_closed_loop(
    sk: SampledKernel,
    u0,
    law: FeedbackLaw,
    T: float,
    grid: Optional[GridSpec] = None,
) -> StateTrajectory:
    """
    Same interior marching as simulate_dirichlet, with the boundary value at
    every stage taken from the feedback applied to that stage's state.
    """
    grid = resolve_grid(sk, grid)
    if law.grid != grid:
        raise InvalidArgumentError(f"feedback built on {law.grid}, simulation asked on {grid}")
    M = horizon_steps(grid, T, "simulate_closed_loop")
    u0 = as_state(u0, grid)
    marcher = CharacteristicMarcher(sk)
    n = grid.n
    logger.debug(f"simulate_closed_loop kernel={sk.label} n={n} M={M}")

    states = np.empty((M + 1, n + 1), dtype=complex)
    states[0] = u0
    u = u0.copy()
    u[-1] = law.apply(u0)
    jump = u[-1] - u0[-1]
    for m in range(M):
        F = marcher.forcing(u, m, n - m, jump)
        P = marcher.predict(u, F)
        P[-1] = _closure(law, P, u[-1], n - m - 1, jump)
        Ft = marcher.forcing(P, m + 1, n - m - 1, jump)
        new = marcher.correct(u, F, Ft)
        new[-1] = _closure(law, new, P[-1], n - m - 1, jump)
        u = new
        states[m + 1] = u
    return StateTrajectory(states=states, grid=grid, T=M * grid.h)


def stabilization_metric(traj: StateTrajectory, L: Optional[float] = None) -> float:
    """max over t_m in [L, T] of ||u(t_m)|| / ||u(0)||; 0 for a zero initial state."""
    grid = traj.grid
    L = grid.L if L is None else L
    if traj.M < grid.steps(L) + 1:
        raise InvalidArgumentError(f"horizon T={traj.T} is shorter than L + h = {L + grid.h}")
    norms = traj.norms()
    if norms[0] == 0:
        return 0.0
    return float(norms[grid.steps(L):].max() / norms[0])


def transform_consistency(
    sk: SampledKernel,
    kstar,
    u0,
    grid: Optional[GridSpec] = None,
    law: Optional[FeedbackLaw] = None,
) -> float:
    """
    Evolve w0 = (Id - K)^-1 u0 by the target system and compare (Id - K) w(t)
    with the closed-loop u(t) over [0, L]; returns the largest discrepancy
    relative to ||u0||.
    """
    grid = resolve_grid(sk, grid)
    u0 = as_state(u0, grid)
    op = assemble_K(kstar, grid, transpose_conjugate=True)
    law = law or feedback_kernel_h(kstar, grid)
    w0 = transform_invert(op, u0)

    L = grid.L
    u = simulate_closed_loop(sk, u0, law, L)
    w = simulate_dirichlet(sample_kernel(Zero(), grid), w0, 0.0, L)
    scale = l2_norm_1d(u0, grid.rule)
    if scale == 0:
        return 0.0

    n = grid.n
    jump = -w0[-1]
    worst = 0.0
    for m in range(w.M + 1):
        # states[0] holds w0 as given; later states store the boundary side
        if m == 0:
            image = transform_apply(op, w.states[0])
        else:
            image = transform_apply(op, w.states[m], n - m, jump)
        worst = max(worst, l2_norm_1d(image - u.states[m], grid.rule) / scale)
    logger.debug(f"transform_consistency {sk.label} n={n}: discrepancy={worst:.3e}")
    return float(worst)
