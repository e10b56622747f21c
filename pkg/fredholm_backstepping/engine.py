"""
Pipeline stages behind the command line: each stage takes a PipelineConfig,
runs the numerical modules and returns its results; `run` also writes the
CSV artifacts of a command into the output directory.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fredholm_backstepping import csv_io
from fredholm_backstepping.closed_loop import (
    simulate_closed_loop,
    stabilization_metric,
    transform_consistency,
)
from fredholm_backstepping.config import PipelineConfig, write_resolved_config
from fredholm_backstepping.debug_utils import StageTimer
from fredholm_backstepping.enums import SimulationMode
from fredholm_backstepping.exceptions import InvalidArgumentError
from fredholm_backstepping.feedback import FeedbackLaw, feedback_kernel_h, h_equation_residual
from fredholm_backstepping.spectral import FattoriniVerdict, fattorini_check, spectrum
from fredholm_backstepping.synthesis import SynthesizedKernel, synthesize_kernel
from fredholm_backstepping.transport import StateTrajectory, simulate_dirichlet, simulate_periodic

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "spectrum", "fattorini", "synthesize", "closed-loop", "convergence")


@dataclass(frozen=True)
class ClosedLoopReport:
    n: int
    N: int
    metric: float
    sigma_min: float
    pde_residual: float
    consistency: float
    h_residual: float
    trajectory: StateTrajectory
    synthesized: SynthesizedKernel
    law: FeedbackLaw


def run_simulation(config: PipelineConfig) -> StateTrajectory:
    grid = config.grid()
    sk = config.kernel(grid)
    u0 = config.initial_state(grid)
    with StageTimer(f"simulate {config.sim_mode.value} n={grid.n}"):
        if config.sim_mode == SimulationMode.PERIODIC:
            return simulate_periodic(sk, u0, config.sim_control, config.horizon)
        return simulate_dirichlet(sk, u0, config.sim_control, config.horizon)


def run_spectrum(config: PipelineConfig) -> list:
    grid = config.grid()
    with StageTimer(f"spectrum K={max(config.N, 1)}"):
        return spectrum(config.kernel(grid), grid, K=max(config.N, 1))


def run_fattorini(config: PipelineConfig) -> FattoriniVerdict:
    grid = config.grid()
    with StageTimer("fattorini"):
        return fattorini_check(config.kernel(grid), grid, config.tol_fattorini)


def run_synthesis(config: PipelineConfig, n: Optional[int] = None, N: Optional[int] = None) -> tuple:
    """(sampled g, synthesized k*) on the grid with n cells and truncation N."""
    grid = config.grid(n)
    sk = config.kernel(grid)
    N = config.truncation(grid.n, N)
    with StageTimer(f"synthesize n={grid.n} N={N}"):
        synthesized = synthesize_kernel(sk, grid, N=N, tol=config.tol_fattorini, ansatz=config.ansatz)
    return sk, synthesized


def run_closed_loop(config: PipelineConfig, n: Optional[int] = None, N: Optional[int] = None) -> ClosedLoopReport:
    """Fattorini check, synthesis, feedback, closed-loop run and its metrics."""
    sk, synthesized = run_synthesis(config, n, N)
    grid = sk.grid
    N = config.N if N is None else N
    T = config.horizon
    if T < grid.L + grid.h:
        raise InvalidArgumentError(f"closed-loop horizon T={T} must reach L + h = {grid.L + grid.h}")
    u0 = config.initial_state(grid)
    with StageTimer(f"feedback n={grid.n}"):
        law = feedback_kernel_h(synthesized, tol=config.tol_invert)
    with StageTimer(f"closed loop n={grid.n} T={T}"):
        trajectory = simulate_closed_loop(sk, u0, law, T)
        consistency = transform_consistency(sk, synthesized, u0, law=law)
    report = ClosedLoopReport(
        n=grid.n,
        N=N,
        metric=stabilization_metric(trajectory, grid.L),
        sigma_min=law.sigma_min,
        pde_residual=synthesized.diagnostics.pde_residual,
        consistency=consistency,
        h_residual=h_equation_residual(law, sk),
        trajectory=trajectory,
        synthesized=synthesized,
        law=law,
    )
    logger.info(
        f"closed loop n={report.n} N={report.N}: metric={report.metric:.3e} "
        f"sigma_min={report.sigma_min:.3e} consistency={report.consistency:.3e}"
    )
    return report


def run_convergence(config: PipelineConfig) -> list:
    """Closed-loop reports for (n, N) doubled `convergence.levels - 1` times."""
    reports = []
    for level in range(config.convergence_levels):
        reports.append(run_closed_loop(config, config.n * 2**level, config.N * 2**level))
    return reports


def _synthesis_diagnostics(synthesized: SynthesizedKernel) -> dict:
    d = synthesized.diagnostics
    return {
        "pde_residual": d.pde_residual,
        "bc0_defect": d.bc0_defect,
        "bcL_defect": d.bcL_defect,
        "reverse_defect": d.reverse_defect,
        "re_diagonal_jump": synthesized.diagonal_jump.real,
        "im_diagonal_jump": synthesized.diagonal_jump.imag,
    }


def run(command: str, config: PipelineConfig, out_dir=None) -> list:
    """
    Run one command and write its artifacts (plus resolved-config.txt) into
    `out_dir` (default: config.out_dir). Returns the written paths.
    """
    if command not in COMMANDS:
        raise InvalidArgumentError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    out = Path(out_dir or config.out_dir)
    written = [write_resolved_config(config, out / "resolved-config.txt")]
    logger.debug(f"engine.run {command} -> {out}")

    if command == "simulate":
        written.append(csv_io.write_trajectory(out / "trajectory.csv", run_simulation(config)))
    elif command == "spectrum":
        written.append(csv_io.write_eigenpairs(out / "eigenpairs.csv", run_spectrum(config)))
    elif command == "fattorini":
        written.append(csv_io.write_verdict(out / "fattorini.csv", run_fattorini(config)))
    elif command == "synthesize":
        _, synthesized = run_synthesis(config)
        written.append(csv_io.write_kernel(out / "kernel.csv", synthesized.kernel))
        written.append(csv_io.write_control(out / "kernel_control.csv", synthesized.U))
        written.append(csv_io.write_diagnostics(out / "kernel_diagnostics.csv", _synthesis_diagnostics(synthesized)))
    elif command == "closed-loop":
        report = run_closed_loop(config)
        written.append(csv_io.write_feedback(out / "feedback.csv", report.law))
        written.append(csv_io.write_trajectory(out / "closed_loop.csv", report.trajectory))
        diagnostics = _synthesis_diagnostics(report.synthesized)
        diagnostics.update(
            sigma_min=report.sigma_min,
            h_residual=report.h_residual,
            consistency=report.consistency,
        )
        written.append(csv_io.write_diagnostics(out / "diagnostics.csv", diagnostics))
        written.append(csv_io.write_metric_report(out / "metrics.csv", [report]))
    else:
        written.append(csv_io.write_metric_report(out / "convergence.csv", run_convergence(config)))
    return written
