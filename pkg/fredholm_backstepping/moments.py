"""
Truncated moment problem for periodic null control at time L.

A control U on (0, L) steers the periodic system from u0 to zero exactly when

    int_0^L m_k(t) U(t) dt = c_k,   m_k(t) = exp(-conj(lambda_k) t),
    c_k = -<u0, phi_k> / conj(phi_k(L)),

for every k. The problem is truncated at |k| <= N. For k, j != 0 the moment
functions are Fourier harmonics, so every system solved here is the identity
times L plus a border in row and column 0, solved in O(N).

When the problem is built from a state u0, the free-transport null control
-u0(t) is used as a base and only the remaining moments are truncated.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fredholm_backstepping.constants import (
    DEGENERACY_RTOL,
    GRAM_REFINEMENT_RTOL,
    GRAM_REFINEMENT_STEPS,
    GRAM_SERIES_THRESHOLD,
    OBSERVATION_TOL,
)
from fredholm_backstepping.enums import MomentAnsatz
from fredholm_backstepping.exceptions import (
    DegenerateSpectrumError,
    InvalidArgumentError,
    NotControllableError,
)
from fredholm_backstepping.grid import GridSpec, inner, quad
from fredholm_backstepping.spectral import degenerate_index, observation_margin
from fredholm_backstepping.transport import ControlSignal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentProblem:
    """
    Targets c_k, exponents lambda_k and observation values b_k for
    k = -N..N (index k + N).
    """

    N: int
    targets: np.ndarray
    exponents: np.ndarray
    observations: np.ndarray
    grid: GridSpec
    initial_state: Optional[np.ndarray] = None
    ansatz: MomentAnsatz = MomentAnsatz.FOURIER

    def __post_init__(self):
        for name in ("targets", "exponents", "observations"):
            values = np.asarray(getattr(self, name), dtype=complex)
            if values.shape != (2 * self.N + 1,):
                raise InvalidArgumentError(
                    f"{name} has shape {values.shape}, truncation N={self.N} needs {(2 * self.N + 1,)}"
                )
            object.__setattr__(self, name, values)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def index(self, k: int) -> int:
        return k + self.N

    @property
    def lambda0(self) -> complex:
        return self.exponents[self.N]

    def with_targets(self, targets) -> "MomentProblem":
        return MomentProblem(
            N=self.N,
            targets=targets,
            exponents=self.exponents,
            observations=self.observations,
            grid=self.grid,
            ansatz=self.ansatz,
        )


def moment_targets(
    u0,
    pairs: list,
    grid: GridSpec,
    ansatz: MomentAnsatz = MomentAnsatz.FOURIER,
) -> MomentProblem:
    """
    c_k = -<u0, phi_k> / conj(b_k) by quadrature.

    `pairs` must cover k = -N..N. Raises NotControllableError listing every k
    with |b_k| <= OBSERVATION_TOL.
    """
    if not pairs:
        raise InvalidArgumentError("moment_targets needs at least the k = 0 pair")
    pairs = sorted(pairs, key=lambda pair: pair.k)
    N = pairs[-1].k
    if [pair.k for pair in pairs] != list(range(-N, N + 1)):
        raise InvalidArgumentError("eigenpairs must cover k = -N..N without gaps")
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (grid.size,):
        raise InvalidArgumentError(f"initial state has shape {u0.shape}, grid needs {(grid.size,)}")
    failing = [pair.k for pair in pairs if abs(pair.b) <= OBSERVATION_TOL]
    if failing:
        raise NotControllableError(f"observation values vanish at k={failing}", failing)
    targets = np.array([-inner(u0, pair.phi, grid.rule) / np.conj(pair.b) for pair in pairs])
    logger.debug(f"moment_targets N={N} margin={observation_margin(pairs):.3e}")
    return MomentProblem(
        N=N,
        targets=targets,
        exponents=np.array([pair.lam for pair in pairs]),
        observations=np.array([pair.b for pair in pairs]),
        grid=grid,
        initial_state=u0,
        ansatz=ansatz,
    )


def moment_functions(exponents, grid: GridSpec) -> np.ndarray:
    """m_k(t_i) = exp(-conj(lambda_k) t_i) on the time grid of [0, L]; one row per k."""
    exponents = np.asarray(exponents, dtype=complex)
    return np.exp(-np.multiply.outer(np.conj(exponents), grid.nodes))


def _check_lambda0(lambda0: complex, L: float) -> None:
    k_bad = degenerate_index(lambda0, L)
    if k_bad is not None:
        raise DegenerateSpectrumError(f"lambda_0={lambda0} coincides with lambda_{k_bad}")


def _exponential_integral(mu: complex, L: float) -> complex:
    """int_0^L exp(-mu t) dt, with a series below GRAM_SERIES_THRESHOLD."""
    z = mu * L
    if abs(z) < GRAM_SERIES_THRESHOLD:
        return L * (1 - z / 2 + z**2 / 6)
    return -np.expm1(-z) / mu


def gram_matrix(exponents, grid: GridSpec, N: int) -> np.ndarray:
    """
    Gamma[k, j] = int_0^L m_j conj(m_k) dt in closed form (Hermitian).

    For k, j != 0 this is L * delta_kj; row and column 0 hold the
    exponential integrals of lambda_0 against the harmonics.
    """
    exponents = np.asarray(exponents, dtype=complex)
    if exponents.shape != (2 * N + 1,):
        raise InvalidArgumentError(f"need {2 * N + 1} exponents for N={N}, got {exponents.shape}")
    L = grid.L
    _check_lambda0(exponents[N], L)
    gram = L * np.eye(2 * N + 1, dtype=complex)
    for j, lam_j in enumerate(exponents):
        # exponent of m_j conj(m_0) is conj(lam_j) + lam_0
        gram[N, j] = _exponential_integral(np.conj(lam_j) + exponents[N], L)
        gram[j, N] = np.conj(gram[N, j])
    gram[N, N] = _exponential_integral(2 * exponents[N].real, L)
    return gram


def _basis(mp: MomentProblem, moments: np.ndarray) -> np.ndarray:
    """Ansatz functions psi_j sampled on the time grid, one row per j."""
    psi = np.conj(moments)
    if mp.ansatz == MomentAnsatz.FOURIER:
        psi[mp.N] = 1.0
    return psi


def _base_control(mp: MomentProblem) -> np.ndarray:
    if mp.initial_state is None:
        return np.zeros(mp.grid.size, dtype=complex)
    # time t_i lines up with x_i because dt = h
    return -mp.initial_state


def _bordered_solve(corner, row, column, rhs: np.ndarray, N: int, L: float) -> tuple:
    """L * a_j + column_j * a_N = rhs_j for j != N, row . a + corner * a_N = rhs_N."""
    others = np.arange(2 * N + 1) != N
    schur = corner - row @ column / L
    scale = abs(corner) + np.abs(row) @ np.abs(column) / L
    if abs(schur) <= DEGENERACY_RTOL * scale:
        raise DegenerateSpectrumError(f"moment system is singular (pivot {abs(schur):.3e})")
    a = np.empty(2 * N + 1, dtype=complex)
    a[N] = (rhs[N] - row @ rhs[others] / L) / schur
    a[others] = (rhs[others] - column * a[N]) / L
    return a, schur


def _gram_solve(mp: MomentProblem, moments: np.ndarray, psi: np.ndarray, rhs: np.ndarray) -> tuple:
    """
    Gamma^T a = rhs with the closed-form Gram matrix, then refined against the
    quadrature-assembled system until verify_moments sees round-off.
    """
    N, L, rule = mp.N, mp.grid.L, mp.grid.rule
    system = gram_matrix(mp.exponents, mp.grid, N).T
    others = np.arange(2 * N + 1) != N
    border = (system[N, N], system[N, others], system[others, N])
    a, schur = _bordered_solve(*border, rhs, N, L)
    defect = rhs - quad(moments * (a @ psi), rule)
    floor = GRAM_REFINEMENT_RTOL * (1 + np.abs(rhs).max())
    for step in range(GRAM_REFINEMENT_STEPS):
        if np.abs(defect).max() <= floor:
            break
        correction, _ = _bordered_solve(*border, defect, N, L)
        candidate = a + correction
        candidate_defect = rhs - quad(moments * (candidate @ psi), rule)
        if np.abs(candidate_defect).max() >= np.abs(defect).max():
            logger.debug(f"gram refinement stalled after {step} steps at {np.abs(defect).max():.3e}")
            break
        a, defect = candidate, candidate_defect
    return a, schur


def solve_moments(mp: MomentProblem) -> ControlSignal:
    """
    Control U = base + sum_j a_j psi_j with int m_k U = c_k for |k| <= N.

    FOURIER assembles A[k, j] = int m_k psi_j with the grid quadrature. GRAM
    solves with the closed-form Gram matrix and refines against that same
    quadrature system. Either way the returned samples meet the truncated
    moments to round-off when checked by verify_moments. Harmonics with
    |k - j| < n are orthogonal under the trapezoid rule, which is what makes
    A bordered diagonal; 2N < n is required.
    """
    grid, N = mp.grid, mp.N
    if 2 * N >= grid.n:
        raise InvalidArgumentError(
            f"truncation N={N} too large for n={grid.n} (need 2N < n, so N <= {(grid.n - 1) // 2})"
        )
    _check_lambda0(mp.lambda0, grid.L)
    rule = grid.rule
    moments = moment_functions(mp.exponents, grid)
    psi = _basis(mp, moments)
    base = _base_control(mp)
    residual_targets = mp.targets - quad(moments * base, rule)

    if mp.ansatz == MomentAnsatz.GRAM:
        a, schur = _gram_solve(mp, moments, psi, residual_targets)
    else:
        others = np.arange(2 * N + 1) != N
        corner = quad(moments[N] * psi[N], rule)
        row = quad(moments[N] * psi[others], rule)
        column = quad(moments[others] * psi[N], rule)
        a, schur = _bordered_solve(corner, row, column, residual_targets, N, grid.L)
    samples = base + a @ psi
    logger.debug(
        f"solve_moments N={N} n={grid.n} ansatz={mp.ansatz.value} pivot={abs(schur):.3e} "
        f"split={mp.initial_state is not None}"
    )
    return ControlSignal(samples=samples, grid=grid)


def verify_moments(U: ControlSignal, mp: MomentProblem) -> np.ndarray:
    """|int m_k U dt - c_k| by quadrature, for k = -N..N."""
    samples = U.samples if isinstance(U, ControlSignal) else np.asarray(U, dtype=complex)
    if samples.shape != (mp.grid.size,):
        raise InvalidArgumentError(
            f"control has {samples.shape[0]} samples, the moment problem lives on {mp.grid.size}"
        )
    moments = moment_functions(mp.exponents, mp.grid)
    return np.abs(quad(moments * samples, mp.grid.rule) - mp.targets)


def target_bound(mp: MomentProblem) -> float:
    """
    delta^-2 sum |<u0, phi_k>|^2 with delta = min |b_k|; an upper bound for
    sum |c_k|^2.
    """
    observations = np.abs(mp.observations)
    delta = observations.min()
    if delta <= 0:
        raise NotControllableError("observation margin is zero", list(mp.ks[observations <= 0]))
    projections = np.abs(mp.targets) * observations
    return float(np.sum(projections**2) / delta**2)
