"""
Spectrum of the periodic adjoint operator for kernels g(x, y) = g(x).

For such kernels the eigenvalues are lambda_0 = int conj(g) and
lambda_k = 2 i k pi / L (k != 0), with eigenfunctions

    phi_0 = 1,   phi_k(x) = exp(-lambda_k x) + I_k / (lambda_k - lambda_0),
    I_k = int_0^L conj(g(x)) exp(-lambda_k x) dx,

and the system is controllable exactly when no observation value
phi_k(L) = 1 + I_k / (lambda_k - lambda_0) vanishes (Fattorini criterion).
Only finitely many k need checking because |I_k| <= sqrt(L) ||g||.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from fredholm_backstepping.conditions import HasSmallGain, IsVolterra, IsXOnly
from fredholm_backstepping.constants import (
    DEFAULT_FATTORINI_TOL,
    DEGENERACY_RTOL,
    FATTORINI_TAIL_FACTOR,
    SERIES_THRESHOLD,
)
from fredholm_backstepping.enums import FattoriniStatus
from fredholm_backstepping.exceptions import (
    DegenerateSpectrumError,
    InvalidArgumentError,
    UnsupportedKernelError,
)
from fredholm_backstepping.grid import GridSpec, l2_norm_1d, quad
from fredholm_backstepping.kernels import SampledKernel

logger = logging.getLogger(__name__)

_x_only = IsXOnly()


@dataclass(frozen=True)
class EigenPair:
    k: int
    lam: complex
    phi: np.ndarray
    b: complex  # observation value phi(L)


@dataclass(frozen=True)
class FattoriniVerdict:
    status: FattoriniStatus
    K_max: int
    values: dict = field(default_factory=dict)
    failing: frozenset = frozenset()
    lambda0: complex = 0.0

    @property
    def satisfied(self) -> bool:
        return self.status == FattoriniStatus.SATISFIED


@dataclass(frozen=True)
class SufficientConditions:
    """Which of the known sufficient conditions for controllability hold."""

    zero_kernel: bool
    small_gain: bool
    volterra: bool

    @property
    def any_holds(self) -> bool:
        return self.zero_kernel or self.small_gain or self.volterra


def w_lambda(lam: complex, x):
    """
    (1 - exp(-lam x)) / lam, and x when lam = 0.

    Uses the Taylor series x (1 - z/2 + z^2/6 - z^3/24), z = lam x, when
    |z| < SERIES_THRESHOLD.
    """
    x = np.asarray(x, dtype=float)
    z = lam * x
    small = np.abs(z) < SERIES_THRESHOLD
    series = x * (1 - z / 2 + z**2 / 6 - z**3 / 24)
    if lam == 0:
        return series.astype(complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = -np.expm1(-z) / lam
    return np.where(small, series, closed)


def eigenvalue(k: int, L: float, lambda0: Optional[complex] = None) -> complex:
    if k == 0:
        if lambda0 is None:
            raise InvalidArgumentError("lambda_0 depends on the kernel; pass lambda0")
        return complex(lambda0)
    return 2j * k * np.pi / L


def _require_x_only(sk: SampledKernel, operation: str) -> np.ndarray:
    if not _x_only(sk):
        raise UnsupportedKernelError(f"{operation} needs a kernel depending on x only, got {sk.label}")
    return sk.profile


def _resolve_grid(sk: SampledKernel, grid: Optional[GridSpec]) -> GridSpec:
    if grid is not None and grid != sk.grid:
        raise InvalidArgumentError(f"kernel sampled on {sk.grid}, operation asked on {grid}")
    return sk.grid


def lambda0_of(sk: SampledKernel) -> complex:
    """lambda_0 = int_0^L conj(g(x)) dx by quadrature."""
    g = _require_x_only(sk, "lambda_0")
    return complex(quad(np.conj(g), sk.grid.rule))


def degenerate_index(lambda0: complex, L: float) -> Optional[int]:
    """The k != 0 with lambda_k numerically equal to lambda_0, if any."""
    k = int(round(lambda0.imag * L / (2 * np.pi)))
    if k == 0:
        return None
    if abs(lambda0 - eigenvalue(k, L)) < DEGENERACY_RTOL * (1 + abs(lambda0)):
        return k
    return None


def _exponential_moment(g: np.ndarray, lam: complex, grid: GridSpec) -> complex:
    """I(lam) = int conj(g) exp(-lam x) dx."""
    return complex(quad(np.conj(g) * np.exp(-lam * grid.nodes), grid.rule))


def H_matrix(lam: complex, sk: SampledKernel, grid: Optional[GridSpec] = None) -> np.ndarray:
    """
    [[1 - e^{-lam L},      -w_lam(L)              ],
     [int conj(g) e^{-lam x}, int conj(g) w_lam(x) - 1]]

    det H(lam) = w_lam(L) (lambda_0 - lam), so for lam != lambda_0 the
    matrix is singular exactly when w_lam(L) = 0.
    """
    grid = _resolve_grid(sk, grid)
    g = _require_x_only(sk, "H_matrix")
    L = grid.L
    wL = complex(w_lambda(lam, L))
    return np.array(
        [
            [-np.expm1(-lam * L), -wL],
            [
                _exponential_moment(g, lam, grid),
                complex(quad(np.conj(g) * w_lambda(lam, grid.nodes), grid.rule)) - 1,
            ],
        ],
        dtype=complex,
    )


def _eigenfunction(k: int, g: np.ndarray, lambda0: complex, grid: GridSpec) -> tuple:
    if k == 0:
        return lambda0, np.ones(grid.size, dtype=complex)
    lam = eigenvalue(k, grid.L)
    offset = _exponential_moment(g, lam, grid) / (lam - lambda0)
    return lam, np.exp(-lam * grid.nodes) + offset


def spectrum(sk: SampledKernel, grid: Optional[GridSpec] = None, K: int = 1) -> list:
    """
    Eigenpairs for k = -K..K, in increasing k.

    Raises DegenerateSpectrumError when lambda_0 coincides with some lambda_k.
    """
    grid = _resolve_grid(sk, grid)
    g = _require_x_only(sk, "spectrum")
    if int(K) != K or K < 1:
        raise InvalidArgumentError(f"spectrum needs K >= 1, got K={K}")
    lambda0 = lambda0_of(sk)
    k_bad = degenerate_index(lambda0, grid.L)
    if k_bad is not None:
        raise DegenerateSpectrumError(f"lambda_0={lambda0} coincides with lambda_{k_bad}")
    pairs = []
    for k in range(-int(K), int(K) + 1):
        lam, phi = _eigenfunction(k, g, lambda0, grid)
        pairs.append(EigenPair(k=k, lam=lam, phi=phi, b=phi[-1]))
    logger.debug(f"spectrum {sk.label}: lambda_0={lambda0:.6g}, K={K}")
    return pairs


def eigen_residual(pair: EigenPair, sk: SampledKernel, grid: Optional[GridSpec] = None) -> float:
    """
    ||lam phi + phi' - int conj(g) phi|| + |phi(L) - phi(0)|, with phi' by
    second-order differences (one-sided at the ends).
    """
    grid = _resolve_grid(sk, grid)
    g = _require_x_only(sk, "eigen_residual")
    phi = np.asarray(pair.phi, dtype=complex)
    dphi = np.gradient(phi, grid.h, edge_order=2)
    residual = pair.lam * phi + dphi - quad(np.conj(g) * phi, grid.rule)
    return l2_norm_1d(residual, grid.rule) + abs(phi[-1] - phi[0])


def fattorini_value(k: int, sk: SampledKernel, grid: Optional[GridSpec] = None) -> complex:
    """1 + I_k / (lambda_k - lambda_0) for k != 0."""
    grid = _resolve_grid(sk, grid)
    g = _require_x_only(sk, "fattorini_value")
    if k == 0:
        raise InvalidArgumentError("the Fattorini value is defined for k != 0")
    lambda0 = lambda0_of(sk)
    lam = eigenvalue(k, grid.L)
    if abs(lam - lambda0) < DEGENERACY_RTOL * (1 + abs(lambda0)):
        raise DegenerateSpectrumError(f"lambda_0={lambda0} coincides with lambda_{k}")
    return 1 + _exponential_moment(g, lam, grid) / (lam - lambda0)


def tail_index(sk: SampledKernel) -> int:
    """
    Least K with sqrt(L) ||g|| / (2 K pi / L - |lambda_0|) < FATTORINI_TAIL_FACTOR,
    so every |k| > K has |value - 1| < 1/2.
    """
    g = _require_x_only(sk, "tail_index")
    L = sk.grid.L
    norm = l2_norm_1d(g, sk.grid.rule)
    reach = abs(lambda0_of(sk)) + np.sqrt(L) * norm / FATTORINI_TAIL_FACTOR
    return int(np.floor(L * reach / (2 * np.pi))) + 1


def fattorini_check(
    sk: SampledKernel,
    grid: Optional[GridSpec] = None,
    tol: float = DEFAULT_FATTORINI_TOL,
) -> FattoriniVerdict:
    """
    Evaluate the criterion for 0 < |k| <= K_max; beyond K_max it holds by the
    Cauchy-Schwarz tail bound.
    """
    grid = _resolve_grid(sk, grid)
    g = _require_x_only(sk, "fattorini_check")
    lambda0 = lambda0_of(sk)
    K_max = tail_index(sk)
    k_bad = degenerate_index(lambda0, grid.L)
    if k_bad is not None:
        logger.debug(f"fattorini_check {sk.label}: lambda_0 degenerate with k={k_bad}")
        return FattoriniVerdict(
            status=FattoriniStatus.DEGENERATE_LAMBDA0, K_max=K_max, lambda0=lambda0
        )
    values = {}
    for k in range(-K_max, K_max + 1):
        if k == 0:
            continue
        lam = eigenvalue(k, grid.L)
        values[k] = 1 + _exponential_moment(g, lam, grid) / (lam - lambda0)
    failing = frozenset(k for k, value in values.items() if abs(value) <= tol)
    status = FattoriniStatus.FAILS_AT if failing else FattoriniStatus.SATISFIED
    logger.debug(
        f"fattorini_check {sk.label}: K_max={K_max} status={status.value} failing={sorted(failing)}"
    )
    return FattoriniVerdict(
        status=status, K_max=K_max, values=values, failing=failing, lambda0=lambda0
    )


def sufficient_conditions(sk: SampledKernel, tol: float = 0.0) -> SufficientConditions:
    """Zero kernel, ||g|| < sqrt(2)/L, or Volterra structure: each implies the criterion."""
    return SufficientConditions(
        zero_kernel=bool(np.abs(sk.G).max(initial=0.0) <= tol),
        small_gain=HasSmallGain()(sk),
        volterra=IsVolterra(tol)(sk),
    )


def observation_margin(pairs: list) -> float:
    """delta = min |phi_k(L)| over the given pairs."""
    if not pairs:
        raise InvalidArgumentError("observation margin of an empty family")
    return float(min(abs(pair.b) for pair in pairs))


def riesz_closeness(pairs: list, grid: GridSpec) -> float:
    """
    sum_{k != 0} ||phi_k - exp(-lambda_k x)||^2 / L; finite sums that stay
    bounded as K grows indicate a Riesz basis quadratically close to the
    Fourier basis.
    """
    total = 0.0
    for pair in pairs:
        if pair.k == 0:
            continue
        deviation = pair.phi - np.exp(-pair.lam * grid.nodes)
        total += l2_norm_1d(deviation, grid.rule) ** 2
    return total / grid.L
