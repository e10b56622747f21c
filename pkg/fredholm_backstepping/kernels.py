"""
Integral kernels g(x, y) of the transport equation and their samples.

A KernelFunction is a descriptor (zero, constant, x-only, separable,
tabulated, Volterra-masked); sampling it on a GridSpec gives a SampledKernel,
the dense complex array every numerical module works with. The two one-sided
diagonal traces g_-(x, x) (from x > y) and g_+(x, x) (from x < y) are stored
explicitly because a pointwise sample cannot recover them for kernels that
jump across the diagonal.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from fredholm_backstepping.constants import ROUGHNESS_WARNING_LEVEL
from fredholm_backstepping.decorators import kernel_type
from fredholm_backstepping.exceptions import InvalidArgumentError
from fredholm_backstepping.grid import GridSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledKernel:
    """
    G[i, j] ~ g(x_i, x_j) on the grid, plus the two diagonal traces.

    `x_only` and `volterra` record the structure of the descriptor the sample
    came from; spectral and synthesis code relies on `x_only`.
    """

    G: np.ndarray
    diag_minus: np.ndarray
    diag_plus: np.ndarray
    grid: GridSpec
    x_only: bool = False
    volterra: bool = False
    label: str = ""

    @property
    def profile(self) -> np.ndarray:
        """g(x_i) for an x-only kernel (first column of G)."""
        return self.G[:, 0]

    @property
    def diagonal_jump(self) -> np.ndarray:
        """g_-(x, x) - g_+(x, x) along the diagonal."""
        return self.diag_minus - self.diag_plus

    def weighted(self) -> np.ndarray:
        """
        Nystrom matrix A[i, j] = w_j g(x_i, x_j), so that A @ u ~ int g(x_i, y) u(y) dy.

        On the diagonal the row integral crosses y = x_i: interior nodes take
        the mean of the two traces, node 0 the T+ trace (the cell [0, h] lies
        in y > x) and node n the T- trace.
        """
        weights = self.grid.rule.weights
        A = self.G * weights[None, :]
        diagonal = (self.diag_minus + self.diag_plus) / 2
        diagonal[0] = self.diag_plus[0]
        diagonal[-1] = self.diag_minus[-1]
        np.fill_diagonal(A, diagonal * weights)
        return A

    def adjoint(self) -> "SampledKernel":
        """Samples of conj(g(y, x)); the T- and T+ traces swap."""
        return replace(
            self,
            G=np.conj(self.G.T),
            diag_minus=np.conj(self.diag_plus),
            diag_plus=np.conj(self.diag_minus),
            x_only=False,
            volterra=False,
            label=f"adjoint({self.label})",
        )

    @classmethod
    def from_values(cls, values, grid: GridSpec, label: str = "tabulated") -> "SampledKernel":
        """Wrap a square array; both traces are the diagonal samples."""
        return sample_kernel(Tabulated(values=values, name=label), grid)

    def scaled(self, c: complex) -> "SampledKernel":
        return replace(
            self,
            G=c * self.G,
            diag_minus=c * self.diag_minus,
            diag_plus=c * self.diag_plus,
            label=f"{c}*{self.label}",
        )


class KernelFunction:
    """
    Base descriptor. Subclasses implement `evaluate` on broadcast arrays.
    """

    x_only = False
    volterra = False

    def evaluate(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def diagonal_traces(self, grid: GridSpec) -> Optional[tuple]:
        """One-sided diagonal limits, or None when g is continuous there."""
        return None

    @property
    def label(self) -> str:
        return type(self).__name__

    def sample(self, grid: GridSpec) -> SampledKernel:
        X, Y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
        G = np.asarray(self.evaluate(X, Y), dtype=complex)
        G = np.broadcast_to(G, X.shape).copy()
        traces = self.diagonal_traces(grid)
        if traces is None:
            diag = np.diagonal(G).copy()
            traces = (diag, diag.copy())
        diag_minus, diag_plus = (np.asarray(t, dtype=complex) for t in traces)
        return SampledKernel(
            G=G,
            diag_minus=diag_minus,
            diag_plus=diag_plus,
            grid=grid,
            x_only=self.x_only,
            volterra=self.volterra,
            label=self.label,
        )

    def __call__(self, x, y):
        return self.evaluate(np.asarray(x), np.asarray(y))


@dataclass(frozen=True)
class Zero(KernelFunction):
    # g = 0 is x-only (and Volterra) trivially
    x_only = True
    volterra = True

    def evaluate(self, X, Y):
        return np.zeros(np.broadcast(X, Y).shape, dtype=complex)


@dataclass(frozen=True)
class Constant(KernelFunction):
    c: complex = 1.0
    x_only = True

    def evaluate(self, X, Y):
        return np.full(np.broadcast(X, Y).shape, self.c, dtype=complex)

    @property
    def label(self) -> str:
        return f"Constant({self.c})"


@dataclass(frozen=True)
class XOnly(KernelFunction):
    """
    g(x, y) = g(x). `g` is a vectorised callable of x, or an array of the
    n + 1 nodal values.
    """

    g: Union[Callable, np.ndarray] = None
    name: str = "XOnly"
    x_only = True

    def evaluate(self, X, Y):
        X, Y = np.broadcast_arrays(X, Y)
        if callable(self.g):
            return np.asarray(self.g(X), dtype=complex)
        values = np.asarray(self.g, dtype=complex)
        if values.shape[0] != X.shape[0]:
            raise InvalidArgumentError(
                f"tabulated x-only kernel has {values.shape[0]} values, grid has {X.shape[0]} nodes"
            )
        if X.ndim == 1:
            return values.copy()
        return np.broadcast_to(values[:, None], X.shape)

    @property
    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class Separable(KernelFunction):
    """g(x, y) = f(x) * q(y)."""

    f: Callable = None
    q: Callable = None

    def evaluate(self, X, Y):
        return np.asarray(self.f(X), dtype=complex) * np.asarray(self.q(Y), dtype=complex)


@dataclass(frozen=True)
class Tabulated(KernelFunction):
    """
    Values given directly on the grid, with optional one-sided diagonal traces.
    """

    values: np.ndarray = None
    diag_minus: Optional[np.ndarray] = None
    diag_plus: Optional[np.ndarray] = None
    name: str = "Tabulated"

    def sample(self, grid: GridSpec) -> SampledKernel:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (grid.size, grid.size):
            raise InvalidArgumentError(
                f"tabulated kernel has shape {values.shape}, grid needs {(grid.size, grid.size)}"
            )
        diag = np.diagonal(values).copy()
        traces = []
        for trace in (self.diag_minus, self.diag_plus):
            if trace is None:
                traces.append(diag.copy())
                continue
            trace = np.asarray(trace, dtype=complex)
            if trace.shape != (grid.size,):
                raise InvalidArgumentError(
                    f"diagonal trace has shape {trace.shape}, grid needs {(grid.size,)}"
                )
            traces.append(trace)
        _warn_if_rough(values, grid)
        x_only = bool(np.allclose(values, values[:, :1]))
        strictly_lower = np.tril(values, k=-1)
        return SampledKernel(
            G=values.copy(),
            diag_minus=traces[0],
            diag_plus=traces[1],
            grid=grid,
            x_only=x_only,
            volterra=bool(np.array_equal(values, strictly_lower)),
            label=self.name,
        )


@dataclass(frozen=True)
class VolterraMasked(KernelFunction):
    """The inner kernel restricted to x > y (zero for x <= y)."""

    inner: KernelFunction = field(default_factory=Zero)
    volterra = True

    def evaluate(self, X, Y):
        X, Y = np.broadcast_arrays(X, Y)
        return np.where(X > Y, self.inner.evaluate(X, Y), 0.0)

    def diagonal_traces(self, grid: GridSpec):
        minus = np.asarray(self.inner.evaluate(grid.nodes, grid.nodes), dtype=complex)
        minus = np.broadcast_to(minus, grid.nodes.shape).copy()
        return minus, np.zeros(grid.size, dtype=complex)

    @property
    def label(self) -> str:
        return f"Volterra({self.inner.label})"


def _warn_if_rough(values: np.ndarray, grid: GridSpec) -> None:
    # one-sided differences that do not straddle the diagonal
    dx = np.abs(np.diff(values, axis=0)) / grid.h
    dy = np.abs(np.diff(values, axis=1)) / grid.h
    i, j = np.indices(dx.shape)
    dx = np.where(np.abs(i - j) <= 1, 0.0, dx)
    i, j = np.indices(dy.shape)
    dy = np.where(np.abs(i - j) <= 1, 0.0, dy)
    roughness = max(dx.max(initial=0.0), dy.max(initial=0.0))
    if roughness > ROUGHNESS_WARNING_LEVEL:
        logger.warning(
            f"tabulated kernel has finite differences up to {roughness:.3e}; "
            f"H1 regularity on both triangles is doubtful"
        )


def sample_kernel(kf: KernelFunction, grid: GridSpec) -> SampledKernel:
    """Sample a descriptor on the grid (see KernelFunction.sample)."""
    sk = kf.sample(grid)
    logger.debug(f"sample_kernel {sk.label} n={grid.n} x_only={sk.x_only} volterra={sk.volterra}")
    return sk


def fattorini_counterexample(a0: float, N: int, L: float) -> XOnly:
    """
    Real x-only kernel for which the Fattorini criterion fails at k = 1..N:

        g(x) = a0 + (2/L) sum_k a0 cos(2 k pi x / L)
                  + (2/L) sum_k (2 k pi / L) sin(2 k pi x / L)

    The defining identities int g cos = int g and int g sin = 2 k pi / L hold
    exactly when L = 1 (or a0 = 0).
    """
    if int(N) != N or N < 1:
        raise InvalidArgumentError(f"counterexample needs N >= 1, got N={N}")
    if L <= 0:
        raise InvalidArgumentError(f"domain length must be positive, got L={L}")
    ks = np.arange(1, int(N) + 1)
    omegas = 2 * ks * np.pi / L

    def g(x):
        x = np.asarray(x, dtype=float)
        phases = np.multiply.outer(x, omegas)
        return (
            a0
            + (2 / L) * a0 * np.cos(phases).sum(axis=-1)
            + (2 / L) * (np.sin(phases) * omegas).sum(axis=-1)
        )

    return XOnly(g=g, name=f"Fattorini(a0={a0},N={N},L={L})")


def l2_norm(sk: SampledKernel) -> float:
    """Discrete L2((0,L) x (0,L)) norm with the tensor trapezoid rule."""
    w = sk.grid.rule.weights
    return float(np.sqrt(w @ (np.abs(sk.G) ** 2) @ w))


def small_gain(sk: SampledKernel) -> bool:
    """True when ||g||_L2 < sqrt(2) / L (sufficient for the Fattorini criterion)."""
    return l2_norm(sk) < np.sqrt(2.0) / sk.grid.L


def is_volterra(sk: SampledKernel, tol: float = 0.0) -> bool:
    """True when |G[i, j]| <= tol for every i <= j."""
    upper = np.triu(np.abs(sk.G))
    return bool(upper.max(initial=0.0) <= tol)


@kernel_type("zero")
def _zero_from_config(params: dict) -> KernelFunction:
    return Zero()


@kernel_type("constant")
def _constant_from_config(params: dict) -> KernelFunction:
    return Constant(c=complex(params.get("c", 1.0)))


@kernel_type("linear")
def _linear_from_config(params: dict) -> KernelFunction:
    c = complex(params.get("c", 1.0))
    return XOnly(g=lambda x: c * np.asarray(x), name=f"Linear({c})")


@kernel_type("fattorini", "counterexample")
def _fattorini_from_config(params: dict) -> KernelFunction:
    return fattorini_counterexample(
        a0=float(params.get("a0", 1.0)), N=int(params.get("N", 1)), L=float(params["L"])
    )


@kernel_type("volterra")
def _volterra_from_config(params: dict) -> KernelFunction:
    return VolterraMasked(inner=Constant(c=complex(params.get("c", 1.0))))
