import logging

from fredholm_backstepping.closed_loop import (
    simulate_closed_loop,
    stabilization_metric,
    transform_consistency,
)
from fredholm_backstepping.config import PipelineConfig, load_config, parse_config
from fredholm_backstepping.constants import DEFAULT_FATTORINI_TOL, DEFAULT_TRUNCATION
from fredholm_backstepping.exceptions import (
    BacksteppingError,
    ConfigError,
    DegenerateSpectrumError,
    InvalidArgumentError,
    NotControllableError,
    SingularTransformError,
    UnsupportedKernelError,
)
from fredholm_backstepping.feedback import (
    FeedbackLaw,
    FredholmOp,
    assemble_K,
    feedback_kernel_h,
    invertibility,
    transform_apply,
    transform_invert,
)
from fredholm_backstepping.grid import GridSpec, make_grid, trapezoid_rule
from fredholm_backstepping.kernels import (
    Constant,
    SampledKernel,
    Separable,
    Tabulated,
    VolterraMasked,
    XOnly,
    Zero,
    fattorini_counterexample,
    sample_kernel,
)
from fredholm_backstepping.moments import moment_targets, solve_moments, verify_moments
from fredholm_backstepping.spectral import fattorini_check, spectrum
from fredholm_backstepping.synthesis import SynthesizedKernel, synthesize_kernel
from fredholm_backstepping.transport import (
    ControlSignal,
    StateTrajectory,
    dirichlet_from_periodic,
    simulate_dirichlet,
    simulate_periodic,
)

# Add NullHandler to prevent logging messages if the application doesn't configure logging
logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "BacksteppingError",
    "ConfigError",
    "Constant",
    "ControlSignal",
    "DEFAULT_FATTORINI_TOL",
    "DEFAULT_TRUNCATION",
    "DegenerateSpectrumError",
    "FeedbackLaw",
    "FredholmOp",
    "GridSpec",
    "InvalidArgumentError",
    "NotControllableError",
    "PipelineConfig",
    "SampledKernel",
    "Separable",
    "SingularTransformError",
    "StateTrajectory",
    "SynthesizedKernel",
    "Tabulated",
    "UnsupportedKernelError",
    "VolterraMasked",
    "XOnly",
    "Zero",
    "assemble_K",
    "dirichlet_from_periodic",
    "fattorini_check",
    "fattorini_counterexample",
    "feedback_kernel_h",
    "invertibility",
    "load_config",
    "make_grid",
    "moment_targets",
    "parse_config",
    "sample_kernel",
    "simulate_closed_loop",
    "simulate_dirichlet",
    "simulate_periodic",
    "solve_moments",
    "spectrum",
    "stabilization_metric",
    "synthesize_kernel",
    "transform_apply",
    "transform_consistency",
    "transform_invert",
    "trapezoid_rule",
    "verify_moments",
]
