from enum import Enum, IntEnum


class ExitCode(IntEnum):
    """
    Process exit statuses of the command-line entry point.

    Each pipeline refusal has its own status so that shell scripts can tell a
    non-controllable kernel from a broken configuration.
    """

    OK = 0
    FAILURE = 1  # I/O or configuration errors
    NOT_CONTROLLABLE = 2
    DEGENERATE_SPECTRUM = 3
    SINGULAR_TRANSFORM = 4


class FattoriniStatus(str, Enum):
    """Outcome of the Fattorini (Hautus-type) criterion."""

    SATISFIED = "satisfied"
    FAILS_AT = "fails_at"
    DEGENERATE_LAMBDA0 = "degenerate_lambda0"


class SimulationMode(str, Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


class MomentAnsatz(str, Enum):
    """
    Function family the truncated moment control is expanded in.

    FOURIER uses the conjugate moment functions for k != 0 and the constant
    mode for k = 0; GRAM uses the conjugate moment functions for every k.
    """

    FOURIER = "fourier"
    GRAM = "gram"
