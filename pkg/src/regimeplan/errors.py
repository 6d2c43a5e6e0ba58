"""Exception hierarchy and process exit codes shared across the package."""

# Exit codes used by the CLI (and mirrored by the HTTP service payloads):
# 0 success, 2 input/schema, 3 certification, 4 solver convergence, 5 simulation.
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CERTIFICATION = 3
EXIT_SOLVER = 4
EXIT_SIMULATION = 5


class RegimePlanError(Exception):
    """Base class for package errors."""

    exit_code = 1


class InputError(RegimePlanError):
    """Invalid instance document, parameter, or precondition violation."""

    exit_code = EXIT_INPUT


class DomainError(InputError):
    """A query point lies outside the closed ball the model is defined on."""


class CertificationError(RegimePlanError):
    """Constant selection failed to certify the inequality system.

    Carries the index (0-based) of the first violated inequality, or -1 when
    the admissible interval for the first exponent is empty.
    """

    exit_code = EXIT_CERTIFICATION

    def __init__(self, message, violated_index=-1):
        super().__init__(message)
        self.violated_index = violated_index


class ConvergenceError(RegimePlanError):
    """An iterative solve exceeded its iteration cap.

    ``residual`` is the best residual reached; ``trace`` (when present) is the
    outer iteration trace for diagnosis.
    """

    exit_code = EXIT_SOLVER

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class SimulationError(RegimePlanError):
    """A Monte Carlo path produced a nonfinite state or a policy query failed."""

    exit_code = EXIT_SIMULATION

    def __init__(self, message, path_index=None, step=None):
        super().__init__(message)
        self.path_index = path_index
        self.step = step
