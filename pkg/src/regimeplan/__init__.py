"""Two-regime stochastic production planning.

Certify sub/super-solution constants, solve the coupled value-function
system by monotone Picard iteration on a tensor lattice over the ball,
extract the feedback production policy, and verify its optimality by Monte
Carlo simulation of the regime-switching inventory diffusion.
"""

from .certificates import (SubSuperCertificate, choose_constants,
                           choose_shifts, eval_subsolution,
                           eval_supersolution)
from .errors import (CertificationError, ConvergenceError, DomainError,
                     InputError, RegimePlanError, SimulationError)
from .grid import BallGrid, GridField, apply_laplacian, build_grid
from .hjb import (PolicyField, ValueFields, extract_policy, foc_infimum,
                  hjb_residual, transform_to_z)
from .model import (CostFunction, ProblemInstance, RegimeParams,
                    ValidationReport, eval_cost, inst_a, make_instance,
                    validate)
from .simulate import (CostEstimate, PolicyChoice, RegimePath, SimConfig,
                       VerificationReport, default_challengers,
                       sample_regime_path, simulate_cost, verify_optimality,
                       zero_policy)
from .solver import IterationTrace, monotone_iterate, solve_shifted

__version__ = "0.1.0"

__all__ = [
    "BallGrid", "CertificationError", "ConvergenceError", "CostEstimate",
    "CostFunction", "DomainError", "GridField", "InputError",
    "IterationTrace", "PolicyChoice", "PolicyField", "ProblemInstance",
    "RegimeParams", "RegimePath", "RegimePlanError", "SimConfig",
    "SimulationError", "SubSuperCertificate", "ValidationReport",
    "ValueFields", "VerificationReport", "apply_laplacian", "build_grid",
    "choose_constants", "choose_shifts", "default_challengers", "eval_cost",
    "eval_subsolution", "eval_supersolution", "extract_policy",
    "foc_infimum", "hjb_residual", "inst_a", "make_instance",
    "monotone_iterate", "sample_regime_path", "simulate_cost",
    "solve_shifted", "transform_to_z", "validate", "verify_optimality",
    "zero_policy",
]
