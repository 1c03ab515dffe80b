"""Numerics for the local Yamabe test-function construction: bubble constants,
curvature jets, Aubin profiles, quotients, radial solvers and the pipelines
that tie them together."""
from .errors import (CompatibilityError, ConstructionError, DomainError, IntegrationError,
                     NumericalError, OutOfValidityError, PipelineError, PreconditionError,
                     YamabeLabError)
from .special_functions import (best_sobolev_T, conformal_a, critical_p, duplication_residual,
                                k_moments, moment_ratio, sphere_area)

__version__ = "0.1.0"

__all__ = [
    "CompatibilityError", "ConstructionError", "DomainError", "IntegrationError",
    "NumericalError", "OutOfValidityError", "PipelineError", "PreconditionError",
    "YamabeLabError", "best_sobolev_T", "conformal_a", "critical_p", "duplication_residual",
    "k_moments", "moment_ratio", "sphere_area",
]
