"""Exception hierarchy. The CLI maps each family to an exit code."""


class YamabeLabError(Exception):
    exit_code = 3


class PreconditionError(YamabeLabError, ValueError):
    """Input violates a hypothesis of the construction (exit 2)."""

    exit_code = 2


class DomainError(PreconditionError):
    """Argument outside the mathematical domain of a function."""


class OutOfValidityError(PreconditionError):
    """Point or support lies beyond the validity radius of a curvature jet."""


class NumericalError(YamabeLabError, RuntimeError):
    """A numerical routine failed to meet its contract (exit 3)."""


class IntegrationError(NumericalError):
    pass


class CompatibilityError(PreconditionError):
    """Source term violates the solvability condition of a singular problem."""


class ConstructionError(NumericalError):
    pass


class PipelineError(NumericalError):
    pass
