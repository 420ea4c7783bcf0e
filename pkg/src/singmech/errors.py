"""Exception hierarchy shared across the package."""


class SingmechError(Exception):
    """Base class for all package-specific errors."""


class ExprSyntaxError(SingmechError):
    """Malformed expression source; ``position`` is 1-based."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class UnknownSymbolError(SingmechError):
    def __init__(self, name: str, position: int | None = None):
        loc = f" (position {position})" if position is not None else ""
        super().__init__(f"unknown symbol {name!r}{loc}")
        self.name = name
        self.position = position


class UnboundSymbolError(SingmechError):
    def __init__(self, name: str):
        super().__init__(f"symbol {name!r} has no bound value")
        self.name = name


class EvalDomainError(SingmechError):
    """Numeric evaluation left the function domain (log <= 0, x/0, ...)."""


class ModelValidationError(SingmechError):
    """A model file or model definition is structurally invalid."""


class UnsupportedLagrangianError(SingmechError):
    """Lagrangian outside the velocity-quadratic class the solver handles."""


class NonConstantRankError(SingmechError):
    """A sampled matrix changed rank (or feasible pivot set) across states."""


class SingularMinorError(SingmechError):
    """The leading minor selected by the partition could not be inverted."""


class NondynamicalViolationError(SingmechError):
    """A Hamiltonian retains noncanonical velocity dependence."""

    def __init__(self, message: str, offending=None, witness=None):
        super().__init__(message)
        self.offending = offending
        self.witness = witness


class InconsistentSystemError(SingmechError):
    """The linear system for the noncanonical velocities has no solution."""


class SecondClassRequiredError(SingmechError):
    """Dirac bracket requested but the constraint matrix is not invertible."""


class CorrespondenceFailureError(SingmechError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NoOracleError(SingmechError):
    """No reference solution is registered for this model."""


class StepFailureError(SingmechError):
    """Integration produced a non-finite state."""

    def __init__(self, message: str, last_state=None, step: int | None = None):
        super().__init__(message)
        self.last_state = last_state
        self.step = step
