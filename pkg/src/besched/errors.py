"""Exception hierarchy shared across the package."""


class BeschedError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(BeschedError):
    pass


class DuplicateName(ModelError):
    pass


class UndeclaredVariable(ModelError):
    pass


class StructuralInfeasibility(ModelError):
    """Raised before solving when balance rows can never hold."""


class InconsistentHistory(ModelError):
    """Pre-horizon component state cannot be replayed unambiguously."""


class SolverError(BeschedError):
    pass


class NumericalFailure(SolverError):
    pass


class SpawnError(SolverError):
    pass


class SolverProcessError(SolverError):
    pass


class SolutionParseError(SolverError):
    pass


class SolverInconsistency(SolverError):
    """External solver returned a solution violating the model."""


class InputError(BeschedError):
    """Configuration / situation / time-series input is invalid."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class LengthMismatch(InputError):
    def __init__(self, found, expected, path=None):
        self.found = found
        self.expected = expected
        super().__init__(f"series has {found} values, expected {expected}", path)


class NotFound(InputError):
    pass


class ScenarioMismatch(InputError):
    """Situation does not belong to the given configuration."""
