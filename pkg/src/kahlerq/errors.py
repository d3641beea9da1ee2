"""Exception hierarchy for kahlerq."""


class KahlerError(Exception):
    """Base class for all kahlerq errors."""


class DimensionMismatch(KahlerError, ValueError):
    pass


class StructureViolation(KahlerError, ValueError):
    """A real matrix is not the lift of any complex operator."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotHermitian(KahlerError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotAProjector(KahlerError, ValueError):
    pass


class ZeroProbabilityBranch(KahlerError):
    pass


class SolverFailure(KahlerError, RuntimeError):
    pass


class SearchSpaceTooLarge(KahlerError):
    """Exhaustive search or quadrature exceeds the configured budget."""


class BoundarySupport(KahlerError, ValueError):
    pass


class ConfigError(KahlerError, ValueError):
    pass


class MissingReport(KahlerError, FileNotFoundError):
    pass
