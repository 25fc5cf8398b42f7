"""Exception hierarchy for the simulation engine."""


class SqueezeError(Exception):
    """Base class for every error raised by nhsqueeze."""


class DegenerateBasisError(SqueezeError, ValueError):
    pass


class DomainError(SqueezeError, ValueError):
    pass


class SingularScalingError(SqueezeError, ZeroDivisionError):
    """Raised when epsilon - 2*S*chi vanishes and relative couplings are undefined."""


class ExceptionalPointError(SqueezeError, ArithmeticError):
    """The Hamiltonian is too close to a non-diagonalizable (defective) point."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class MetricConstructionError(SqueezeError, ArithmeticError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class PairingAmbiguityError(SqueezeError, ArithmeticError):
    pass


class EvolutionHorizonError(SqueezeError, OverflowError):
    pass


class ConsistencyError(SqueezeError, ArithmeticError):
    """An internal invariant (e.g. a positive metric norm) was violated."""


class FrameUndefinedError(SqueezeError, ValueError):
    """Mean spin too small for the squeezing frame to be defined."""


class DisentanglementSingularityError(SqueezeError, ArithmeticError):
    pass


class ConfigError(SqueezeError, ValueError):
    def __init__(self, message, path=()):
        loc = "/".join(str(p) for p in path)
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = tuple(path)


class PhononChannelError(SqueezeError):
    """An engine error inside one phonon-number channel; ``cause`` is the original."""

    def __init__(self, n, cause):
        super().__init__(f"phonon channel n={n}: {type(cause).__name__}: {cause}")
        self.n = n
        self.cause = cause
