"""Exception types shared across the package."""


class PathvolError(Exception):
    """Base class for all package-specific errors."""


class OutOfDomain(PathvolError):
    """Evaluation requested outside a path's realized domain."""


class RangeExceedsDomain(PathvolError):
    """Composition would evaluate the outer path outside its domain."""


class UnresolvedLevel(PathvolError):
    """Evaluation at a level whose exit time is not yet determined."""


class InvalidSpec(PathvolError):
    """A noise specification carries inconsistent or out-of-range parameters."""


class InvalidConfig(PathvolError):
    """A solver or simulation configuration violates its invariants."""


class NoiseExhausted(PathvolError):
    """The noise path cannot be extended far enough for the requested run."""


class NonFiniteState(PathvolError):
    """Solver iterates left the finite range."""


class NotBijective(PathvolError):
    """A path required to be strictly increasing is not."""


class DomainError(PathvolError):
    """Function argument outside its mathematical domain."""


class EmptySample(PathvolError):
    """A statistic was requested from an empty sample."""
