"""Exception types shared across the package."""


class NonConvergence(RuntimeError):
    """Moment inversion found no root in the admissible alpha bracket."""


class HorizonTooShort(ValueError):
    """Observation horizon below the relation-unaware sensitivity threshold."""


class PreconditionViolated(ValueError):
    """A stated precondition of a bound or calculator does not hold."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
