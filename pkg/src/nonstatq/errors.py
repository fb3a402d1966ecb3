"""Exception types shared across the package."""


class NonstatqError(Exception):
    """Base class for all errors raised by this package."""


class ProfileDomainError(NonstatqError):
    """A time-dependent material profile was queried outside its valid domain."""


class MediumError(NonstatqError):
    """A material profile violates a physical requirement (e.g. nonpositive permittivity)."""


class WronskianError(NonstatqError):
    """Envelope data does not satisfy the -2i Wronskian normalization."""


class IntegrationError(NonstatqError):
    """The envelope integrator failed to meet its tolerance or lost phase tracking."""


class GridError(NonstatqError):
    """A position grid is unusable (too coarse for the local phase oscillation)."""


class ConfigError(NonstatqError):
    """A scenario configuration file is malformed or inconsistent."""


class AmplitudeOverflowError(NonstatqError):
    """A wavefunction exponent is too large to evaluate in double precision."""
