"""Exception hierarchy shared across the package.

Every error raised on a bad input derives from :class:`SimgapError` so the
CLI can map the whole family to a single validation exit code while real
runtime failures (IO, bugs) propagate unchanged.
"""


class SimgapError(Exception):
    """Base class for all input and domain errors raised by this package."""


class FormatError(SimgapError):
    """A file or stream does not conform to its declared container format."""


class DataError(SimgapError):
    """Numeric content is unusable: NaN/Inf entries, degenerate vectors."""


class ConsistencyError(SimgapError):
    """Two inputs that must agree do not (counts, duplicate identifiers)."""


class ValidationError(SimgapError):
    """An argument, config value, or domain object violates its contract."""
