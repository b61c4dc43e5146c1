"""Exception hierarchy shared by the whole package.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies instead of bare ValueError/RuntimeError.
"""


class GwbootError(Exception):
    """Base class for all errors raised by gwboot."""


class DomainError(GwbootError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(GwbootError, ValueError):
    """Structured input (table entries, spec files, CLI values) is malformed."""


class ConstructionError(GwbootError, ValueError):
    """A distribution cannot be built for the requested parameters."""


class CapabilityError(GwbootError, RuntimeError):
    """The requested tolerance or operation is unreachable for this input."""


class SizeError(GwbootError, RuntimeError):
    """A resource guard (node cap, table span) was exceeded."""


class DiagnosticError(GwbootError, RuntimeError):
    """An internal consistency check that should never fail, failed."""
