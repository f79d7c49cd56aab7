"""Exception types shared by the whole package.

The CLI maps these onto exit codes (1 usage, 2 invariant failure,
3 capability error).
"""


class PolyflowError(Exception):
    """Base class for all package errors."""


class InputError(PolyflowError, ValueError):
    """Malformed or out-of-domain input."""


class CapabilityError(PolyflowError):
    """The request exceeds what a backend can do (e.g. exhaustive search too large)."""


class InvariantError(PolyflowError, RuntimeError):
    """An internal invariant was violated during a run."""
