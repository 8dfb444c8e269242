"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat
and the meanings disjoint: configuration problems, resource caps, and
numerical failures are different ways for a run to die.
"""


class FiniteQMError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(FiniteQMError):
    """Operands live in incompatible (different-dimension) spaces."""


class DomainError(FiniteQMError):
    """An argument lies outside the operation's stated domain."""


class ConfigError(FiniteQMError):
    """A config file or parameter set failed validation.

    ``line`` and ``key`` carry diagnostics when the problem is tied to a
    specific config line.
    """

    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line
        self.key = key


class NodeCapError(FiniteQMError):
    """A quadrature request exceeds the tensor-grid node budget."""


class NumericalError(FiniteQMError):
    """The computation produced non-finite values or hit a singular case."""


class CausticError(NumericalError):
    """Real-time harmonic kernel evaluated at a focal time (sin(omega*t) = 0)."""
