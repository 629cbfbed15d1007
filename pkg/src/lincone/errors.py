"""Exception types shared across the package."""


class LinconeError(Exception):
    """Base class for all package-specific errors."""


class DegenerateColumnError(LinconeError, ValueError):
    """A zero column was passed where a direction is required."""


class UnsupportedInstanceError(LinconeError, ValueError):
    """Instance is outside the size or integrality range this routine supports."""


class OracleFaultError(LinconeError, RuntimeError):
    """A separation oracle returned an answer that violates its contract."""


class ContractViolationError(LinconeError, ValueError):
    """An operation was called with arguments violating its stated precondition."""


class ParseError(LinconeError, ValueError):
    """Malformed instance or certificate file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
