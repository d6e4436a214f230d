"""Exception types shared across the package.

The CLI maps these onto exit codes: argument and guard problems
(:class:`GuardError` and subclasses) exit 2, any other library error exits 1.
"""


class OswlError(Exception):
    """Base class for all library errors."""


class GraphError(OswlError, ValueError):
    """Invalid graph construction input (self-loop, bad id, duplicate edge)."""


class ParseError(OswlError, ValueError):
    """A graph file failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GuardError(OswlError, ValueError):
    """An argument or size guard was violated."""


class CapExceeded(GuardError):
    """A configured object-count cap would be exceeded."""


class EmptySelection(GuardError):
    """An explicit subgraph selection was empty."""


class ColorCollisionError(OswlError):
    """Two distinct refinement keys hashed to the same color id."""


class TrainingDiverged(OswlError):
    """Training hit a non-finite or runaway loss and was aborted."""
