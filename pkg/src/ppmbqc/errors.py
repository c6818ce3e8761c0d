"""Exception types shared across the package."""

from __future__ import annotations


class PpmError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(PpmError):
    """Malformed graph, pattern, fragment or wiring."""


class EvaluationError(PpmError):
    """A boolean function was evaluated with an unbound variable."""


class WellFoundednessError(PpmError):
    """Cyclic dependency between measurement variables.

    The offending cycle is available as ``cycle`` (a list of vertex ids).
    """

    def __init__(self, message: str, cycle: list[int] | None = None):
        super().__init__(message)
        self.cycle = cycle or []


class DimensionError(PpmError):
    """State or operator dimensions do not match."""


class StateSizeError(PpmError):
    """A simulation would exceed the configured qubit cap."""


class ImpossibleBranchError(PpmError):
    """A forced measurement outcome has probability below 1e-12."""


class InferenceError(PpmError):
    """Correction inference failed (no Pauli fits, or table inconsistent)."""


class TableDerivationError(PpmError):
    """An advertised brick settings combination has no certified witness."""


class CircuitParseError(PpmError):
    """Circuit text could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
