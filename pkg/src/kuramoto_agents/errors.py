"""Exception types raised across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Inconsistent sizes between states, parameters and adjacency.

    ``index`` names the offending node (or ``None`` when the mismatch is
    global, e.g. two arrays of different length).
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NonFiniteError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class DivergenceError(RuntimeError):
    """Amplitudes left the bounded regime during integration."""

    def __init__(self, message: str, step: int, node: int, value: float):
        super().__init__(message)
        self.step = step
        self.node = node
        self.value = value


class EdgeListParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` is ``section.key`` when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
