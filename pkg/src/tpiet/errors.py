"""Exception hierarchy shared by every part of the engine."""
from __future__ import annotations


class TPietError(Exception):
    """Base class for all engine errors."""


class IntervalError(TPietError, ValueError):
    pass


class GeometryError(TPietError, ValueError):
    pass


class WKTSyntaxError(GeometryError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class LayerError(TPietError):
    pass


class WarehouseError(TPietError):
    pass


class QueryError(TPietError):
    """Any error raised while turning query text into a result."""


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column

    def caret(self, text: str) -> str:
        """Render the offending source line with a caret under the error column."""
        lines = text.splitlines() or [""]
        src = lines[self.line - 1] if 0 < self.line <= len(lines) else ""
        return f"{src}\n{' ' * (self.column - 1)}^\n{self.message}"


class ValidationError(QueryError):
    pass


class EvaluationError(QueryError):
    pass


class WorkspaceError(TPietError):
    pass
