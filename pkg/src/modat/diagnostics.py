"""Source spans and diagnostics shared across the toolchain."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


NO_SPAN = SourceSpan("<none>", 1, 1, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan = NO_SPAN

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def sort_key(self):
        s = self.span
        return (s.file, s.start_line, s.start_col, self.code, self.message)

    def render(self) -> str:
        return f"{self.span}: {self.severity}[{self.code}]: {self.message}"

    def to_json(self) -> str:
        s = self.span
        return json.dumps(
            {
                "file": s.file,
                "line": s.start_line,
                "col": s.start_col,
                "end_line": s.end_line,
                "end_col": s.end_col,
                "severity": self.severity,
                "code": self.code,
                "message": self.message,
            },
            separators=(",", ":"),
        )


def error(code: str, message: str, span: SourceSpan = NO_SPAN) -> Diagnostic:
    return Diagnostic("error", code, message, span)


def warning(code: str, message: str, span: SourceSpan = NO_SPAN) -> Diagnostic:
    return Diagnostic("warning", code, message, span)


class DiagnosticError(Exception):
    """Raised by the front end when a source cannot be turned into a model."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sorted(diagnostics, key=Diagnostic.sort_key)
        super().__init__("\n".join(d.render() for d in self.diagnostics))
