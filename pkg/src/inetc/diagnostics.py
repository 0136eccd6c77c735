"""Source spans, diagnostics, and the error types shared across the toolchain."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """Half-open region of source text, 1-based lines and columns."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        lo = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        hi = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return SourceSpan(lo[0], lo[1], hi[0], hi[1])

    def label(self) -> str:
        return f"{self.start_line}:{self.start_col}"


@dataclass
class Diagnostic:
    severity: str  # 'error' or 'warning'
    code: str  # SYNTAX, ARITY, LINEARITY, SUBNET, SEQUENTIAL, DUPLICATE, CONFLICT
    message: str
    span: SourceSpan | None = None
    related_span: SourceSpan | None = None
    related_note: str | None = None

    def format(self, path: str = "<input>") -> str:
        where = f"{path}:{self.span.label()}: " if self.span else f"{path}: "
        text = f"{self.severity}[{self.code}] {where}{self.message}"
        if self.related_span is not None:
            note = self.related_note or "related rule here"
            text += f"\n  note: {note} at {path}:{self.related_span.label()}"
        return text


class InetError(Exception):
    """Base error carrying one or more diagnostics."""

    def __init__(self, diagnostics, message: str | None = None):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics: list[Diagnostic] = list(diagnostics)
        super().__init__(message or (self.diagnostics[0].message if self.diagnostics else ""))


class ParseError(InetError):
    """Lexical or syntactic failure; also covers rejected out-of-scope constructs."""


class ArityError(ParseError):
    def __init__(self, symbol: str, expected: int, found: int, span: SourceSpan | None = None):
        self.symbol = symbol
        self.expected = expected
        self.found = found
        diag = Diagnostic(
            "error",
            "ARITY",
            f"agent '{symbol}' used with {found} argument(s), expected {expected}",
            span,
        )
        super().__init__(diag)


class LinearityError(InetError):
    def __init__(self, var: str, count: int, span: SourceSpan | None = None, message: str | None = None):
        self.var = var
        self.count = count
        diag = Diagnostic(
            "error",
            "LINEARITY",
            message or f"variable '{var}' occurs {count} times (at most two occurrences allowed)",
            span,
        )
        super().__init__(diag)


class WellFormednessError(InetError):
    """A rule set violates the subnet or sequentiality conditions."""


class ConflictingRulesError(InetError):
    """Two surviving rules share an equivalent left side but differ on the right."""


class StepLimitExceeded(InetError):
    def __init__(self, max_steps: int, net=None, trace=None):
        self.max_steps = max_steps
        self.net = net
        self.trace = trace
        diag = Diagnostic("error", "STEPS", f"step limit exceeded ({max_steps})")
        super().__init__(diag)


class NotNested(Exception):
    """Raised when asking for a nested position of a pattern that has none."""


class MatchFailure(Exception):
    """A rule's nested pattern does not match the net at an active pair."""
