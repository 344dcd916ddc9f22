"""Error types shared across the engine.

Every failure the engine can signal carries a stable machine-readable code
(e.g. ``UNKNOWN_ATOM``, ``BUDGET_EXCEEDED``) plus positional detail arguments.
The HTTP layer and the CLI map codes to status / exit codes; nothing should
ever have to parse the human-readable message.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: a code, its arguments, and a readable message."""

    code: str
    args: tuple[str, ...] = ()
    message: str = ""

    def render(self) -> str:
        inner = ", ".join(self.args)
        head = f"{self.code}({inner})" if inner else self.code
        return f"{head}: {self.message}" if self.message else head


class EngineError(Exception):
    """Base for all engine failures. ``code`` is stable, ``detail`` is free text."""

    def __init__(self, code: str, detail: str = "", args: tuple[str, ...] = ()):
        self.code = code
        self.detail = detail
        self.args_tuple = args
        super().__init__(f"{code}: {detail}" if detail else code)


class ParseFailure(EngineError):
    """Raised when a theory document cannot be parsed at all.

    ``diagnostics`` holds at least one entry; SYNTAX diagnostics carry
    (line, column) as string arguments.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0] if diagnostics else Diagnostic("SYNTAX", ("1", "1"))
        super().__init__(first.code, first.render(), first.args)


class ValidationFailure(EngineError):
    """Raised when a structurally well-formed document fails semantic checks."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0] if diagnostics else Diagnostic("INVALID")
        super().__init__(first.code, "; ".join(d.render() for d in diagnostics), first.args)


class BudgetExceeded(EngineError):
    def __init__(self, detail: str = "search budget exhausted"):
        super().__init__("BUDGET_EXCEEDED", detail)


class UniverseTooLarge(EngineError):
    def __init__(self, detail: str = "fluent universe too large to enumerate"):
        super().__init__("UNIVERSE_TOO_LARGE", detail)


class NotExecutable(EngineError):
    def __init__(self, detail: str = "plan is not executable from this state"):
        super().__init__("NOT_EXECUTABLE", detail)


class BranchAmbiguous(EngineError):
    def __init__(self, detail: str = "nondeterministic outcome requires a branch choice"):
        super().__init__("BRANCH_AMBIGUOUS", detail)
