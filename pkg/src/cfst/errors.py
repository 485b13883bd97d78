"""Type-checking errors and diagnostics with stable codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

CODES = {
    "E001": "UnboundVariable",
    "E002": "LinearityViolation",
    "E003": "TypeMismatch",
    "E004": "MatchFail",
    "E005": "Ambiguous",
    "E006": "EquivUndecided",
    "E007": "TooManyArguments",
    "E008": "CannotSynthesize",
    "E009": "IllFormedType",
    "E010": "SyntaxError",
}


class TypeCheckError(Exception):
    code = "E000"

    def __init__(self, message: str, loc=None, trace=None):
        super().__init__(message)
        self.message = message
        self.loc = loc
        self.trace = trace


class UnboundVariable(TypeCheckError):
    code = "E001"


class LinearityViolation(TypeCheckError):
    code = "E002"

    def __init__(self, message: str, name: str, loc=None):
        super().__init__(message, loc)
        self.name = name


class TypeMismatch(TypeCheckError):
    code = "E003"


class MatchError(TypeCheckError):
    code = "E004"


class Ambiguous(TypeCheckError):
    code = "E005"


class EquivUndecided(TypeCheckError):
    code = "E006"


class TooManyArguments(TypeCheckError):
    code = "E007"


class TypeArgumentMismatch(TooManyArguments):
    pass


class CannotSynthesize(TypeCheckError):
    code = "E008"


class IllFormed(TypeCheckError):
    code = "E009"


@dataclass
class Diagnostic:
    file: str
    line: int
    col: int
    code: str
    message: str
    severity: str = "error"
    trace: Optional[list] = field(default=None)

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.code}: {self.message}"

    def to_json(self) -> dict:
        out = {"file": self.file, "line": self.line, "col": self.col,
               "severity": self.severity, "code": self.code, "message": self.message}
        if self.trace is not None:
            out["trace"] = self.trace
        return out
