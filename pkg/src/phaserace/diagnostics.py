from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Severity(enum.Enum):
    RACE = "race"
    UNSUPPORTED_PRAGMA = "unsupported-pragma"
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    text: str
    locs: tuple = field(default=())

    def __str__(self) -> str:
        where = f"{self.locs[0]}: " if self.locs else ""
        return f"{where}{self.severity.value}: {self.text}"


def unsupported_pragma(loc, text: str) -> Diagnostic:
    return Diagnostic(Severity.UNSUPPORTED_PRAGMA, f"unsupported OpenMP pragma '{text}'", (loc,))


def warning(loc, text: str) -> Diagnostic:
    return Diagnostic(Severity.WARNING, text, (loc,) if loc is not None else ())
