"""Exception hierarchy shared by the analysis stages."""

from __future__ import annotations


class PhaseRaceError(Exception):
    """Base class for every error raised by phaserace."""


class FrontendError(PhaseRaceError):
    def __init__(self, loc, message: str):
        self.loc = loc
        self.message = message
        super().__init__(f"{loc}: {message}")


class IllegalCharacter(FrontendError):
    pass


class OmpSyntaxError(FrontendError):
    """Raised when the token stream does not match the grammar."""

    def __init__(self, loc, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(loc, f"expected {expected}, found {found!r}")


class MalformedNesting(PhaseRaceError):
    def __init__(self, loc, message: str):
        self.loc = loc
        super().__init__(f"{loc}: malformed directive nesting: {message}")


class NegativeDelta(PhaseRaceError):
    """A loop body made a phase bound shrink; the transfer is not monotone."""


class UnknownNode(PhaseRaceError):
    pass


class ConflictingClauses(PhaseRaceError):
    def __init__(self, var: str, loc):
        self.var = var
        self.loc = loc
        super().__init__(f"{loc}: variable {var!r} appears in conflicting data-sharing clauses")


class ManifestParseError(PhaseRaceError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"manifest line {line}: {message}")
