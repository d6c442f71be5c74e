"""AST for the mini-OMP-C language.

Every node carries a ``loc``; locations are excluded from equality so that
two parses of differently formatted text compare structurally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int
    col: int

    def __post_init__(self):
        if self.line < 1 or self.col < 1:
            raise ValueError(f"invalid source location {self.line}:{self.col}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NOLOC = SourceLoc("<none>", 1, 1)


class DirectiveKind(enum.Enum):
    PARALLEL = "parallel"
    FOR = "for"
    PARALLEL_FOR = "parallel for"
    SINGLE = "single"
    MASTER = "master"
    CRITICAL = "critical"
    BARRIER = "barrier"
    SECTIONS = "sections"
    SECTION = "section"
    ATOMIC = "atomic"
    SIMD = "simd"
    TARGET = "target"
    TEAMS = "teams"
    DISTRIBUTE = "distribute"


LOOP_DIRECTIVES = frozenset(
    {DirectiveKind.FOR, DirectiveKind.PARALLEL_FOR, DirectiveKind.SIMD, DirectiveKind.DISTRIBUTE}
)


class ClauseKind(enum.Enum):
    SHARED = "shared"
    PRIVATE = "private"
    FIRSTPRIVATE = "firstprivate"
    LASTPRIVATE = "lastprivate"
    THREADPRIVATE = "threadprivate"
    REDUCTION = "reduction"
    NOWAIT = "nowait"
    NUM_THREADS = "num_threads"
    SCHEDULE = "schedule"


REDUCTION_OPS = ("+", "*", "max", "min", "&&", "||")


@dataclass(frozen=True)
class Clause:
    kind: ClauseKind
    vars: tuple[str, ...] = ()
    # reduction operator, or the raw payload text of num_threads/schedule and
    # of the other clauses that are accepted and ignored (collapse, map, ...)
    arg: Optional[str] = None
    loc: SourceLoc = field(default=NOLOC, compare=False)

    def __post_init__(self):
        if self.kind is ClauseKind.REDUCTION and self.arg not in REDUCTION_OPS:
            raise ValueError(f"reduction needs one operator from {REDUCTION_OPS}, got {self.arg!r}")
        if self.kind is ClauseKind.NOWAIT and self.vars:
            raise ValueError("nowait takes no variables")


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    clauses: tuple[Clause, ...] = ()
    name: Optional[str] = None  # critical lock name
    loc: SourceLoc = field(default=NOLOC, compare=False)
    implicit: bool = field(default=False, compare=False)  # first `section` without a pragma

    def __post_init__(self):
        if self.kind is DirectiveKind.BARRIER and self.clauses:
            raise ValueError("barrier carries no clauses")
        if self.name is not None and (self.kind is not DirectiveKind.CRITICAL or not self.name):
            raise ValueError("only critical takes a non-empty lock name")

    @property
    def nowait(self) -> bool:
        return any(c.kind is ClauseKind.NOWAIT for c in self.clauses)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class FloatLit:
    text: str
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class StrLit:
    text: str  # including quotes, verbatim
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Index:
    name: str
    index: "Expr"
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class UnOp:
    op: str
    operand: "Expr"
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class CallExpr:
    name: str
    args: tuple["Expr", ...]
    loc: SourceLoc = field(default=NOLOC, compare=False)


Expr = Union[IntLit, FloatLit, StrLit, Var, Index, BinOp, UnOp, CallExpr]
LValue = Union[Var, Index]


# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Declarator:
    name: str
    size: Optional[Expr] = None  # array extent; None for scalars
    init: Optional[Expr] = None
    is_array: bool = False
    loc: SourceLoc = field(default=NOLOC, compare=False)
    # location of `=` when an initializer is present
    op_loc: Optional[SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class Decl:
    type: str
    items: tuple[Declarator, ...]
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Assign:
    """``target op value``; op is one of = += -= *= /= %= ++ --."""

    target: LValue
    op: str
    value: Optional[Expr]
    loc: SourceLoc = field(default=NOLOC, compare=False)
    op_loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class ForLoop:
    var: str
    init: Expr
    relop: str
    bound: Expr
    step: int
    body: "Stmt"
    decl_type: Optional[str] = None  # `for (int i = ...`
    loc: SourceLoc = field(default=NOLOC, compare=False)
    var_loc: SourceLoc = field(default=NOLOC, compare=False)

    def trip_count(self) -> Optional[int]:
        """Iteration count when both bounds are integer literals."""
        lo, hi = _const(self.init), _const(self.bound)
        if lo is None or hi is None or self.step <= 0:
            return None
        if self.relop == "<":
            return max(0, -(-(hi - lo) // self.step))
        if self.relop == "<=":
            return max(0, (hi - lo) // self.step + 1)
        if self.relop == "!=" and (hi - lo) % self.step == 0 and hi >= lo:
            return (hi - lo) // self.step
        return None


def _const(e: Expr) -> Optional[int]:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, UnOp) and e.op == "-" and isinstance(e.operand, IntLit):
        return -e.operand.value
    return None


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class PragmaBlock:
    directive: Directive
    body: "Stmt"
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Expr, ...]
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class BarrierStmt:
    directive: Optional[Directive] = None  # None for implicit barriers
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class Eval:
    """Synthetic statement: evaluate an expression for its reads (conditions)."""

    expr: Expr
    loc: SourceLoc = field(default=NOLOC, compare=False)


Stmt = Union[Decl, Assign, If, ForLoop, Block, PragmaBlock, Call, BarrierStmt, Return, Eval]


@dataclass(frozen=True)
class Param:
    type: str
    name: str
    is_array: bool = False
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass(frozen=True)
class FunctionDecl:
    ret_type: str
    name: str
    params: tuple[Param, ...]
    body: Block
    loc: SourceLoc = field(default=NOLOC, compare=False)


@dataclass
class Ast:
    functions: list[FunctionDecl] = field(default_factory=list)
    globals: list[Decl] = field(default_factory=list)
    threadprivate: list[str] = field(default_factory=list)
    # UnsupportedPragma / Warning diagnostics produced while parsing
    diagnostics: list = field(default_factory=list, compare=False)
    path: str = field(default="<input>", compare=False)

    def function(self, name: str) -> Optional[FunctionDecl]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None
