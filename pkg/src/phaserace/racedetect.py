"""Memory accesses, data-sharing classes and the race condition itself."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .cfg import Cfg, Frame, VarInfo
from .errors import ConflictingClauses
from .frontend.affine import AffineExpr, to_affine
from .frontend.ast import (
    Assign, BinOp, Call, CallExpr, ClauseKind, Decl, DirectiveKind, Eval, Expr, Index, SourceLoc,
    StrLit, UnOp, Var,
)
from .mhp import may_happen_in_parallel
from .pia import PhaseInterval, PiaResult
from .taskgraph import Multiplicity, TaskGraph

K = DirectiveKind


class AccessKind(enum.Enum):
    READ = "read"
    WRITE = "write"


class SharingClass(enum.Enum):
    SHARED = "shared"
    PRIVATE = "private"
    FIRSTPRIVATE = "firstprivate"
    LASTPRIVATE = "lastprivate"
    THREADPRIVATE = "threadprivate"
    REDUCTION_VAR = "reduction"
    LOOP_INDUCTION = "induction"


RACE_CANDIDATES = frozenset({SharingClass.SHARED, SharingClass.REDUCTION_VAR})

_CLAUSE_CLASS = {
    ClauseKind.SHARED: SharingClass.SHARED,
    ClauseKind.PRIVATE: SharingClass.PRIVATE,
    ClauseKind.FIRSTPRIVATE: SharingClass.FIRSTPRIVATE,
    ClauseKind.LASTPRIVATE: SharingClass.LASTPRIVATE,
    ClauseKind.THREADPRIVATE: SharingClass.THREADPRIVATE,
    ClauseKind.REDUCTION: SharingClass.REDUCTION_VAR,
}

_LOOP_KINDS = frozenset({K.FOR, K.PARALLEL_FOR, K.SIMD, K.DISTRIBUTE})


@dataclass(frozen=True)
class MemoryAccess:
    base: str
    kind: AccessKind
    subscript: Optional[AffineExpr]
    node: int
    loc: SourceLoc
    sharing: SharingClass
    guards: frozenset = frozenset()  # ("atomic",), ("critical", name), ("reduction", op, frame id)
    distributed_loop_var: Optional[str] = None
    loop: Optional[tuple] = None  # frame id of the enclosing worksharing loop
    root: Optional[str] = None

    @property
    def is_write(self) -> bool:
        return self.kind is AccessKind.WRITE

    def describe(self) -> str:
        sub = "" if self.subscript is None else f"[{self.subscript}]"
        return f"{self.kind.value} {self.base}{sub}"


class RaceKind(enum.Enum):
    WRITE_WRITE = "WriteWrite"
    WRITE_READ = "WriteRead"


@dataclass(frozen=True)
class RaceReport:
    source: MemoryAccess
    sink: MemoryAccess
    source_phase: PhaseInterval
    sink_phase: PhaseInterval
    kind: RaceKind


# ------------------------------------------------------------ sharing


def _clause_class(var: str, frame: Frame) -> Optional[tuple[SharingClass, Optional[str]]]:
    found = []
    for c in frame.clauses:
        if var in c.vars and c.kind in _CLAUSE_CLASS:
            found.append((_CLAUSE_CLASS[c.kind], c.arg))
    if not found:
        return None
    kinds = {k for k, _ in found}
    if len(found) > 1 and kinds != {SharingClass.FIRSTPRIVATE, SharingClass.LASTPRIVATE}:
        raise ConflictingClauses(var, frame.loc)
    if kinds == {SharingClass.FIRSTPRIVATE, SharingClass.LASTPRIVATE}:
        return SharingClass.FIRSTPRIVATE, None
    return found[0]


def classify_sharing(var: str, context: tuple, info: Optional[VarInfo] = None,
                     threadprivate: Iterable[str] = ()) -> SharingClass:
    """Data-sharing class of ``var`` at a point nested in ``context`` (outermost frame first)."""
    return _classify(var, context, info, frozenset(threadprivate))[0]


def _classify(var, context, info, threadprivate):
    for fr in reversed(context):
        if info is not None and info.region is not None and fr.team and fr.id == info.region:
            return SharingClass.PRIVATE, None
        hit = _clause_class(var, fr)
        if hit is not None:
            return hit[0], (hit[1], fr.id) if hit[0] is SharingClass.REDUCTION_VAR else None
        if fr.loop_var == var and fr.kind in _LOOP_KINDS:
            return SharingClass.LOOP_INDUCTION, None
    if info is not None and info.region is not None:
        return SharingClass.PRIVATE, None
    if var in threadprivate:
        return SharingClass.THREADPRIVATE, None
    return SharingClass.SHARED, None


def check_clauses(cfgs: Iterable[Cfg]):
    """Raise ConflictingClauses for any variable named twice on one directive."""
    seen = set()
    for cfg in cfgs:
        for b in cfg.blocks:
            for fr in b.directive_context:
                if fr.id in seen:
                    continue
                seen.add(fr.id)
                for v in sorted({v for c in fr.clauses for v in c.vars}):
                    _clause_class(v, fr)


# ------------------------------------------------------------ collection


def _reads(e: Expr, out: list):
    """(name, index expr or None, loc) for every variable read in ``e``, left to right."""
    if isinstance(e, Var):
        out.append((e.name, None, e.loc))
    elif isinstance(e, Index):
        out.append((e.name, e.index, e.loc))
        _reads(e.index, out)
    elif isinstance(e, BinOp):
        _reads(e.left, out)
        _reads(e.right, out)
    elif isinstance(e, UnOp):
        if e.op == "&" and isinstance(e.operand, Var):
            return  # address taken, no load
        _reads(e.operand, out)
    elif isinstance(e, CallExpr):
        for a in e.args:
            _arg_reads(a, out)


def _arg_reads(a: Expr, out: list):
    if isinstance(a, StrLit):
        return
    _reads(a, out)


def _stmt_accesses(s, env: Mapping[str, VarInfo]):
    """Yield (name, kind, index expr, loc) for one straight-line statement; write first."""
    reads: list = []
    if isinstance(s, Assign):
        t = s.target
        idx = t.index if isinstance(t, Index) else None
        yield t.name, AccessKind.WRITE, idx, s.op_loc
        if s.op != "=":
            reads.append((t.name, idx, t.loc))
        if idx is not None:
            _reads(idx, reads)
        if s.value is not None:
            _reads(s.value, reads)
    elif isinstance(s, Decl):
        for it in s.items:
            if it.init is not None:
                yield it.name, AccessKind.WRITE, None, it.op_loc or it.loc
                _reads(it.init, reads)
    elif isinstance(s, Eval):
        _reads(s.expr, reads)
    elif isinstance(s, Call):
        for a in s.args:
            _arg_reads(a, reads)
    for name, idx, loc in reads:
        info = env.get(name)
        if idx is None and info is not None and info.is_array:
            continue  # array decays to a pointer: no access by itself
        yield name, AccessKind.READ, idx, loc


def _loop_frame(context: tuple) -> Optional[Frame]:
    for fr in reversed(context):
        if fr.kind in _LOOP_KINDS and fr.loop_var is not None:
            return fr
        if fr.team and fr.kind is not K.PARALLEL_FOR and fr.kind is not K.SIMD:
            return None
    return None


def collect_accesses(cfgs: list[Cfg], g: TaskGraph, threadprivate: Iterable[str] = ()) -> list[MemoryAccess]:
    tp = frozenset(threadprivate)
    out: list[MemoryAccess] = []
    for cfg in cfgs:
        for b in cfg.blocks:
            node = g.block_node[(cfg.function, b.id)]
            ctx = b.directive_context
            lf = _loop_frame(ctx)
            base_guards = set()
            for fr in ctx:
                if fr.kind is K.ATOMIC:
                    base_guards.add(("atomic",))
                elif fr.kind is K.CRITICAL:
                    base_guards.add(("critical", fr.name or ""))
            for s, env in zip(b.stmts, b.envs):
                for name, kind, idx, loc in _stmt_accesses(s, env):
                    sharing, red = _classify(name, ctx, env.get(name), tp)
                    guards = set(base_guards)
                    if red is not None:
                        guards.add(("reduction",) + red)
                    out.append(MemoryAccess(
                        name, kind, None if idx is None else to_affine(idx), node, loc, sharing,
                        frozenset(guards), lf.loop_var if lf else None, lf.id if lf else None,
                        cfg.function,
                    ))
    return out


# ------------------------------------------------------------ the race test


def subscript_disjoint(a1: MemoryAccess, a2: MemoryAccess) -> bool:
    """True when the two subscripts can never name the same element in concurrent instances."""
    s1, s2 = a1.subscript, a2.subscript
    if s1 is None or s2 is None or s1.symbolic or s2.symbolic:
        return False
    if s1.is_constant() and s2.is_constant():
        return s1.constant != s2.constant
    iv = a1.distributed_loop_var
    if a1.loop is None or a1.loop != a2.loop or iv is None:
        return False
    return s1.terms == s2.terms == ((iv, 1),) and s1.constant == s2.constant


def _reduction_keys(a: MemoryAccess) -> set:
    return {x for x in a.guards if x[0] == "reduction"}


def _excluded_by_guards(a1: MemoryAccess, a2: MemoryAccess) -> bool:
    if _reduction_keys(a1) & _reduction_keys(a2):
        return True
    return ("atomic",) in a1.guards and ("atomic",) in a2.guards


def candidate_pair(a1: MemoryAccess, a2: MemoryAccess) -> bool:
    """Everything but the MHP and subscript tests."""
    return (a1.base == a2.base
            and a1.root == a2.root
            and a1.sharing in RACE_CANDIDATES and a2.sharing in RACE_CANDIDATES
            and (a1.is_write or a2.is_write)
            and not _excluded_by_guards(a1, a2))


def _order(a1: MemoryAccess, a2: MemoryAccess) -> tuple[MemoryAccess, MemoryAccess]:
    k1 = (a1.loc, a1.kind is AccessKind.READ)
    k2 = (a2.loc, a2.kind is AccessKind.READ)
    return (a1, a2) if k1 <= k2 else (a2, a1)


def detect_races(accesses: list[MemoryAccess], g: TaskGraph, pia: PiaResult,
                 mhp_engine: bool = True) -> list[RaceReport]:
    """All racy pairs, one report per distinct (source loc, sink loc).

    With ``mhp_engine`` off only pairs inside one worksharing loop are
    examined, by the subscript test alone.
    """
    by_base: dict[str, list[MemoryAccess]] = {}
    for a in accesses:
        by_base.setdefault(a.base, []).append(a)
    seen = set()
    out: list[RaceReport] = []
    for base in sorted(by_base):
        group = by_base[base]
        for i, a1 in enumerate(group):
            for a2 in group[i:]:
                if a1 is a2 and g.nodes[a1.node].multiplicity is not Multiplicity.MULTI_INSTANCE:
                    continue
                if not candidate_pair(a1, a2):
                    continue
                if mhp_engine:
                    if not may_happen_in_parallel(a1.node, a2.node, g, pia):
                        continue
                elif a1.loop is None or a1.loop != a2.loop:
                    continue
                if (a1.subscript is not None or a2.subscript is not None) and subscript_disjoint(a1, a2):
                    continue
                src, snk = _order(a1, a2)
                key = (src.loc, snk.loc)
                if key in seen:
                    continue
                seen.add(key)
                kind = RaceKind.WRITE_WRITE if src.is_write and snk.is_write else RaceKind.WRITE_READ
                out.append(RaceReport(src, snk, pia.span(src.node), pia.span(snk.node), kind))
    out.sort(key=lambda r: (r.source.loc, r.sink.loc))
    return out
