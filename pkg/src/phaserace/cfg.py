"""Control-flow graphs built from the AST, one per root function.

Phase-changing points get blocks of their own: every barrier (explicit or
implicit) is a standalone block, a parallel region opens with an entry block
and closes with an exit block.  Those blocks never hold memory accesses.
Calls to functions of the same file are inlined one level deep.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import diagnostics as diag
from .frontend.ast import (
    Assign, Ast, BarrierStmt, BinOp, Block, Call, Decl, Declarator, DirectiveKind, Eval, ForLoop,
    FunctionDecl, If, Index, IntLit, NOLOC, PragmaBlock, Return, SourceLoc, Stmt, Var,
)

K = DirectiveKind

# directives whose region is executed by a whole team
TEAM_KINDS = frozenset({K.PARALLEL, K.PARALLEL_FOR, K.TEAMS})


@dataclass(frozen=True)
class Frame:
    """One enclosing directive of a block, with a unique id."""

    kind: DirectiveKind
    id: tuple
    clauses: tuple = ()
    name: Optional[str] = None
    loc: SourceLoc = NOLOC
    team: bool = False  # opens a parallel region
    loop_var: Optional[str] = None  # induction variable of a worksharing/simd loop
    nowait: bool = False


@dataclass(frozen=True)
class VarInfo:
    is_array: bool
    region: Optional[tuple]  # id of the innermost team frame at the declaration
    loc: SourceLoc = NOLOC


@dataclass
class BasicBlock:
    id: int
    stmts: list = field(default_factory=list)
    envs: list = field(default_factory=list)  # variable scope in force for each stmt
    has_barrier: bool = False
    directive_context: tuple = ()
    loc: SourceLoc = NOLOC
    role: str = "plain"  # plain | barrier | entry | exit | header | latch
    trip_count: Optional[int] = None

    @property
    def barrier_count(self) -> int:
        return sum(isinstance(s, BarrierStmt) for s in self.stmts)


@dataclass
class Region:
    """A `single` or `master` region: control may bypass the body from ``dom`` to ``post``."""

    kind: str
    dom: int
    post: int
    frame: Frame


@dataclass
class Cfg:
    function: str
    blocks: list[BasicBlock]
    edges: list[tuple[int, int]]
    entry: int
    exit: int
    call_edges: list[tuple[int, str]] = field(default_factory=list)
    regions: list[Region] = field(default_factory=list)
    ends_in_parallel: bool = False
    warnings: list = field(default_factory=list)

    def block(self, bid: int) -> BasicBlock:
        return self.blocks[bid]

    def succs(self, bid: int) -> list[int]:
        return [b for a, b in self.edges if a == bid]

    def preds(self, bid: int) -> list[int]:
        return [a for a, b in self.edges if b == bid]


def team_id(context: tuple) -> Optional[tuple]:
    for fr in reversed(context):
        if fr.team:
            return fr.id
    return None


class _Builder:
    def __init__(self, fn: FunctionDecl, ast: Ast, counter):
        self.fn = fn
        self.functions = {f.name: f for f in ast.functions}
        self.counter = counter
        self.blocks: list[BasicBlock] = []
        self.edges: list[tuple[int, int]] = []
        self.regions: list[Region] = []
        self.call_edges: list[tuple[int, str]] = []
        self.warnings: list = []
        self._warned: set[str] = set()
        self.returns: list[int] = []
        self.inline_stack: list[str] = []
        self.ctx: tuple = ()
        self.env: Mapping[str, VarInfo] = {
            it.name: VarInfo(it.is_array, None, it.loc) for d in ast.globals for it in d.items
        }
        self.ends_in_parallel = False
        self.cur = self.new_block(loc=fn.body.loc)

    # ------------------------------------------------------------ primitives

    def new_block(self, role: str = "plain", ctx: Optional[tuple] = None,
                  loc: SourceLoc = NOLOC) -> int:
        b = BasicBlock(len(self.blocks), directive_context=self.ctx if ctx is None else ctx,
                       loc=loc, role=role)
        self.blocks.append(b)
        return b.id

    def link(self, a: int, b: int):
        if (a, b) not in self.edges:
            self.edges.append((a, b))

    def follow(self, loc: SourceLoc = NOLOC) -> int:
        nb = self.new_block(loc=loc)
        self.link(self.cur, nb)
        self.cur = nb
        return nb

    def append(self, stmt: Stmt):
        b = self.blocks[self.cur]
        if b.role != "plain" or b.directive_context != self.ctx:
            b = self.blocks[self.follow(stmt.loc)]
        if not b.stmts:
            b.loc = stmt.loc
        b.stmts.append(stmt)
        b.envs.append(self.env)

    def put(self, bid: int, stmt: Stmt):
        b = self.blocks[bid]
        if not b.stmts and b.loc == NOLOC:
            b.loc = stmt.loc
        b.stmts.append(stmt)
        b.envs.append(self.env)

    def barrier_block(self, stmt: BarrierStmt, ctx: tuple) -> int:
        bar = self.new_block("barrier", ctx=ctx, loc=stmt.loc)
        self.put(bar, stmt)
        self.blocks[bar].has_barrier = True
        return bar

    def frame(self, d, team: bool = False, loop_var: Optional[str] = None) -> Frame:
        return Frame(d.kind, (self.fn.name, next(self.counter)), d.clauses, d.name, d.loc, team,
                     loop_var, d.nowait)

    def declare(self, name: str, is_array: bool, loc: SourceLoc):
        env = dict(self.env)
        env[name] = VarInfo(is_array, team_id(self.ctx), loc)
        self.env = env

    def warn_once(self, key: str, loc: SourceLoc, text: str):
        if key not in self._warned:
            self._warned.add(key)
            self.warnings.append(diag.warning(loc, text))

    # ------------------------------------------------------------ statements

    def visit(self, s: Stmt, tail: bool = False):
        if isinstance(s, Decl):
            for it in s.items:
                self.declare(it.name, it.is_array, it.loc)
            if any(it.init is not None for it in s.items):
                self.append(s)
        elif isinstance(s, (Assign, Eval)):
            self.append(s)
        elif isinstance(s, Return):
            if s.value is not None:
                self.append(Eval(s.value, s.loc))
            self.returns.append(self.cur)
            self.cur = self.new_block(loc=s.loc)  # unreachable continuation, pruned later
        elif isinstance(s, Call):
            self.visit_call(s)
        elif isinstance(s, Block):
            saved = self.env
            for x in s.stmts:
                self.visit(x)
            self.env = saved
        elif isinstance(s, If):
            self.append(Eval(s.cond, s.loc))
            c = self.cur
            self.cur = self.new_block(loc=s.then.loc)
            self.link(c, self.cur)
            self.visit(s.then)
            ends = [self.cur]
            if s.orelse is not None:
                self.cur = self.new_block(loc=s.orelse.loc)
                self.link(c, self.cur)
                self.visit(s.orelse)
                ends.append(self.cur)
            else:
                ends.append(c)
            j = self.new_block(loc=s.loc)
            for e in ends:
                self.link(e, j)
            self.cur = j
        elif isinstance(s, ForLoop):
            h = self.emit_loop(s)
            self.cur = self.new_block(loc=s.loc)
            self.link(h, self.cur)
        elif isinstance(s, BarrierStmt):
            bar = self.barrier_block(s, self.ctx)
            self.link(self.cur, bar)
            self.cur = bar
            self.follow(s.loc)
        elif isinstance(s, PragmaBlock):
            self.visit_pragma(s, tail)
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def emit_loop(self, loop: ForLoop) -> int:
        """Preheader/header/body/latch; returns the header, whose second exit the caller links."""
        saved = self.env
        iv = Var(loop.var, loop.var_loc)
        if loop.decl_type:
            self.declare(loop.var, False, loop.var_loc)
            self.append(Decl(loop.decl_type, (Declarator(loop.var, None, loop.init, False, loop.var_loc,
                                                          loop.var_loc),), loop.loc))
        else:
            self.append(Assign(iv, "=", loop.init, loop.loc, loop.var_loc))
        h = self.new_block("header", loc=loop.loc)
        self.blocks[h].trip_count = loop.trip_count()
        self.link(self.cur, h)
        self.put(h, Eval(BinOp(loop.relop, iv, loop.bound, loop.var_loc), loop.loc))
        self.cur = self.new_block(loc=getattr(loop.body, "loc", loop.loc))
        self.link(h, self.cur)
        self.visit(loop.body)
        latch = self.new_block("latch", loc=loop.loc)
        self.link(self.cur, latch)
        step = Assign(iv, "++", None, loop.loc, loop.var_loc) if loop.step == 1 else \
            Assign(iv, "+=", IntLit(loop.step, loop.loc), loop.loc, loop.var_loc)
        self.put(latch, step)
        self.link(latch, h)
        self.env = saved
        return h

    def visit_call(self, s: Call):
        callee = self.functions.get(s.name)
        if callee is None:
            self.warn_once(s.name, s.loc, f"call to undefined function '{s.name}' treated as opaque")
            self.append(s)
            return
        if s.name == self.fn.name or s.name in self.inline_stack or self.inline_stack:
            self.warn_once(s.name, s.loc,
                           f"call to '{s.name}' not inlined (recursive or nested); treated as opaque")
            self.append(s)
            return
        if len(callee.params) != len(s.args):
            self.warn_once(s.name, s.loc, f"call to '{s.name}' has wrong arity; treated as opaque")
            self.append(s)
            return
        self.call_edges.append((self.cur, s.name))
        saved = self.env
        mapping: dict[str, str] = {}
        for p, a in zip(callee.params, s.args):
            if p.is_array and isinstance(a, Var):
                mapping[p.name] = a.name
            else:
                self.declare(p.name, p.is_array, p.loc)
                self.append(Decl(p.type, (Declarator(p.name, None, a, p.is_array, p.loc, p.loc),), p.loc))
        self.inline_stack.append(s.name)
        self.visit(_rename(callee.body, mapping) if mapping else callee.body)
        self.inline_stack.pop()
        self.env = saved

    def visit_pragma(self, s: PragmaBlock, tail: bool):
        d = s.directive
        kind = d.kind
        outer = self.ctx
        in_team = team_id(outer) is not None
        if kind in TEAM_KINDS or (kind is K.SIMD and not in_team):
            loop = s.body if kind in (K.PARALLEL_FOR, K.SIMD) else None
            fr = self.frame(d, team=True, loop_var=loop.var if loop else None)
            self.ctx = outer + (fr,)
            b = self.blocks[self.cur]
            if b.role == "plain" and not b.stmts:
                b.role, b.directive_context, b.loc = "entry", self.ctx, d.loc
            else:
                e = self.new_block("entry", loc=d.loc)
                self.link(self.cur, e)
                self.cur = e
            if loop is None:
                self.visit(s.body)
            else:
                h = self.emit_loop(loop)
                self.cur = self.new_block(loc=loop.loc)
                self.link(h, self.cur)
            self.ctx = outer
            if tail:
                self.ends_in_parallel = True
            else:
                ex = self.new_block("exit", ctx=outer, loc=d.loc)
                self.link(self.cur, ex)
                self.cur = ex
                self.follow(d.loc)
        elif kind in (K.FOR, K.SIMD, K.DISTRIBUTE):
            loop = s.body
            fr = self.frame(d, loop_var=loop.var)
            self.ctx = outer + (fr,)
            h = self.emit_loop(loop)
            self.ctx = outer
            if kind is K.FOR and not d.nowait:
                bar = self.barrier_block(BarrierStmt(None, d.loc), outer)
                self.link(h, bar)
                self.cur = bar
                self.follow(d.loc)
            else:
                self.cur = self.new_block(loc=loop.loc)
                self.link(h, self.cur)
        elif kind in (K.SINGLE, K.MASTER, K.CRITICAL, K.ATOMIC, K.SECTION):
            dom = self.cur
            fr = self.frame(d)
            self.ctx = outer + (fr,)
            self.cur = self.new_block(loc=getattr(s.body, "loc", d.loc))
            self.link(dom, self.cur)
            self.visit(s.body)
            self.ctx = outer
            if kind is K.SINGLE and not d.nowait:
                post = self.barrier_block(BarrierStmt(None, d.loc), outer)
                self.link(self.cur, post)
                self.regions.append(Region("single", dom, post, fr))
                self.cur = post
                self.follow(d.loc)
                return
            post = self.new_block(loc=d.loc)
            self.link(self.cur, post)
            if kind in (K.SINGLE, K.MASTER):
                self.regions.append(Region(kind.value, dom, post, fr))
            self.cur = post
        elif kind is K.SECTIONS:
            dom = self.cur
            fr = self.frame(d)
            inner = outer + (fr,)
            ends = []
            for sec in s.body.stmts:
                sfr = self.frame(sec.directive)
                self.ctx = inner + (sfr,)
                self.cur = self.new_block(loc=getattr(sec.body, "loc", sec.loc))
                self.link(dom, self.cur)
                self.visit(sec.body)
                ends.append(self.cur)
            self.ctx = outer
            if d.nowait:
                post = self.new_block(loc=d.loc)
            else:
                post = self.barrier_block(BarrierStmt(None, d.loc), outer)
            for e in ends or [dom]:
                self.link(e, post)
            self.cur = post
            if not d.nowait:
                self.follow(d.loc)
        elif kind is K.TARGET:
            # host waits for the device region: no phase change of its own
            self.ctx = outer + (self.frame(d),)
            self.visit(s.body, tail)
            self.ctx = outer
        else:
            raise TypeError(f"directive {kind} cannot head a block")

    # ------------------------------------------------------------ finishing

    def finish(self) -> Cfg:
        if self.returns:
            ex = self.new_block(loc=self.fn.loc)
            self.link(self.cur, ex)
            for r in self.returns:
                self.link(r, ex)
            self.cur = ex
        cfg = Cfg(self.fn.name, self.blocks, self.edges, 0, self.cur, self.call_edges, self.regions,
                  self.ends_in_parallel, self.warnings)
        return _prune(cfg)


_RENAMED = (Var, Index, Declarator, ForLoop)


def _rename(node, mapping: dict[str, str]):
    """Copy of an AST subtree with variable names substituted."""
    if isinstance(node, tuple):
        return tuple(_rename(x, mapping) for x in node)
    if not dataclasses.is_dataclass(node) or isinstance(node, SourceLoc):
        return node
    changes = {}
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        nv = _rename(v, mapping)
        if f.name in ("name", "var") and isinstance(node, _RENAMED) and v in mapping:
            nv = mapping[v]
        if nv is not v:
            changes[f.name] = nv
    return dataclasses.replace(node, **changes) if changes else node


def _reachable(n: int, edges, entry: int) -> list[int]:
    succ: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        succ[a].append(b)
    seen = {entry}
    stack = [entry]
    while stack:
        for w in succ[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return sorted(seen)


def _prune(cfg: Cfg) -> Cfg:
    keep = _reachable(len(cfg.blocks), cfg.edges, cfg.entry)
    if len(keep) == len(cfg.blocks):
        return cfg
    remap = {old: new for new, old in enumerate(keep)}
    blocks = []
    for old in keep:
        b = cfg.blocks[old]
        b.id = remap[old]
        blocks.append(b)
    cfg.blocks = blocks
    cfg.edges = [(remap[a], remap[b]) for a, b in cfg.edges if a in remap and b in remap]
    cfg.regions = [dataclasses.replace(r, dom=remap[r.dom], post=remap[r.post])
                   for r in cfg.regions if r.dom in remap and r.post in remap]
    cfg.call_edges = [(remap[b], f) for b, f in cfg.call_edges if b in remap]
    cfg.entry = remap[cfg.entry]
    cfg.exit = remap.get(cfg.exit, cfg.exit)
    return cfg


def build_cfg(fn: FunctionDecl, ast: Optional[Ast] = None, counter=None) -> Cfg:
    """CFG of one function analysed as a root.

    When the last top-level statement is a parallel region, its closing
    barrier is left to the TaskGraph's terminal node and ``ends_in_parallel``
    is set.
    """
    ast = ast if ast is not None else Ast(functions=[fn])
    b = _Builder(fn, ast, counter if counter is not None else itertools.count(1))
    stmts = fn.body.stmts
    for i, s in enumerate(stmts):
        last = i == len(stmts) - 1
        b.visit(s, tail=last and _opens_team(s))
    return b.finish()


def _opens_team(s: Stmt) -> bool:
    while isinstance(s, PragmaBlock) and s.directive.kind is K.TARGET:
        s = s.body
    return isinstance(s, PragmaBlock) and (
        s.directive.kind in TEAM_KINDS or s.directive.kind is K.SIMD)


def normalize_barriers(cfg: Cfg) -> Cfg:
    """Split blocks so each holds at most one barrier, placed last."""
    blocks = [dataclasses.replace(b, stmts=list(b.stmts), envs=list(b.envs)) for b in cfg.blocks]
    edges = list(cfg.edges)
    first_of: dict[int, int] = {}
    last_of: dict[int, int] = {}
    changed = False
    for b in list(blocks):
        idx = [i for i, s in enumerate(b.stmts) if isinstance(s, BarrierStmt)]
        if not idx or (len(idx) == 1 and idx[0] == len(b.stmts) - 1):
            continue
        changed = True
        pieces, start = [], 0
        for i in idx:
            pieces.append((b.stmts[start:i + 1], b.envs[start:i + 1]))
            start = i + 1
        pieces.append((b.stmts[start:], b.envs[start:]))
        ids = [b.id]
        b.stmts, b.envs = pieces[0]
        b.has_barrier = True
        for stmts, envs in pieces[1:]:
            nb = dataclasses.replace(b, id=len(blocks), stmts=stmts, envs=envs,
                                     has_barrier=any(isinstance(s, BarrierStmt) for s in stmts),
                                     loc=stmts[0].loc if stmts else b.loc, role="plain")
            if any(isinstance(s, BarrierStmt) for s in stmts):
                nb.role = "barrier"
            blocks.append(nb)
            ids.append(nb.id)
        if b.role == "plain":
            b.role = "barrier"
        edges = [(ids[-1], y) if x == b.id else (x, y) for x, y in edges]
        edges += list(zip(ids, ids[1:]))
        first_of[b.id] = ids[0]
        last_of[b.id] = ids[-1]
    if not changed:
        return cfg
    regions = [dataclasses.replace(r, dom=last_of.get(r.dom, r.dom), post=first_of.get(r.post, r.post))
               for r in cfg.regions]
    call_edges = [(last_of.get(bid, bid), f) for bid, f in cfg.call_edges]
    return Cfg(cfg.function, blocks, edges, cfg.entry, last_of.get(cfg.exit, cfg.exit), call_edges,
               regions, cfg.ends_in_parallel, list(cfg.warnings))


def root_functions(ast: Ast) -> list[FunctionDecl]:
    """Functions never called from another function; ``main`` first."""
    called = set()
    for fn in ast.functions:
        for name in _called_names(fn.body):
            if name != fn.name:
                called.add(name)
    roots = [f for f in ast.functions if f.name not in called]
    if not roots and ast.functions:
        roots = [ast.function("main") or ast.functions[0]]
    roots.sort(key=lambda f: f.name != "main")
    return roots


def _called_names(node):
    if isinstance(node, Call):
        yield node.name
    if isinstance(node, tuple):
        for x in node:
            yield from _called_names(x)
    elif dataclasses.is_dataclass(node) and not isinstance(node, SourceLoc):
        for f in dataclasses.fields(node):
            yield from _called_names(getattr(node, f.name))


def build_cfgs(ast: Ast) -> list[Cfg]:
    counter = itertools.count(1)
    return [normalize_barriers(build_cfg(fn, ast, counter)) for fn in root_functions(ast)]
