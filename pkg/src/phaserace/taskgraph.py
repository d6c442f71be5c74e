"""Reduced TaskGraph <V, E, R, T>: one node per CFG block plus root and terminal."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .cfg import Cfg, team_id
from .errors import MalformedNesting
from .frontend.ast import DirectiveKind, NOLOC, SourceLoc

K = DirectiveKind

_WORKSHARING = frozenset({K.FOR, K.SINGLE, K.SECTIONS, K.DISTRIBUTE})
_NO_BARRIER_INSIDE = _WORKSHARING | {K.SECTION, K.MASTER, K.CRITICAL, K.ATOMIC, K.SIMD}
_SINGLE_THREAD = frozenset({K.SINGLE, K.MASTER, K.SECTION})


class Multiplicity(enum.Enum):
    SINGLE_INSTANCE = "single"
    MULTI_INSTANCE = "multi"


@dataclass(frozen=True)
class Guard:
    """kind is one of master, single, critical, atomic; ``key`` carries the
    critical lock name or the parallel region id of a master."""

    kind: str
    key: object = None


@dataclass
class TgNode:
    id: int
    name: str
    cfg_block: Optional[tuple[str, int]] = None  # (function, block id); None for R and T
    multiplicity: Multiplicity = Multiplicity.SINGLE_INSTANCE
    is_barrier: bool = False
    is_parallel_entry: bool = False
    is_parallel_exit: bool = False
    guard: frozenset = frozenset()
    in_parallel: bool = False
    region: Optional[tuple] = None  # innermost parallel region id
    serial: Optional[tuple] = None  # innermost single/master/section body run by one thread
    root: Optional[str] = None
    is_loop_header: bool = False
    trip_count: Optional[int] = None
    loc: SourceLoc = NOLOC

    @property
    def changes_phase(self) -> bool:
        return self.is_barrier or self.is_parallel_entry or self.is_parallel_exit


@dataclass
class TaskGraph:
    nodes: list[TgNode]
    edges: list[tuple[int, int]]
    root: int = 0
    terminal: int = -1
    bypass_edges: list[tuple[int, int]] = field(default_factory=list)
    block_node: dict = field(default_factory=dict)  # (function, block) -> node id

    def __post_init__(self):
        if self.terminal < 0:
            self.terminal = len(self.nodes) - 1
        self._succ: Optional[dict] = None
        self._pred: Optional[dict] = None

    def _index(self):
        succ = {n.id: [] for n in self.nodes}
        pred = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            succ[a].append(b)
            pred[b].append(a)
        self._succ, self._pred = succ, pred

    def succs(self, n: int) -> list[int]:
        if self._succ is None:
            self._index()
        return self._succ[n]

    def preds(self, n: int) -> list[int]:
        if self._pred is None:
            self._index()
        return self._pred[n]

    def node(self, n: int) -> TgNode:
        return self.nodes[n]

    def by_name(self, name: str) -> TgNode:
        for nd in self.nodes:
            if nd.name == name:
                return nd
        raise KeyError(name)


def _multiplicity(context: tuple) -> Multiplicity:
    for fr in reversed(context):
        if fr.kind in _SINGLE_THREAD:
            return Multiplicity.SINGLE_INSTANCE
        if fr.team:
            return Multiplicity.MULTI_INSTANCE
    return Multiplicity.SINGLE_INSTANCE


def _serial_region(context: tuple) -> Optional[tuple]:
    for fr in reversed(context):
        if fr.kind in _SINGLE_THREAD:
            return fr.id
        if fr.team:
            return None
    return None


def _guards(context: tuple) -> frozenset:
    out = set()
    for fr in context:
        if fr.kind is K.MASTER:
            out.add(Guard("master", team_id(context[:context.index(fr)])))
        elif fr.kind is K.SINGLE:
            out.add(Guard("single"))
        elif fr.kind is K.CRITICAL:
            out.add(Guard("critical", fr.name or ""))
        elif fr.kind is K.ATOMIC:
            out.add(Guard("atomic"))
    return frozenset(out)


def check_nesting(cfg: Cfg):
    """Reject contexts OpenMP forbids; raises MalformedNesting."""
    for b in cfg.blocks:
        ctx = b.directive_context
        inner: list = []  # frames since the innermost team frame
        for fr in ctx:
            if fr.team:
                inner = []
                continue
            if fr.kind is K.SECTION and (not inner or inner[-1].kind is not K.SECTIONS):
                raise MalformedNesting(fr.loc, "'section' outside 'sections'")
            if fr.kind in _WORKSHARING and any(x.kind in _NO_BARRIER_INSIDE for x in inner):
                raise MalformedNesting(fr.loc, f"'{fr.kind.value}' nested inside another "
                                               "worksharing or synchronization region")
            inner.append(fr)
        if b.has_barrier and b.role == "barrier" and any(x.kind in _NO_BARRIER_INSIDE for x in inner):
            bad = next(x for x in inner if x.kind in _NO_BARRIER_INSIDE)
            raise MalformedNesting(b.loc, f"barrier inside '{bad.kind.value}' region")


def build_taskgraph(cfgs: list[Cfg]) -> TaskGraph:
    nodes = [TgNode(0, "R")]
    edges: list[tuple[int, int]] = []
    bypass: list[tuple[int, int]] = []
    block_node: dict = {}
    counts = {"S": 0, "bar": 0}
    for cfg in cfgs:
        check_nesting(cfg)
        for b in cfg.blocks:
            prefix = "bar" if b.role == "barrier" else "S"
            counts[prefix] += 1
            ctx = b.directive_context
            nid = len(nodes)
            block_node[(cfg.function, b.id)] = nid
            nodes.append(TgNode(
                nid, f"{prefix}{counts[prefix]}", (cfg.function, b.id), _multiplicity(ctx),
                is_barrier=b.has_barrier and b.role == "barrier",
                is_parallel_entry=b.role == "entry",
                is_parallel_exit=b.role == "exit",
                guard=_guards(ctx),
                in_parallel=team_id(ctx) is not None,
                region=team_id(ctx),
                serial=_serial_region(ctx),
                root=cfg.function,
                is_loop_header=b.role == "header",
                trip_count=b.trip_count,
                loc=b.loc,
            ))
    t = TgNode(len(nodes), "T", is_parallel_exit=any(c.ends_in_parallel for c in cfgs))
    nodes.append(t)

    def add(a, b, lst=edges):
        if (a, b) not in edges:
            edges.append((a, b))
            if lst is not edges:
                lst.append((a, b))

    for cfg in cfgs:
        m = lambda bid: block_node[(cfg.function, bid)]  # noqa: E731
        add(0, m(cfg.entry))
        for a, b in cfg.edges:
            add(m(a), m(b))
        for r in cfg.regions:
            add(m(r.dom), m(r.post), bypass)
        add(m(cfg.exit), t.id)
    if not cfgs:
        add(0, t.id)
    return TaskGraph(nodes, edges, 0, t.id, bypass, block_node)
