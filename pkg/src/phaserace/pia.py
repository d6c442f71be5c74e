"""Phase Interval Analysis over a TaskGraph.

Intervals live in ``[0, bound]`` where ``bound`` stands for infinity; all
arithmetic saturates there.  Bottom is the canonical pair ``[1, 0]``.

The solver visits the graph along a weak topological order (Bourdoncle's
recursive strategy).  Each loop head is entered with the join of its
entry predecessors (``pi0``), the body is solved once to obtain ``pi1``, and
the head is then set to the trip-count acceleration when the loop bound is
a constant, or widened to the lattice bound otherwise.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import NegativeDelta, PhaseRaceError
from .taskgraph import TaskGraph, TgNode

INF = 2**31 - 1


@dataclass(frozen=True, order=True)
class PhaseInterval:
    lb: int
    ub: int

    @property
    def is_bottom(self) -> bool:
        return self.lb > self.ub

    def __str__(self) -> str:
        return format_interval(self)


BOTTOM = PhaseInterval(1, 0)
ZERO = PhaseInterval(0, 0)
ONE = PhaseInterval(1, 1)


def top(bound: int = INF) -> PhaseInterval:
    return PhaseInterval(0, bound)


TOP = top()


def interval(lb: int, ub: int, bound: int = INF) -> PhaseInterval:
    """Build an interval, clamping both ends to ``bound``; empty pairs become bottom."""
    if lb > ub:
        return BOTTOM
    if lb < 0:
        raise ValueError(f"phase bounds must be non-negative, got [{lb},{ub}]")
    return PhaseInterval(min(lb, bound), min(ub, bound))


def format_interval(pi: PhaseInterval, bound: int = INF) -> str:
    if pi.is_bottom:
        return "bot"
    ub = "inf" if pi.ub >= bound else str(pi.ub)
    lb = "inf" if pi.lb >= bound else str(pi.lb)
    return f"[{lb},{ub}]"


def _sat_add(x: int, y: int, bound: int) -> int:
    if x >= bound or y >= bound:
        return bound
    return min(x + y, bound)


def join(a: PhaseInterval, b: PhaseInterval) -> PhaseInterval:
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return PhaseInterval(min(a.lb, b.lb), max(a.ub, b.ub))


def meet(a: PhaseInterval, b: PhaseInterval) -> PhaseInterval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    lb, ub = max(a.lb, b.lb), min(a.ub, b.ub)
    return BOTTOM if lb > ub else PhaseInterval(lb, ub)


def leq(a: PhaseInterval, b: PhaseInterval) -> bool:
    if a.is_bottom:
        return True
    if b.is_bottom:
        return False
    return b.lb <= a.lb and a.ub <= b.ub


def add(a: PhaseInterval, b: PhaseInterval, bound: int = INF) -> PhaseInterval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    return PhaseInterval(_sat_add(a.lb, b.lb, bound), _sat_add(a.ub, b.ub, bound))


def scale(c: int, a: PhaseInterval, bound: int = INF) -> PhaseInterval:
    if c < 0:
        raise ValueError("scale factor must be non-negative")
    if a.is_bottom:
        return BOTTOM
    if c == 0:
        return ZERO

    def mul(x):
        return bound if x >= bound else min(c * x, bound)

    return PhaseInterval(mul(a.lb), mul(a.ub))


def delta(a: PhaseInterval, b: PhaseInterval, bound: int = INF) -> PhaseInterval:
    """Componentwise ``b - a``; infinity minus infinity is 0, infinity minus finite stays infinite."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM

    def sub(x, y):
        if y >= bound:
            return 0 if x >= bound else bound
        if x >= bound:
            raise NegativeDelta(a, b)
        d = y - x
        if d < 0:
            raise NegativeDelta(a, b)
        return d

    return PhaseInterval(sub(a.lb, b.lb), sub(a.ub, b.ub))


def transfer(node: TgNode, pi: PhaseInterval, bound: int = INF) -> PhaseInterval:
    if pi.is_bottom or not node.changes_phase:
        return pi
    return add(pi, ONE, bound)


def widen_with_thresholds(old: PhaseInterval, new: PhaseInterval, lbt: int, ubt: int) -> PhaseInterval:
    if lbt > ubt:
        raise ValueError("widening thresholds need lbt <= ubt")
    if old.is_bottom:
        return new
    if new.is_bottom:
        return old
    lb = min(lbt, new.lb) if new.lb < old.lb else old.lb
    ub = max(ubt, new.ub) if new.ub > old.ub else old.ub
    return PhaseInterval(lb, ub)


def accelerate_loop(pi0: PhaseInterval, pi1: PhaseInterval, tc: Optional[int],
                    bound: int = INF) -> PhaseInterval:
    """Header interval of a loop from its entry value ``pi0`` and the value after one pass."""
    if tc is None:
        return widen_with_thresholds(pi0, pi1, 0, bound)
    if tc < 0:
        raise ValueError("trip count must be non-negative")
    step = delta(pi0, pi1, bound)
    if step.is_bottom:
        return join(pi0, pi1)
    return join(pi0, add(pi0, scale(tc, step, bound), bound))


# ---------------------------------------------------------------- solver


Component = Union[int, tuple]  # a vertex, or (head, [sub-components])


def weak_topological_order(succs: dict[int, list[int]], root: int) -> list[Component]:
    """Bourdoncle's hierarchical decomposition, nodes reachable from ``root`` only."""
    dfn: dict[int, int] = {}
    stack: list[int] = []
    num = 0

    def visit(v: int, partition: list) -> int:
        nonlocal num
        stack.append(v)
        num += 1
        dfn[v] = head = num
        loop = False
        for w in succs[v]:
            m = visit(w, partition) if dfn.get(w, 0) == 0 else dfn[w]
            if m <= head:
                head, loop = m, True
        if head == dfn[v]:
            dfn[v] = sys.maxsize
            el = stack.pop()
            if loop:
                while el != v:
                    dfn[el] = 0
                    el = stack.pop()
                partition.insert(0, component(v))
            else:
                partition.insert(0, v)
        return head

    def component(v: int) -> tuple:
        part: list = []
        for w in succs[v]:
            if dfn.get(w, 0) == 0:
                visit(w, part)
        return (v, part)

    out: list = []
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(succs) + 1000))
    try:
        visit(root, out)
    finally:
        sys.setrecursionlimit(limit)
    return out


def _members(comp: Component) -> set[int]:
    if isinstance(comp, int):
        return {comp}
    head, body = comp
    out = {head}
    for c in body:
        out |= _members(c)
    return out


class IterationCapExceeded(PhaseRaceError):
    pass


@dataclass
class PiaResult:
    in_map: dict[int, PhaseInterval]
    out_map: dict[int, PhaseInterval]
    iterations: int = 0
    bound: int = INF
    accelerated: dict[int, PhaseInterval] = field(default_factory=dict)

    def span(self, n: int) -> PhaseInterval:
        return join(self.in_map[n], self.out_map[n])


def run_pia(g: TaskGraph, bound: int = INF, max_iterations: Optional[int] = None) -> PiaResult:
    if bound < 1:
        raise ValueError("lattice upper bound must be >= 1")
    n = len(g.nodes)
    cap = max_iterations if max_iterations is not None else 64 * (n + 1) ** 2
    in_map = {v.id: BOTTOM for v in g.nodes}
    out_map = {v.id: BOTTOM for v in g.nodes}
    in_map[g.root] = out_map[g.root] = ZERO
    succs = {v.id: g.succs(v.id) for v in g.nodes}
    preds = {v.id: g.preds(v.id) for v in g.nodes}
    res = PiaResult(in_map, out_map, 0, bound)

    def evaluate(v: int, inp: PhaseInterval):
        res.iterations += 1
        if res.iterations > cap:
            raise IterationCapExceeded(f"phase interval analysis exceeded {cap} node updates")
        in_map[v] = inp
        out_map[v] = transfer(g.nodes[v], inp, bound)

    def incoming(v: int, among=None) -> PhaseInterval:
        acc = BOTTOM
        for p in preds[v]:
            if among is None or p in among:
                acc = join(acc, out_map[p])
        return acc

    def solve(comp: Component):
        if isinstance(comp, int):
            if comp != g.root:
                evaluate(comp, incoming(comp))
            return
        head, body = comp
        inside = _members(comp)
        outside = {p for p in preds[head] if p not in inside}
        pi0 = incoming(head, outside)
        node = g.nodes[head]
        tc = node.trip_count if node.is_loop_header else None

        def run_body(inp: PhaseInterval) -> PhaseInterval:
            evaluate(head, inp)
            for c in body:
                solve(c)
            return join(pi0, incoming(head, inside))

        pi1 = run_body(pi0)
        if pi1 == pi0:
            return
        cur = accelerate_loop(pi0, pi1, tc, bound)
        if tc is not None:
            res.accelerated[head] = cur
            run_body(cur)
            return
        while True:
            nxt = run_body(cur)
            if leq(nxt, cur):
                return
            cur = widen_with_thresholds(cur, join(cur, nxt), 0, bound)

    # the root has no predecessors, so it is never a component head
    for comp in weak_topological_order(succs, g.root):
        solve(comp)
    return res
