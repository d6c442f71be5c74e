"""May-happen-in-parallel queries over a solved TaskGraph."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import UnknownNode
from .pia import PhaseInterval, PiaResult
from .taskgraph import Multiplicity, TaskGraph


class MhpReason(enum.Enum):
    PHASE_OVERLAP = "PhaseOverlap"
    DISJOINT_PHASES = "DisjointPhases"
    SAME_CRITICAL_LOCK = "SameCriticalLock"
    BOTH_MASTER_SAME_REGION = "BothMasterSameRegion"
    SINGLE_INSTANCE_SELF = "SingleInstanceSelf"
    # both inside one single/master/section body, hence on one thread
    SAME_SERIAL_REGION = "SameSerialRegion"
    # executed by the initial thread outside every parallel region
    SEQUENTIAL = "Sequential"


@dataclass(frozen=True)
class MhpVerdict:
    may_happen_in_parallel: bool
    reason: MhpReason

    def __bool__(self) -> bool:
        return self.may_happen_in_parallel


def overlaps(a: PhaseInterval, b: PhaseInterval) -> bool:
    if a.is_bottom or b.is_bottom:
        return False
    return a.lb <= b.ub <= a.ub or b.lb <= a.ub <= b.ub


def _guard_keys(guards, kind):
    return {g.key for g in guards if g.kind == kind}


def may_happen_in_parallel(u: int, v: int, g: TaskGraph, pia: PiaResult) -> MhpVerdict:
    for x in (u, v):
        if not (0 <= x < len(g.nodes)) or x not in pia.in_map:
            raise UnknownNode(f"node {x} is not part of the task graph")
    nu, nv = g.nodes[u], g.nodes[v]
    if not (nu.in_parallel and nv.in_parallel):
        return MhpVerdict(False, MhpReason.SEQUENTIAL)
    if u == v and nu.multiplicity is Multiplicity.SINGLE_INSTANCE:
        return MhpVerdict(False, MhpReason.SINGLE_INSTANCE_SELF)
    if nu.serial is not None and nu.serial == nv.serial:
        return MhpVerdict(False, MhpReason.SAME_SERIAL_REGION)
    if not overlaps(pia.span(u), pia.span(v)):
        return MhpVerdict(False, MhpReason.DISJOINT_PHASES)
    if _guard_keys(nu.guard, "critical") & _guard_keys(nv.guard, "critical"):
        return MhpVerdict(False, MhpReason.SAME_CRITICAL_LOCK)
    if _guard_keys(nu.guard, "master") & _guard_keys(nv.guard, "master"):
        return MhpVerdict(False, MhpReason.BOTH_MASTER_SAME_REGION)
    return MhpVerdict(True, MhpReason.PHASE_OVERLAP)
