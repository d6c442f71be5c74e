"""Source text in, race reports out."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import diagnostics as diag
from .cfg import build_cfgs
from .errors import PhaseRaceError
from .frontend import parse_source
from .pia import INF, PiaResult, run_pia
from .racedetect import RaceReport, check_clauses, collect_accesses, detect_races
from .taskgraph import TaskGraph, build_taskgraph


@dataclass
class Analysis:
    path: str
    source: str
    ast: object = None
    cfgs: list = field(default_factory=list)
    taskgraph: Optional[TaskGraph] = None
    pia: Optional[PiaResult] = None
    accesses: list = field(default_factory=list)
    races: list[RaceReport] = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    # False when an unsupported pragma made the analysis bail out
    covered: bool = True
    error: Optional[PhaseRaceError] = None


def analyze(source: str, path: str = "<input>", bound: int = INF, mhp_engine: bool = True) -> Analysis:
    """Run every stage; frontend and nesting errors are returned, not raised."""
    res = Analysis(path, source)
    try:
        res.ast = parse_source(source, path)
    except PhaseRaceError as e:
        res.error, res.covered = e, False
        res.diagnostics.append(diag.Diagnostic(diag.Severity.ERROR, str(e)))
        return res
    res.diagnostics.extend(res.ast.diagnostics)
    if any(d.severity is diag.Severity.UNSUPPORTED_PRAGMA for d in res.ast.diagnostics):
        res.covered = False
        return res
    try:
        res.cfgs = build_cfgs(res.ast)
        for c in res.cfgs:
            res.diagnostics.extend(c.warnings)
        check_clauses(res.cfgs)
        res.taskgraph = build_taskgraph(res.cfgs)
        res.pia = run_pia(res.taskgraph, bound)
    except PhaseRaceError as e:
        res.error, res.covered = e, False
        res.diagnostics.append(diag.Diagnostic(diag.Severity.ERROR, str(e)))
        return res
    res.accesses = collect_accesses(res.cfgs, res.taskgraph, res.ast.threadprivate)
    res.races = detect_races(res.accesses, res.taskgraph, res.pia, mhp_engine)
    return res


def analyze_file(path: str, bound: int = INF, mhp_engine: bool = True) -> Analysis:
    with open(path, encoding="utf-8") as f:
        return analyze(f.read(), path, bound, mhp_engine)
