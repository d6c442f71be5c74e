"""Race reports as text or JSON lines, and the TaskGraph as Graphviz DOT."""

from __future__ import annotations

import json
import os
import sys
from typing import Iterable, Optional, TextIO

from .diagnostics import Diagnostic, Severity
from .pia import PiaResult, format_interval
from .racedetect import RaceReport
from .taskgraph import Multiplicity, TaskGraph

RULE = "=============="
RED, RESET = "\x1b[31m", "\x1b[0m"


def use_color(stream: Optional[TextIO] = None) -> bool:
    """ANSI highlighting only on a terminal, and never when NO_COLOR is set."""
    if "NO_COLOR" in os.environ:
        return False
    stream = stream if stream is not None else sys.stdout
    return bool(getattr(stream, "isatty", lambda: False)())


def format_race_report(r: RaceReport, source_text: str, color: bool = False) -> str:
    src, snk = r.source.loc, r.sink.loc
    lines = source_text.splitlines()
    hot = {src.line, snk.line}
    first = max(1, min(hot) - 1)
    last = min(max(hot) + 1, max(len(lines), max(hot)))
    out = ["Data Race detected.", f"Source : {src}", f"Sink : {snk}", RULE]
    for n in range(first, last + 1):
        text = lines[n - 1] if n <= len(lines) else ""
        row = f"{n} : {text}"
        if n in hot and color:
            row = f"{RED}{row}{RESET}"
        out.append(row)
    out.append(RULE)
    return "\n".join(out) + "\n"


def race_json(r: RaceReport, bound: int) -> dict:
    def side(a, phase):
        return {
            "file": a.loc.file, "line": a.loc.line, "col": a.loc.col,
            "access": a.kind.value, "variable": a.base,
            "subscript": None if a.subscript is None else str(a.subscript),
            "phase": format_interval(phase, bound),
        }

    return {
        "type": "race",
        "kind": r.kind.value,
        "source": side(r.source, r.source_phase),
        "sink": side(r.sink, r.sink_phase),
        # subscripts are judged by the affine-offset test, not an exact dependence engine
        "verdict": "mhp-engine",
    }


def diagnostic_json(d: Diagnostic) -> dict:
    return {"type": d.severity.value, "text": d.text, "locs": [str(x) for x in d.locs]}


def json_lines(races: Iterable[RaceReport], diags: Iterable[Diagnostic], bound: int) -> str:
    rows = [diagnostic_json(d) for d in diags if d.severity is not Severity.RACE]
    rows += [race_json(r, bound) for r in races]
    return "".join(json.dumps(x, sort_keys=True) + "\n" for x in rows)


def race_diagnostic(r: RaceReport, source_text: str, color: bool = False) -> Diagnostic:
    return Diagnostic(Severity.RACE, format_race_report(r, source_text, color), (r.source.loc, r.sink.loc))


# ------------------------------------------------------------ DOT

_DARK, _LIGHT = "gray40", "gray85"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(g: TaskGraph, pia: PiaResult, name: str = "TaskGraph") -> str:
    bound = pia.bound
    out = [f"digraph {_quote(name)} {{", "  node [style=filled, fontname=\"monospace\"];"]
    for n in g.nodes:
        pin = format_interval(pia.in_map[n.id], bound)
        pout = format_interval(pia.out_map[n.id], bound)
        label = f"{n.name}\\n{pin}_in {pout}_out"
        attrs = [f'label="{label}"']
        if n.id in (g.root, g.terminal):
            attrs += ["shape=doublecircle" if n.id == g.terminal else "shape=Mcircle", "fillcolor=white"]
        else:
            dark = n.multiplicity is Multiplicity.MULTI_INSTANCE
            attrs += ["shape=box" if n.is_barrier else "shape=ellipse",
                      f"fillcolor={_DARK if dark else _LIGHT}"]
            if dark:
                attrs.append("fontcolor=white")
        out.append(f"  {_quote(n.name)} [{', '.join(attrs)}];")
    bypass = set(g.bypass_edges)
    for a, b in g.edges:
        style = " [style=dashed]" if (a, b) in bypass else ""
        out.append(f"  {_quote(g.nodes[a].name)} -> {_quote(g.nodes[b].name)}{style};")
    out.append("}")
    return "\n".join(out) + "\n"
