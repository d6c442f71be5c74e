"""``phaserace check``: analyze files or evaluate a labelled corpus."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .diagnostics import Severity
from .errors import PhaseRaceError
from .metrics import BenchResult, evaluate_benchmarks
from .pia import INF
from .pipeline import Analysis, analyze_file
from .report import emit_dot, format_race_report, json_lines, use_color

EXIT_CLEAN, EXIT_RACES, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 2, like argparse, but through run_cli
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _on_off(v: str) -> bool:
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return v == "on"


def _bound(v: str) -> int:
    try:
        n = int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {v!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("lattice upper bound must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phaserace", description="Static data race checker for OpenMP kernels.")
    sub = p.add_subparsers(dest="command")
    c = sub.add_parser("check", help="analyze FILES, or 'check bench MANIFEST'")
    c.add_argument("--pia-lattice-upper-bound", type=_bound, default=INF, metavar="N",
                   help="integer that stands for infinity in phase intervals (default 2^31-1)")
    c.add_argument("--emit-taskgraph-dot", metavar="PATH", help="write the annotated TaskGraph as DOT")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--mhp-engine", type=_on_off, default=True, metavar="on|off",
                   help="off: only pairs inside one worksharing loop, subscript test only")
    c.add_argument("--tsv", action="store_true", help="bench: tab-separated output")
    c.add_argument("--plot", metavar="PNG", help="bench: also render a metrics chart")
    c.add_argument("inputs", nargs="*", metavar="FILES")
    return p


def _dot_path(base: str, path: str, many: bool) -> str:
    if not many:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}.{os.path.splitext(os.path.basename(path))[0]}{ext or '.dot'}"


def _print_analysis(res: Analysis, fmt: str, bound: int, out, err):
    if fmt == "json":
        out.write(json_lines(res.races, res.diagnostics, bound))
        return
    for d in res.diagnostics:
        if d.severity is not Severity.RACE:
            err.write(f"{d}\n")
    if res.ast is not None and not res.covered and res.error is None:
        err.write(f"{res.path}: not covered (unsupported pragma); no race analysis performed\n")
    color = use_color(out)
    for r in res.races:
        out.write(format_race_report(r, res.source, color))


def _run_check(a, out, err) -> int:
    many = len(a.inputs) > 1
    code = EXIT_CLEAN
    for path in a.inputs:
        try:
            res = analyze_file(path, a.pia_lattice_upper_bound, a.mhp_engine)
        except OSError as e:
            err.write(f"phaserace: cannot read {path}: {e.strerror}\n")
            code = EXIT_USAGE
            continue
        _print_analysis(res, a.format, a.pia_lattice_upper_bound, out, err)
        if res.error is not None:
            code = EXIT_USAGE
            continue
        if a.emit_taskgraph_dot and res.taskgraph is not None:
            with open(_dot_path(a.emit_taskgraph_dot, path, many), "w", encoding="utf-8") as f:
                f.write(emit_dot(res.taskgraph, res.pia))
        if res.races and code == EXIT_CLEAN:
            code = EXIT_RACES
    return code


def format_bench(bench: BenchResult, tsv: bool) -> str:
    lines = []
    if tsv:
        lines.append("kernel\texpected\toutcome\traces")
        for k in bench.kernels:
            lines.append(f"{k.path}\t{'yes' if k.expected_race else 'no'}\t{k.outcome}\t{k.races}")
        lines.append("")
        lines.append("metric\tvalue")
        lines += [f"{name}\t{val}" for name, val in bench.metrics.rows()]
    else:
        width = max([len(k.path) for k in bench.kernels] + [6])
        for k in bench.kernels:
            lines.append(f"{k.path:<{width}}  {'yes' if k.expected_race else 'no':<3}  {k.outcome:<7}  {k.races}")
        lines.append("")
        lines += [f"{name:<10} {val}" for name, val in bench.metrics.rows()]
    return "\n".join(lines) + "\n"


def _run_bench(a, out, err) -> int:
    if len(a.inputs) != 2:
        raise _UsageError("usage: phaserace check bench MANIFEST")
    try:
        bench = evaluate_benchmarks(a.inputs[1], a.pia_lattice_upper_bound, a.mhp_engine)
    except OSError as e:
        err.write(f"phaserace: cannot read {e.filename}: {e.strerror}\n")
        return EXIT_USAGE
    except PhaseRaceError as e:
        err.write(f"phaserace: {e}\n")
        return EXIT_USAGE
    out.write(format_bench(bench, a.tsv))
    if a.plot:
        from .plotting import plot_metrics
        plot_metrics(bench, a.plot)
    return EXIT_CLEAN


def run_cli(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.command != "check":
            raise _UsageError("missing command 'check'")
        if not a.inputs:
            raise _UsageError("no input files")
        if a.inputs[0] == "bench":
            return _run_bench(a, out, err)
        return _run_check(a, out, err)
    except _UsageError as e:
        err.write(parser.format_usage())
        err.write(f"phaserace: error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())
