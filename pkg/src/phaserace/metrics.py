"""Confusion-matrix metrics and the labelled-corpus harness."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ManifestParseError
from .pia import INF

Ratio = Optional[Fraction]  # None when the denominator is zero


def _div(a, b) -> Ratio:
    if a is None or b is None or b == 0:
        return None
    return Fraction(a) / Fraction(b)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: Ratio
    recall: Ratio
    accuracy: Ratio
    f1: Ratio
    dor: Ratio
    lr_plus: Ratio
    lr_minus: Ratio
    tpr: Ratio
    fpr: Ratio
    fnr: Ratio
    tnr: Ratio
    coverage: int = 0

    RATIOS = ("precision", "recall", "accuracy", "f1", "tpr", "fpr", "fnr", "tnr",
              "lr_plus", "lr_minus", "dor")

    def rows(self) -> list[tuple[str, str]]:
        counts = [(k, str(getattr(self, k))) for k in ("tp", "fp", "tn", "fn", "coverage")]
        return counts + [(k, format_ratio(getattr(self, k))) for k in self.RATIOS]


def format_ratio(x: Ratio, digits: int = 3) -> str:
    if x is None:
        return "n/a"
    return f"{float(x):.{digits}f}"


def compute_metrics(tp: int, fp: int, tn: int, fn: int, coverage: Optional[int] = None) -> Metrics:
    if min(tp, fp, tn, fn) < 0:
        raise ValueError("confusion counts must be non-negative")
    precision = _div(tp, tp + fp)
    recall = tpr = _div(tp, tp + fn)
    fpr = _div(fp, fp + tn)
    fnr = _div(fn, tp + fn)
    tnr = _div(tn, fp + tn)
    f1 = None
    if precision is not None and recall is not None:
        f1 = _div(2 * precision * recall, precision + recall)
    lr_plus = _div(tpr, fpr)
    lr_minus = _div(fnr, tnr)
    return Metrics(
        tp, fp, tn, fn, precision, recall, _div(tp + tn, tp + fp + tn + fn), f1,
        _div(lr_plus, lr_minus), lr_plus, lr_minus, tpr, fpr, fnr, tnr,
        tp + fp + tn + fn if coverage is None else coverage,
    )


# ------------------------------------------------------------ manifest


@dataclass(frozen=True)
class ManifestEntry:
    path: str  # resolved against the manifest directory
    name: str  # as written in the manifest
    expected_race: bool
    line: int


def parse_manifest(text: str, base_dir: str = ".") -> list[ManifestEntry]:
    """``<path>\\t<yes|no>`` per line; ``#`` starts a comment; paths are relative to ``base_dir``."""
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ManifestParseError(n, "expected '<path>\\t<yes|no>'")
        path, label = parts[0].strip(), parts[1].strip().lower()
        if not path or label not in ("yes", "no"):
            raise ManifestParseError(n, f"bad entry {raw.strip()!r}")
        out.append(ManifestEntry(os.path.join(base_dir, path), path, label == "yes", n))
    return out


def read_manifest(path: str) -> list[ManifestEntry]:
    with open(path, encoding="utf-8") as f:
        return parse_manifest(f.read(), os.path.dirname(os.path.abspath(path)))


@dataclass
class KernelOutcome:
    path: str
    expected_race: bool
    covered: bool
    races: int
    outcome: str  # TP FP TN FN or "skipped"


@dataclass
class BenchResult:
    metrics: Metrics
    kernels: list[KernelOutcome] = field(default_factory=list)


def outcome(expected: bool, reported: bool) -> str:
    if expected:
        return "TP" if reported else "FN"
    return "FP" if reported else "TN"


def evaluate_benchmarks(manifest_path: str, bound: int = INF, mhp_engine: bool = True) -> BenchResult:
    from .pipeline import analyze_file

    counts = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
    kernels = []
    for e in read_manifest(manifest_path):
        res = analyze_file(e.path, bound, mhp_engine)
        if not res.covered:
            kernels.append(KernelOutcome(e.name, e.expected_race, False, 0, "skipped"))
            continue
        o = outcome(e.expected_race, bool(res.races))
        counts[o] += 1
        kernels.append(KernelOutcome(e.name, e.expected_race, True, len(res.races), o))
    m = compute_metrics(counts["TP"], counts["FP"], counts["TN"], counts["FN"])
    return BenchResult(m, kernels)
