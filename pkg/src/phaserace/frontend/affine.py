"""Affine subscript extraction: ``2*i + n - 1`` -> terms {i: 2, n: 1}, constant -1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ast import BinOp, Expr, IntLit, UnOp, Var


@dataclass(frozen=True)
class AffineExpr:
    terms: tuple[tuple[str, int], ...] = ()  # sorted (identifier, coefficient), zeros dropped
    constant: int = 0
    symbolic: bool = False

    @classmethod
    def make(cls, terms: dict[str, int], constant: int) -> "AffineExpr":
        return cls(tuple(sorted((k, v) for k, v in terms.items() if v)), constant)

    @property
    def coeffs(self) -> dict[str, int]:
        return dict(self.terms)

    def is_constant(self) -> bool:
        return not self.symbolic and not self.terms

    def __str__(self) -> str:
        if self.symbolic:
            return "<non-affine>"
        parts = [f"{c}*{v}" if c != 1 else v for v, c in self.terms]
        if self.constant or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts)


SYMBOLIC = AffineExpr(symbolic=True)


def to_affine(e: Expr) -> AffineExpr:
    r = _lin(e)
    if r is None:
        return SYMBOLIC
    terms, const = r
    return AffineExpr.make(terms, const)


def _lin(e: Expr) -> Optional[tuple[dict[str, int], int]]:
    if isinstance(e, IntLit):
        return {}, e.value
    if isinstance(e, Var):
        return {e.name: 1}, 0
    if isinstance(e, UnOp) and e.op in "+-":
        r = _lin(e.operand)
        if r is None:
            return None
        s = -1 if e.op == "-" else 1
        return {k: s * v for k, v in r[0].items()}, s * r[1]
    if isinstance(e, BinOp) and e.op in ("+", "-"):
        a, b = _lin(e.left), _lin(e.right)
        if a is None or b is None:
            return None
        s = 1 if e.op == "+" else -1
        terms = dict(a[0])
        for k, v in b[0].items():
            terms[k] = terms.get(k, 0) + s * v
        return terms, a[1] + s * b[1]
    if isinstance(e, BinOp) and e.op == "*":
        a, b = _lin(e.left), _lin(e.right)
        if a is None or b is None:
            return None
        if not a[0]:
            a, b = b, a
        if b[0]:
            return None  # product of two variables
        c = b[1]
        return {k: v * c for k, v in a[0].items()}, a[1] * c
    return None
