"""Lexer, parser, AST and pretty-printer for the mini-OMP-C input language."""

from .affine import AffineExpr, to_affine
from .ast import Ast, Directive, DirectiveKind, SourceLoc
from .lexer import Token, TokenKind, tokenize
from .parser import parse, parse_source
from .printer import format_program

__all__ = [
    "AffineExpr", "Ast", "Directive", "DirectiveKind", "SourceLoc", "Token", "TokenKind",
    "format_program", "parse", "parse_source", "to_affine", "tokenize",
]
