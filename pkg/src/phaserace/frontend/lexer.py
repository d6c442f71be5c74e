"""Tokenizer for mini-OMP-C.

``#pragma`` lines become a ``PRAGMA_START`` token followed by the line's
tokens, all flagged ``pragma=True``; the parser uses the flag to find where
a directive ends.  ``#include`` lines are skipped.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..errors import IllegalCharacter
from .ast import SourceLoc


class TokenKind(enum.Enum):
    PRAGMA_START = "pragma"
    IDENT = "ident"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    OP = "op"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    loc: SourceLoc
    pragma: bool = False

    def __repr__(self) -> str:
        return f"{self.kind.name}({self.text!r})@{self.loc.line}:{self.loc.col}"


# longest first
_OPERATORS = (
    "<<=", ">>=",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "->",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "(", ")", "[", "]", "{", "}", ";", ",", ":",
    "?", "&", "|", "^", "~", ".",
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"0[xX][0-9a-fA-F]+[uUlL]*|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[fFlLuU]*")
_PP = re.compile(r"#[ \t]*([A-Za-z_]*)")


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    in_pragma = False
    at_line_start = True

    def loc() -> SourceLoc:
        return SourceLoc(file, line, col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line, col = line + 1, 1
            in_pragma = False
            at_line_start = True
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if in_pragma and ch == "\\" and source.startswith("\n", i + 1):
            # line continuation inside a pragma
            i += 2
            line, col = line + 1, 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise IllegalCharacter(loc(), "unterminated comment")
            chunk = source[i:end + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = end + 2
            continue
        if ch == "#":
            if not at_line_start:
                raise IllegalCharacter(loc(), "'#' must start a preprocessor line")
            m = _PP.match(source, i)
            word = m.group(1)
            if word == "pragma":
                tokens.append(Token(TokenKind.PRAGMA_START, "#pragma", loc(), True))
                col += m.end() - i
                i = m.end()
                in_pragma = True
                at_line_start = False
                continue
            if word == "include":
                while i < n and source[i] != "\n":
                    i += 1
                    col += 1
                continue
            raise IllegalCharacter(loc(), f"unsupported preprocessor directive '#{word}'")
        at_line_start = False
        m = _IDENT.match(source, i)
        if m:
            tokens.append(Token(TokenKind.IDENT, m.group(), loc(), in_pragma))
        else:
            m = _NUMBER.match(source, i)
            if m:
                text = m.group()
                is_hex = text[:2] in ("0x", "0X")
                kind = TokenKind.FLOAT if not is_hex and any(c in text for c in ".eEfF") else TokenKind.INT
                if kind is TokenKind.INT:
                    text = text.rstrip("uUlL")
                tokens.append(Token(kind, text, loc(), in_pragma))
            elif ch in "\"'":
                j = i + 1
                while j < n and source[j] != ch:
                    if source[j] == "\n":
                        raise IllegalCharacter(loc(), "unterminated literal")
                    j += 2 if source[j] == "\\" else 1
                if j >= n:
                    raise IllegalCharacter(loc(), "unterminated literal")
                text = source[i:j + 1]
                tokens.append(Token(TokenKind.STRING, text, loc(), in_pragma))
                col += len(text)
                i = j + 1
                continue
            else:
                op = next((o for o in _OPERATORS if source.startswith(o, i)), None)
                if op is None:
                    raise IllegalCharacter(loc(), f"illegal character {ch!r}")
                tokens.append(Token(TokenKind.OP, op, loc(), in_pragma))
                i += len(op)
                col += len(op)
                continue
        width = m.end() - i
        i += width
        col += width
    tokens.append(Token(TokenKind.EOF, "", SourceLoc(file, line, col)))
    return tokens
