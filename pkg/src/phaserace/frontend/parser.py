"""Recursive-descent parser for mini-OMP-C."""

from __future__ import annotations

from typing import Optional

from .. import diagnostics as diag
from ..errors import OmpSyntaxError
from .ast import (
    Assign, Ast, BarrierStmt, BinOp, Block, Call, CallExpr, Clause, ClauseKind, Decl, Declarator,
    Directive, DirectiveKind, Expr, FloatLit, ForLoop, FunctionDecl, If, Index, IntLit,
    LOOP_DIRECTIVES, Param, PragmaBlock, REDUCTION_OPS, Return, SourceLoc, Stmt, StrLit, UnOp, Var,
)
from .lexer import Token, TokenKind, tokenize

TYPE_WORDS = frozenset(
    {"void", "int", "long", "short", "char", "float", "double", "unsigned", "signed", "const", "size_t"}
)

_ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")

# binary precedence climbing table
_BINARY = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
)

_IGNORED_CLAUSES = frozenset(
    {"collapse", "map", "default", "ordered", "num_teams", "thread_limit", "dist_schedule",
     "if", "device", "proc_bind", "safelen", "simdlen", "aligned", "linear", "copyin",
     "copyprivate", "defaultmap", "is_device_ptr", "seq_cst", "hint"}
)

_VAR_CLAUSES = {
    "shared": ClauseKind.SHARED,
    "private": ClauseKind.PRIVATE,
    "firstprivate": ClauseKind.FIRSTPRIVATE,
    "lastprivate": ClauseKind.LASTPRIVATE,
}

# unsupported directives that stand alone (no associated statement)
_STANDALONE_UNSUPPORTED = frozenset(
    {"taskwait", "taskyield", "flush", "cancel", "cancellation", "depobj", "scan", "requires",
     "declare", "end"}
)

_ATOMIC_MODIFIERS = frozenset({"read", "write", "update", "capture", "seq_cst"})


class Parser:
    def __init__(self, tokens: list[Token], path: str = "<input>"):
        self.toks = tokens
        self.pos = 0
        self.path = path
        self.diagnostics: list = []
        self.threadprivate: list[str] = []

    # ---------------------------------------------------------------- helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind is not TokenKind.EOF:
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in (TokenKind.OP, TokenKind.IDENT) and not t.pragma

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(repr(text))
        return self.advance()

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind is not TokenKind.IDENT or t.pragma:
            self.error("identifier")
        return self.advance()

    def error(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind is TokenKind.EOF else t.text
        if t.pragma and t.kind is TokenKind.PRAGMA_START:
            found = "#pragma"
        raise OmpSyntaxError(t.loc, expected, found)

    def at_type(self) -> bool:
        t = self.tok
        return t.kind is TokenKind.IDENT and not t.pragma and t.text in TYPE_WORDS

    def parse_type(self) -> str:
        words = []
        while self.at_type():
            words.append(self.advance().text)
        if not words:
            self.error("type name")
        return " ".join(words)

    # ---------------------------------------------------------------- program

    def parse_program(self) -> Ast:
        ast = Ast(path=self.path)
        while self.tok.kind is not TokenKind.EOF:
            if self.tok.kind is TokenKind.PRAGMA_START:
                stmt = self.parse_pragma()
                if stmt is not None:
                    self.error("function or declaration after top-level pragma")
                continue
            start = self.tok
            typ = self.parse_type()
            name = self.expect_ident()
            if self.at("("):
                ast.functions.append(self.parse_function(typ, name, start.loc))
            else:
                ast.globals.append(self.finish_decl(typ, name, start.loc))
        ast.threadprivate = self.threadprivate
        ast.diagnostics = self.diagnostics
        return ast

    def parse_function(self, typ: str, name: Token, loc: SourceLoc) -> FunctionDecl:
        self.expect("(")
        params: list[Param] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                ploc = self.tok.loc
                ptype = self.parse_type()
                is_ptr = bool(self.accept("*"))
                pname = self.expect_ident()
                is_array = is_ptr
                if self.accept("["):
                    if not self.at("]"):
                        self.parse_expr()
                    self.expect("]")
                    is_array = True
                params.append(Param(ptype, pname.text, is_array, ploc))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return FunctionDecl(typ, name.text, tuple(params), body, loc)

    def finish_decl(self, typ: str, first: Token, loc: SourceLoc) -> Decl:
        items = [self.parse_declarator(first)]
        while self.accept(","):
            items.append(self.parse_declarator(self.expect_ident()))
        self.expect(";")
        return Decl(typ, tuple(items), loc)

    def parse_declarator(self, name: Token) -> Declarator:
        size = None
        is_array = False
        if self.accept("["):
            is_array = True
            if not self.at("]"):
                size = self.parse_expr()
            self.expect("]")
        init = None
        op_loc = None
        if self.at("="):
            op_loc = self.advance().loc
            init = self.parse_expr()
        return Declarator(name.text, size, init, is_array, name.loc, op_loc)

    # -------------------------------------------------------------- statements

    def parse_block(self) -> Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind is TokenKind.EOF:
                self.error("'}'")
            s = self.parse_stmt_or_none()
            if s is not None:
                stmts.append(s)
        self.expect("}")
        return Block(tuple(stmts), start.loc)

    def parse_stmt(self) -> Stmt:
        while True:
            s = self.parse_stmt_or_none()
            if s is not None:
                return s
            if self.at("}") or self.tok.kind is TokenKind.EOF:
                self.error("statement")

    def parse_stmt_or_none(self) -> Optional[Stmt]:
        """One statement; None for constructs that produce nothing (`;`, standalone
        unsupported pragmas, threadprivate)."""
        t = self.tok
        if t.kind is TokenKind.PRAGMA_START:
            return self.parse_pragma()
        if self.accept(";"):
            return None
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            return self.parse_if()
        if self.at("for"):
            return self.parse_for()
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return Return(value, t.loc)
        if self.at_type():
            typ = self.parse_type()
            return self.finish_decl(typ, self.expect_ident(), t.loc)
        return self.parse_simple_stmt()

    def parse_simple_stmt(self) -> Stmt:
        t = self.tok
        if self.at("++") or self.at("--"):
            op = self.advance()
            target = self.parse_lvalue()
            self.expect(";")
            return Assign(target, op.text, None, t.loc, op.loc)
        name = self.expect_ident()
        if self.at("("):
            args = self.parse_args()
            self.expect(";")
            return Call(name.text, args, t.loc)
        target = self.finish_lvalue(name)
        if self.at("++") or self.at("--"):
            op = self.advance()
            self.expect(";")
            return Assign(target, op.text, None, t.loc, op.loc)
        if self.tok.text not in _ASSIGN_OPS or self.tok.kind is not TokenKind.OP:
            self.error("assignment operator")
        op = self.advance()
        value = self.parse_expr()
        self.expect(";")
        return Assign(target, op.text, value, t.loc, op.loc)

    def parse_lvalue(self):
        return self.finish_lvalue(self.expect_ident())

    def finish_lvalue(self, name: Token):
        if self.accept("["):
            idx = self.parse_expr()
            self.expect("]")
            if self.at("["):
                self.error("';' (multi-dimensional arrays are not supported)")
            return Index(name.text, idx, name.loc)
        return Var(name.text, name.loc)

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_stmt()
        orelse = None
        if self.accept("else"):
            orelse = self.parse_stmt()
        return If(cond, then, orelse, t.loc)

    def parse_for(self) -> ForLoop:
        t = self.expect("for")
        self.expect("(")
        decl_type = self.parse_type() if self.at_type() else None
        var = self.expect_ident()
        self.expect("=")
        init = self.parse_expr()
        self.expect(";")
        cvar = self.expect_ident()
        if cvar.text != var.text:
            raise OmpSyntaxError(cvar.loc, f"loop variable {var.text!r}", cvar.text)
        if self.tok.text not in ("<", "<=", ">", ">=", "!="):
            self.error("relational operator")
        relop = self.advance().text
        bound = self.parse_expr()
        self.expect(";")
        step = self.parse_increment(var.text)
        self.expect(")")
        body = self.parse_stmt()
        return ForLoop(var.text, init, relop, bound, step, body, decl_type, t.loc, var.loc)

    def parse_increment(self, var: str) -> int:
        if self.accept("++"):
            v = self.expect_ident()
            if v.text != var:
                raise OmpSyntaxError(v.loc, f"loop variable {var!r}", v.text)
            return 1
        v = self.expect_ident()
        if v.text != var:
            raise OmpSyntaxError(v.loc, f"loop variable {var!r}", v.text)
        if self.accept("++"):
            return 1
        self.expect("+=")
        if self.tok.kind is not TokenKind.INT:
            self.error("integer step")
        step = _int_value(self.advance())
        if step <= 0:
            raise OmpSyntaxError(self.tok.loc, "positive step", str(step))
        return step

    # ---------------------------------------------------------------- pragmas

    def pragma_tokens(self) -> list[Token]:
        """Consume a whole pragma line and return the tokens after ``#pragma``."""
        self.advance()
        out = []
        while self.tok.pragma and self.tok.kind is not TokenKind.PRAGMA_START:
            out.append(self.advance())
        return out

    def parse_pragma(self) -> Optional[Stmt]:
        start = self.tok
        toks = self.pragma_tokens()
        text = " ".join(t.text for t in toks)
        if not toks or toks[0].text != "omp":
            self.diagnostics.append(diag.warning(start.loc, f"ignoring non-OpenMP pragma '{text}'"))
            return None
        return _PragmaParser(self, toks[1:], start.loc, text).parse()

    # ------------------------------------------------------------ expressions

    def parse_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def parse_expr(self, level: int = 0) -> Expr:
        if level == len(_BINARY):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while self.tok.kind is TokenKind.OP and not self.tok.pragma and self.tok.text in _BINARY[level]:
            op = self.advance()
            right = self.parse_expr(level + 1)
            left = BinOp(op.text, left, right, op.loc)
        return left

    def parse_unary(self) -> Expr:
        t = self.tok
        if t.kind is TokenKind.OP and not t.pragma and t.text in ("-", "!", "+", "~"):
            self.advance()
            return UnOp(t.text, self.parse_unary(), t.loc)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.tok
        if t.pragma:
            self.error("expression")
        if t.kind is TokenKind.INT:
            self.advance()
            return IntLit(_int_value(t), t.loc)
        if t.kind is TokenKind.FLOAT:
            self.advance()
            return FloatLit(t.text, t.loc)
        if t.kind is TokenKind.STRING:
            self.advance()
            return StrLit(t.text, t.loc)
        if t.kind is TokenKind.IDENT and t.text not in TYPE_WORDS:
            self.advance()
            if self.at("("):
                return CallExpr(t.text, self.parse_args(), t.loc)
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                return Index(t.text, idx, t.loc)
            return Var(t.text, t.loc)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        self.error("expression")


class _PragmaParser:
    """Parses the tokens of one ``#pragma omp`` line and its associated statement."""

    def __init__(self, outer: Parser, toks: list[Token], loc: SourceLoc, text: str):
        self.p = outer
        self.toks = toks
        self.i = 0
        self.loc = loc
        self.text = text

    def peek(self) -> Optional[str]:
        return self.toks[self.i].text if self.i < len(self.toks) else None

    def take(self) -> Token:
        if self.i >= len(self.toks):
            raise OmpSyntaxError(self.loc, "more pragma tokens", "end of line")
        t = self.toks[self.i]
        self.i += 1
        return t

    def take_text(self, text: str) -> Token:
        t = self.take()
        if t.text != text:
            raise OmpSyntaxError(t.loc, repr(text), t.text)
        return t

    def accept_word(self, word: str) -> bool:
        if self.peek() == word:
            self.i += 1
            return True
        return False

    def parse(self) -> Optional[Stmt]:
        if self.peek() is None:
            raise OmpSyntaxError(self.loc, "directive name", "end of line")
        kinds = self.directive_names()
        if kinds is None:
            return self.unsupported()
        if kinds == "threadprivate":
            self.take_text("(")
            self.p.threadprivate.extend(self.var_list())
            self.end()
            return None
        name = None
        if kinds[-1] is DirectiveKind.CRITICAL and self.peek() == "(":
            self.take()
            name = self.take().text
            self.take_text(")")
        if kinds[-1] is DirectiveKind.ATOMIC and self.peek() in _ATOMIC_MODIFIERS:
            self.take()
        clauses = self.clauses()
        dirs = [Directive(k, (), None, self.loc) for k in kinds[:-1]]
        dirs.append(Directive(kinds[-1], tuple(clauses), name, self.loc))
        last = dirs[-1]
        if last.kind is DirectiveKind.BARRIER:
            return BarrierStmt(last, self.loc)
        if last.kind is DirectiveKind.SECTIONS:
            body = self.parse_sections_body()
        else:
            body = self.p.parse_stmt()
            self.check_body(last, body)
        for d in reversed(dirs):
            body = PragmaBlock(d, body, self.loc)
        return body

    def directive_names(self):
        """Combined constructs map to a chain of directives, outermost first."""
        w = self.take().text
        K = DirectiveKind
        if w == "parallel":
            if self.accept_word("for"):
                self.accept_word("simd")
                return [K.PARALLEL_FOR]
            if self.accept_word("sections"):
                return [K.PARALLEL, K.SECTIONS]
            return [K.PARALLEL]
        if w == "for":
            self.accept_word("simd")
            return [K.FOR]
        if w == "simd":
            return [K.SIMD]
        if w in ("single", "master", "critical", "barrier", "sections", "section", "atomic"):
            return [K(w)]
        if w == "target":
            if self.peek() in ("data", "enter", "exit", "update"):
                return None
            chain = [K.TARGET]
            if self.peek() == "parallel":
                self.take()
                rest = self._after_parallel()
                return chain + rest
            if self.peek() == "teams":
                self.take()
                return chain + self._after_teams()
            return chain
        if w == "teams":
            return self._after_teams()
        if w == "distribute":
            return self._after_distribute()
        if w == "threadprivate":
            return "threadprivate"
        return None

    def _after_parallel(self):
        K = DirectiveKind
        if self.accept_word("for"):
            self.accept_word("simd")
            return [K.PARALLEL_FOR]
        return [K.PARALLEL]

    def _after_teams(self):
        K = DirectiveKind
        if self.accept_word("distribute"):
            return [K.TEAMS] + self._after_distribute()
        return [K.TEAMS]

    def _after_distribute(self):
        K = DirectiveKind
        if self.accept_word("parallel"):
            # distribute parallel for: one loop shared by both levels
            self.take_text("for")
            self.accept_word("simd")
            return [K.PARALLEL_FOR]
        self.accept_word("simd")
        return [K.DISTRIBUTE]

    def unsupported(self) -> Optional[Stmt]:
        self.p.diagnostics.append(diag.unsupported_pragma(self.loc, "omp " + self.text.split(" ", 1)[-1]))
        word = self.toks[0].text
        second = self.toks[1].text if len(self.toks) > 1 else None
        if word in _STANDALONE_UNSUPPORTED or (word == "ordered" and "depend" in self.text) \
                or (word == "target" and second in ("enter", "exit", "update")):
            return None
        if self.p.at("}") or self.p.tok.kind is TokenKind.EOF:
            return None
        # keep the associated statement, drop the directive
        return self.p.parse_stmt()

    def var_list(self) -> list[str]:
        names = []
        while True:
            t = self.take()
            if t.kind is not TokenKind.IDENT:
                raise OmpSyntaxError(t.loc, "variable name", t.text)
            names.append(t.text)
            if self.peek() == "[":
                # array section a[lo:len] is accepted and reduced to the base name
                depth = 0
                while True:
                    s = self.take().text
                    depth += s == "["
                    depth -= s == "]"
                    if depth == 0:
                        break
            sep = self.take()
            if sep.text == ")":
                return names
            if sep.text != ",":
                raise OmpSyntaxError(sep.loc, "',' or ')'", sep.text)

    def skip_parens(self) -> str:
        self.take_text("(")
        depth, parts = 1, []
        while True:
            t = self.take()
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    return " ".join(parts)
            parts.append(t.text)

    def clauses(self) -> list[Clause]:
        out = []
        while self.peek() is not None:
            if self.peek() == ",":
                self.take()
                continue
            t = self.take()
            w = t.text
            if w in _VAR_CLAUSES:
                self.take_text("(")
                out.append(Clause(_VAR_CLAUSES[w], tuple(self.var_list()), None, t.loc))
            elif w == "reduction":
                self.take_text("(")
                op = self.take().text
                if op not in REDUCTION_OPS:
                    raise OmpSyntaxError(t.loc, f"reduction operator from {REDUCTION_OPS}", op)
                self.take_text(":")
                out.append(Clause(ClauseKind.REDUCTION, tuple(self.var_list()), op, t.loc))
            elif w == "nowait":
                out.append(Clause(ClauseKind.NOWAIT, (), None, t.loc))
            elif w == "num_threads":
                out.append(Clause(ClauseKind.NUM_THREADS, (), self.skip_parens(), t.loc))
            elif w == "schedule":
                out.append(Clause(ClauseKind.SCHEDULE, (), self.skip_parens(), t.loc))
            elif w in _IGNORED_CLAUSES:
                if self.peek() == "(":
                    self.skip_parens()
            else:
                raise OmpSyntaxError(t.loc, "OpenMP clause", w)
        return out

    def end(self):
        if self.peek() is not None:
            t = self.toks[self.i]
            raise OmpSyntaxError(t.loc, "end of pragma", t.text)

    def check_body(self, d: Directive, body: Stmt):
        if d.kind in LOOP_DIRECTIVES and not isinstance(body, ForLoop):
            raise OmpSyntaxError(getattr(body, "loc", d.loc), f"for loop after '{d.kind.value}'",
                                 type(body).__name__)
        if d.kind is DirectiveKind.ATOMIC and not isinstance(body, Assign):
            raise OmpSyntaxError(getattr(body, "loc", d.loc), "assignment after 'atomic'",
                                 type(body).__name__)

    def parse_sections_body(self) -> Block:
        p = self.p
        open_ = p.expect("{")
        sections: list[Stmt] = []
        pending: list[Stmt] = []
        pending_loc = None
        while not p.at("}"):
            if p.tok.kind is TokenKind.EOF:
                p.error("'}'")
            t = p.tok
            if t.kind is TokenKind.PRAGMA_START and p.peek(2).text == "section" and p.peek(1).text == "omp" \
                    and p.peek(2).pragma:
                if pending:
                    sections.append(_implicit_section(pending, pending_loc))
                    pending = []
                p.pragma_tokens()
                body = p.parse_stmt()
                sections.append(PragmaBlock(Directive(DirectiveKind.SECTION, (), None, t.loc), body, t.loc))
                continue
            s = p.parse_stmt_or_none()
            if s is None:
                continue
            if sections:
                raise OmpSyntaxError(t.loc, "'#pragma omp section'", t.text)
            pending_loc = pending_loc or t.loc
            pending.append(s)
        if pending:
            sections.append(_implicit_section(pending, pending_loc))
        p.expect("}")
        return Block(tuple(sections), open_.loc)


def _int_value(t: Token) -> int:
    text = t.text
    try:
        if text[:2].lower() in ("0x", "0b", "0o"):
            return int(text, 0)
        if len(text) > 1 and text.startswith("0"):
            return int(text, 8)
        return int(text)
    except ValueError:
        raise OmpSyntaxError(t.loc, "integer literal", text) from None


def _implicit_section(stmts: list[Stmt], loc: SourceLoc) -> PragmaBlock:
    body = stmts[0] if len(stmts) == 1 else Block(tuple(stmts), loc)
    return PragmaBlock(Directive(DirectiveKind.SECTION, (), None, loc, implicit=True), body, loc)


def parse(tokens: list[Token], path: str = "<input>") -> Ast:
    return Parser(tokens, path).parse_program()


def parse_source(source: str, path: str = "<input>") -> Ast:
    return parse(tokenize(source, path), path)
