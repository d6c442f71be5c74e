"""Pretty-printer producing re-parsable mini-OMP-C text."""

from __future__ import annotations

from .ast import (
    Assign, Ast, BarrierStmt, BinOp, Block, Call, CallExpr, Clause, ClauseKind, Decl, Directive,
    DirectiveKind, Eval, FloatLit, ForLoop, FunctionDecl, If, Index, IntLit, PragmaBlock, Return,
    StrLit, UnOp, Var,
)

_PREC = {"||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7,
         ">=": 7, "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10}


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, FloatLit):
        return e.text
    if isinstance(e, StrLit):
        return e.text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, CallExpr):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, UnOp):
        inner = format_expr(e.operand, 11)
        if isinstance(e.operand, UnOp):
            inner = f"({inner})"  # avoid lexing `- -x` as `--x`
        return f"{e.op}{inner}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        # left-associative: the right operand needs parens at equal precedence
        s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"not an expression: {e!r}")


def format_clause(c: Clause) -> str:
    if c.kind is ClauseKind.NOWAIT:
        return "nowait"
    if c.kind is ClauseKind.REDUCTION:
        return f"reduction({c.arg}: {', '.join(c.vars)})"
    if c.kind in (ClauseKind.NUM_THREADS, ClauseKind.SCHEDULE):
        return f"{c.kind.value}({c.arg})"
    return f"{c.kind.value}({', '.join(c.vars)})"


def format_directive(d: Directive) -> str:
    head = d.kind.value
    if d.kind is DirectiveKind.CRITICAL and d.name:
        head += f"({d.name})"
    parts = [head] + [format_clause(c) for c in d.clauses]
    return "#pragma omp " + " ".join(parts)


def _stmt_lines(s, ind: int) -> list[str]:
    pad = "  " * ind
    if isinstance(s, Decl):
        items = []
        for it in s.items:
            t = it.name
            if it.is_array:
                t += f"[{format_expr(it.size) if it.size is not None else ''}]"
            if it.init is not None:
                t += f" = {format_expr(it.init)}"
            items.append(t)
        return [f"{pad}{s.type} {', '.join(items)};"]
    if isinstance(s, Assign):
        tgt = format_expr(s.target)
        if s.op in ("++", "--"):
            return [f"{pad}{tgt}{s.op};"]
        return [f"{pad}{tgt} {s.op} {format_expr(s.value)};"]
    if isinstance(s, Call):
        return [f"{pad}{s.name}({', '.join(format_expr(a) for a in s.args)});"]
    if isinstance(s, Return):
        return [f"{pad}return{'' if s.value is None else ' ' + format_expr(s.value)};"]
    if isinstance(s, Eval):
        return [f"{pad}/* eval */ {format_expr(s.expr)};"]
    if isinstance(s, BarrierStmt):
        return ["#pragma omp barrier"] if s.directive is not None else [f"{pad}// implicit barrier"]
    if isinstance(s, Block):
        out = [f"{pad}{{"]
        for x in s.stmts:
            out += _stmt_lines(x, ind + 1)
        return out + [f"{pad}}}"]
    if isinstance(s, If):
        out = [f"{pad}if ({format_expr(s.cond)})"] + _as_block(s.then, ind)
        if s.orelse is not None:
            out += [f"{pad}else"] + _as_block(s.orelse, ind)
        return out
    if isinstance(s, ForLoop):
        typ = f"{s.decl_type} " if s.decl_type else ""
        inc = f"{s.var}++" if s.step == 1 else f"{s.var} += {s.step}"
        head = (f"{pad}for ({typ}{s.var} = {format_expr(s.init)}; {s.var} {s.relop} "
                f"{format_expr(s.bound)}; {inc})")
        return [head] + _as_block(s.body, ind)
    if isinstance(s, PragmaBlock):
        if s.directive.kind is DirectiveKind.SECTIONS:
            out = [format_directive(s.directive), f"{pad}{{"]
            for sec in s.body.stmts:
                out += _stmt_lines(sec, ind + 1)
            return out + [f"{pad}}}"]
        return [format_directive(s.directive)] + _stmt_lines(s.body, ind)
    raise TypeError(f"not a statement: {s!r}")


def _as_block(s, ind: int) -> list[str]:
    """Body of an if/for: braces stay as parsed, a lone statement is indented."""
    if isinstance(s, Block):
        return _stmt_lines(s, ind)
    return _stmt_lines(s, ind + 1)


def format_function(fn: FunctionDecl) -> str:
    params = ", ".join(f"{p.type} {p.name}{'[]' if p.is_array else ''}" for p in fn.params)
    return "\n".join([f"{fn.ret_type} {fn.name}({params})"] + _stmt_lines(fn.body, 0))


def format_program(ast: Ast) -> str:
    chunks = []
    for g in ast.globals:
        chunks += _stmt_lines(g, 0)
    if ast.threadprivate:
        chunks.append(f"#pragma omp threadprivate({', '.join(ast.threadprivate)})")
    out = "\n".join(chunks)
    fns = "\n\n".join(format_function(f) for f in ast.functions)
    return (out + "\n\n" if out else "") + fns + "\n"
