import random

import pytest

from conftest import corpus_path
from phaserace.cfg import BasicBlock, Cfg, build_cfg, build_cfgs, normalize_barriers, root_functions
from phaserace.frontend import parse_source
from phaserace.frontend.ast import Assign, BarrierStmt, Directive, DirectiveKind, IntLit, Var


def cfgs_of(src):
    return build_cfgs(parse_source(src, "t.c"))


def read(name):
    return open(corpus_path(name)).read()


def roles(cfg):
    return [b.role for b in cfg.blocks]


def check_shape(cfg):
    assert not cfg.preds(cfg.entry)
    assert not cfg.succs(cfg.exit)
    seen, todo = {cfg.entry}, [cfg.entry]
    while todo:
        for w in cfg.succs(todo.pop()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    assert seen == {b.id for b in cfg.blocks}


def test_single2_blocks():
    (cfg,) = cfgs_of(read("single2_norace.c"))
    assert roles(cfg) == ["entry", "plain", "barrier", "plain", "plain", "barrier", "plain"]
    assert cfg.edges == [(i, i + 1) for i in range(6)]
    assert [(r.kind, r.dom, r.post) for r in cfg.regions] == [("single", 0, 2), ("single", 3, 5)]
    assert cfg.ends_in_parallel
    check_shape(cfg)


def test_drb013_nowait_leaves_single_barrier_only():
    (cfg,) = cfgs_of(read("drb013_nowait_race.c"))
    assert roles(cfg).count("barrier") == 1
    assert roles(cfg).count("exit") == 1
    header = next(b for b in cfg.blocks if b.role == "header")
    # the loop exit flows into the single's dominator without a barrier in between
    assert all(cfg.block(s).role != "barrier" for s in cfg.succs(header.id))
    bar = next(b for b in cfg.blocks if b.role == "barrier")
    assert cfg.regions[0].post == bar.id
    check_shape(cfg)


def test_drb013_without_nowait_has_two_barriers():
    (cfg,) = cfgs_of(read("drb013_barrier_norace.c"))
    assert roles(cfg).count("barrier") == 2


def test_straight_line_function_is_one_block():
    (cfg,) = cfgs_of("void f() { x = 1; y = x; }")
    assert len(cfg.blocks) == 1 and cfg.entry == cfg.exit == 0
    assert len(cfg.blocks[0].stmts) == 2


def test_if_else_diamond():
    (cfg,) = cfgs_of("void f() { if (c) x = 1; else x = 2; y = x; }")
    assert len(cfg.blocks) == 4
    assert sorted(cfg.edges) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_loop_has_header_body_latch_and_back_edge():
    (cfg,) = cfgs_of("void f() { for (i = 0; i < 4; i++) x = i; }")
    h = next(b for b in cfg.blocks if b.role == "header")
    latch = next(b for b in cfg.blocks if b.role == "latch")
    assert (latch.id, h.id) in cfg.edges
    assert h.trip_count == 4
    check_shape(cfg)


@pytest.mark.parametrize("directive, barriers", [
    ("for", 1), ("for nowait", 0), ("single", 1), ("single nowait", 0), ("master", 0),
])
def test_implicit_barriers(directive, barriers):
    body = "for (i = 0; i < 4; i++) x = i;" if directive.startswith("for") else "x = 1;"
    src = f"void f() {{\n#pragma omp parallel\n{{\n#pragma omp {directive}\n{body}\n}}\n}}"
    (cfg,) = cfgs_of(src)
    assert roles(cfg).count("barrier") == barriers
    assert cfg.ends_in_parallel


def test_parallel_exit_is_kept_when_region_is_not_last():
    (cfg,) = cfgs_of("void f() {\n#pragma omp parallel\n{\n}\nx = 1;\n}")
    assert roles(cfg) == ["entry", "exit", "plain"]


def test_sections_branch_and_reconverge():
    (cfg,) = cfgs_of(read("sections_race.c"))
    bar = next(b for b in cfg.blocks if b.role == "barrier")
    assert len(cfg.preds(bar.id)) == 2
    dom = {cfg.preds(p)[0] for p in cfg.preds(bar.id)}
    assert len(dom) == 1


def test_same_file_call_is_inlined_with_array_renamed():
    (cfg,) = cfgs_of(read("inlined_call_race.c"))
    names = {s.target.name for b in cfg.blocks for s in b.stmts if isinstance(s, Assign)}
    assert names == {"data"}
    assert cfg.call_edges and cfg.call_edges[0][1] == "bump"


def test_recursive_and_external_calls_are_opaque_with_warning():
    ast = parse_source("void g() { g(); }\nvoid main() { g(); h(); }", "t.c")
    cfgs = build_cfgs(ast)
    texts = [d.text for c in cfgs for d in c.warnings]
    assert any("'h'" in t for t in texts)
    assert any("'g'" in t and "not inlined" in t for t in texts)


def test_roots_exclude_called_functions_and_put_main_first():
    ast = parse_source("void helper() { x = 1; }\nvoid other() { }\nvoid main() { helper(); }")
    assert [f.name for f in root_functions(ast)] == ["main", "other"]


# ------------------------------------------------------------------ normalize_barriers

def stmt(n):
    return Assign(Var(f"v{n}"), "=", IntLit(n))


BAR = BarrierStmt(Directive(DirectiveKind.BARRIER))


def one_block_cfg(stmts):
    b = BasicBlock(0, list(stmts), [{}] * len(stmts), has_barrier=BAR in stmts)
    return Cfg("f", [b], [], 0, 0)


def test_split_two_barriers_into_three_blocks():
    cfg = normalize_barriers(one_block_cfg([stmt(1), BAR, stmt(2), BAR]))
    assert [b.stmts for b in cfg.blocks] == [[stmt(1), BAR], [stmt(2), BAR], []]
    assert cfg.edges == [(0, 1), (1, 2)]
    assert cfg.exit == 2


def test_block_without_barrier_is_unchanged():
    cfg = one_block_cfg([stmt(1), stmt(2)])
    assert normalize_barriers(cfg) is cfg


def test_single2_is_already_normalized():
    ast = parse_source(read("single2_norace.c"))
    raw = build_cfg(ast.functions[0], ast)
    assert normalize_barriers(raw) is raw


def random_cfg(rng):
    n = rng.randint(1, 6)
    blocks = []
    for i in range(n):
        stmts = [BAR if rng.random() < 0.35 else stmt(rng.randint(0, 9)) for _ in range(rng.randint(0, 4))]
        blocks.append(BasicBlock(i, stmts, [{}] * len(stmts), has_barrier=BAR in stmts))
    edges = set()
    for j in range(1, n):
        edges.add((rng.randrange(0, j), j))
        for i in range(j):
            if rng.random() < 0.25:
                edges.add((i, j))
    # single exit: connect every sink to the last block
    for i in range(n - 1):
        if not any(a == i for a, _ in edges):
            edges.add((i, n - 1))
    return Cfg("f", blocks, sorted(edges), 0, n - 1)


def stmt_paths(cfg):
    succ = {b.id: [y for x, y in cfg.edges if x == b.id] for b in cfg.blocks}
    out = set()

    def walk(b, acc):
        acc = acc + tuple(cfg.blocks[b].stmts)
        if b == cfg.exit:
            out.add(acc)
        for w in succ[b]:
            walk(w, acc)

    walk(cfg.entry, ())
    return out


def test_normalization_preserves_paths_and_bounds_barriers():
    rng = random.Random(7)
    for _ in range(300):
        cfg = random_cfg(rng)
        before = stmt_paths(cfg)
        norm = normalize_barriers(cfg)
        assert stmt_paths(norm) == before
        for b in norm.blocks:
            k = sum(isinstance(s, BarrierStmt) for s in b.stmts)
            assert k <= 1
            if k:
                assert isinstance(b.stmts[-1], BarrierStmt)
