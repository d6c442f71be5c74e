import random

import pytest

from conftest import corpus_path
from graphgen import all_paths, random_dag
from phaserace.cfg import build_cfgs
from phaserace.errors import MalformedNesting
from phaserace.frontend import parse_source
from phaserace.taskgraph import Guard, Multiplicity, build_taskgraph

M, S = Multiplicity.MULTI_INSTANCE, Multiplicity.SINGLE_INSTANCE


def graph(src):
    ast = parse_source(src, "t.c")
    cfgs = build_cfgs(ast)
    return build_taskgraph(cfgs), cfgs


def named_edges(g):
    return {(g.nodes[a].name, g.nodes[b].name) for a, b in g.edges}


def test_single2_taskgraph():
    g, _ = graph(open(corpus_path("single2_norace.c")).read())
    assert [n.name for n in g.nodes] == ["R", "S1", "S2", "bar1", "S3", "S4", "bar2", "S5", "T"]
    assert named_edges(g) == {
        ("R", "S1"), ("S1", "S2"), ("S1", "bar1"), ("S2", "bar1"), ("bar1", "S3"),
        ("S3", "S4"), ("S3", "bar2"), ("S4", "bar2"), ("bar2", "S5"), ("S5", "T"),
    }
    assert len(g.edges) == 10
    mult = {n.name: n.multiplicity for n in g.nodes[1:-1]}
    assert mult == {"S1": M, "S2": S, "bar1": M, "S3": M, "S4": S, "bar2": M, "S5": M}
    assert g.nodes[1].is_parallel_entry and g.nodes[-1].is_parallel_exit
    assert {(g.nodes[a].name, g.nodes[b].name) for a, b in g.bypass_edges} == {("S1", "bar1"), ("S3", "bar2")}


def test_empty_parallel_region_is_a_chain():
    g, _ = graph("void f() {\n#pragma omp parallel\n{\n}\n}")
    assert [n.name for n in g.nodes] == ["R", "S1", "T"]
    assert g.edges == [(0, 1), (1, 2)]
    assert g.nodes[1].is_parallel_entry and g.nodes[2].is_parallel_exit


def test_drb013_nodes():
    g, _ = graph(open(corpus_path("drb013_nowait_race.c")).read())
    body = [n for n in g.nodes if n.cfg_block and n.guard == frozenset() and n.in_parallel
            and not n.changes_phase and not n.is_loop_header]
    assert all(n.multiplicity is M for n in body)
    single = [n for n in g.nodes if Guard("single") in n.guard]
    assert len(single) == 1 and single[0].multiplicity is S
    assert sum(n.is_barrier for n in g.nodes) == 1
    assert sum(n.is_parallel_exit for n in g.nodes) == 1


def test_node_count_and_sentinel_degrees_on_corpus():
    import glob
    for path in glob.glob(corpus_path("*.c")):
        src = open(path).read()
        if "omp task" in src:
            continue
        g, cfgs = graph(src)
        assert len(g.nodes) == sum(len(c.blocks) for c in cfgs) + 2
        assert not g.preds(g.root) and not g.succs(g.terminal)
        assert g.nodes[g.root].cfg_block is None and g.nodes[g.terminal].cfg_block is None


def test_single_bodies_are_bypassable():
    g, _ = graph(open(corpus_path("single2_norace.c")).read())
    for n in g.nodes:
        if Guard("single") not in n.guard:
            continue
        avoid = [p for p in all_paths(g, g.root, g.terminal) if n.id not in p]
        assert avoid


def dominators(g):
    dom = {n.id: {x.id for x in g.nodes} for n in g.nodes}
    dom[g.root] = {g.root}
    changed = True
    while changed:
        changed = False
        for n in g.nodes:
            if n.id == g.root or not g.preds(n.id):
                continue
            new = {n.id} | set.intersection(*(dom[p] for p in g.preds(n.id)))
            if new != dom[n.id]:
                dom[n.id], changed = new, True
    return dom


@pytest.mark.parametrize("name", ["loop_single_reuse_race.c", "single2_norace.c", "master_race.c",
                                  "sections_race.c"])
def test_single_instance_region_dominator_dominates_its_nodes(name):
    g, cfgs = graph(open(corpus_path(name)).read())
    dom = dominators(g)
    marked = 0
    for cfg in cfgs:
        for r in cfg.regions:
            d = g.block_node[(cfg.function, r.dom)]
            for b in cfg.blocks:
                if r.frame in b.directive_context:
                    n = g.block_node[(cfg.function, b.id)]
                    assert g.nodes[n].multiplicity is S
                    assert d in dom[n]
                    marked += 1
    assert marked or name == "sections_race.c"


def test_master_and_critical_guards():
    g, _ = graph("void f() {\n#pragma omp parallel\n{\n#pragma omp master\nx = 1;\n"
                 "#pragma omp critical(lk)\ny = 2;\n}\n}")
    guards = [n.guard for n in g.nodes if n.guard]
    kinds = sorted(next(iter(gs)).kind for gs in guards)
    assert kinds == ["critical", "master"]
    crit = next(gs for gs in guards if next(iter(gs)).kind == "critical")
    assert Guard("critical", "lk") in crit
    crit_node = next(n for n in g.nodes if n.guard == crit)
    assert crit_node.multiplicity is M


@pytest.mark.parametrize("src", [
    "void f() {\n#pragma omp parallel\n{\n#pragma omp single\n{\n#pragma omp barrier\n}\n}\n}",
    "void f() {\n#pragma omp parallel\n{\n#pragma omp critical\n{\n#pragma omp single\nx = 1;\n}\n}\n}",
    "void f() {\n#pragma omp parallel\n{\n#pragma omp for\nfor (i = 0; i < 4; i++) {\n"
    "#pragma omp for\nfor (j = 0; j < 4; j++) x = 1;\n}\n}\n}",
    "void f() {\n#pragma omp parallel\n{\n#pragma omp section\nx = 1;\n}\n}",
])
def test_malformed_nesting(src):
    with pytest.raises(MalformedNesting):
        graph(src)


def test_nested_parallel_inside_single_is_fine():
    g, _ = graph("void f() {\n#pragma omp parallel\n{\n#pragma omp single\n{\n#pragma omp parallel\n"
                 "{\n#pragma omp barrier\n}\n}\n}\n}")
    assert sum(n.is_barrier for n in g.nodes) == 2


def test_random_dags_are_rooted():
    rng = random.Random(3)
    for _ in range(50):
        g = random_dag(rng)
        for n in g.nodes:
            assert list(all_paths(g, g.root, n.id))
