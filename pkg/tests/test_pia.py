import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus_path
from graphgen import BODIES, loop_program, path_oracle, random_dag, unrolled_header
from phaserace.cfg import build_cfgs
from phaserace.errors import NegativeDelta
from phaserace.frontend import parse_source
from phaserace.pia import (
    BOTTOM, INF, ONE, TOP, ZERO, PhaseInterval as PI, accelerate_loop, add, delta, format_interval, join,
    leq, meet, run_pia, scale, transfer, widen_with_thresholds,
)
from phaserace.taskgraph import TaskGraph, TgNode, build_taskgraph

BOUND = 50


def intervals(bound=BOUND):
    finite = st.tuples(st.integers(0, bound), st.integers(0, bound)).map(lambda t: PI(min(t), max(t)))
    return st.one_of(st.just(BOTTOM), finite)


def plain(n=1):
    return TgNode(n, "S")


def barrier(n=1):
    return TgNode(n, "bar", is_barrier=True)


def graph_of(src):
    return build_taskgraph(build_cfgs(parse_source(src, "t.c")))


# ------------------------------------------------------------------ operators

@pytest.mark.parametrize("a, b, expected", [
    (PI(1, 1), PI(2, 2), PI(1, 2)),
    (BOTTOM, PI(3, 5), PI(3, 5)),
    (ZERO, TOP, TOP),
])
def test_join(a, b, expected):
    assert join(a, b) == expected


@pytest.mark.parametrize("a, b, expected", [
    (PI(1, 3), PI(2, 5), PI(2, 3)),
    (PI(1, 1), PI(2, 2), BOTTOM),
])
def test_meet(a, b, expected):
    assert meet(a, b) == expected


def test_leq_examples():
    assert leq(PI(2, 3), PI(1, 4))
    assert not leq(PI(1, 4), PI(2, 3))
    assert leq(BOTTOM, PI(7, 7))


def test_scale_examples():
    assert scale(3, PI(1, 2)) == PI(3, 6)
    assert scale(0, PI(5, 9)) == ZERO
    assert scale(4, PI(2, INF)) == PI(8, INF)
    assert scale(10, PI(1, 2), bound=15) == PI(10, 15)


def test_delta_examples():
    assert delta(PI(1, 1), PI(2, 3)) == PI(1, 2)
    assert delta(PI(4, 9), PI(4, 9)) == ZERO
    assert delta(PI(0, 2), PI(1, 5)) == PI(1, 3)
    with pytest.raises(NegativeDelta):
        delta(PI(2, 3), PI(1, 5))


def test_add_saturates():
    assert add(PI(1, INF), ONE) == PI(2, INF)
    assert add(PI(9, 9), PI(3, 3), bound=10) == PI(10, 10)


def test_bottom_is_canonical():
    assert BOTTOM == PI(1, 0) and BOTTOM.is_bottom
    assert meet(PI(5, 6), PI(0, 1)) is BOTTOM


def test_transfer_examples_from_single2_kernel():
    s1 = TgNode(1, "S1", is_parallel_entry=True)
    assert transfer(s1, ZERO) == ONE
    assert transfer(plain(), ONE) == ONE
    assert transfer(barrier(), PI(2, 2)) == PI(3, 3)
    assert transfer(barrier(), BOTTOM) == BOTTOM


@pytest.mark.parametrize("old, new, t, expected", [
    (PI(2, 2), PI(2, 3), (0, INF), PI(2, INF)),
    (PI(2, 2), PI(2, 2), (0, INF), PI(2, 2)),
    (PI(2, 2), PI(2, 2), (1, 9), PI(2, 2)),
    (PI(3, 4), PI(2, 5), (1, 9), PI(1, 9)),
])
def test_widen_with_thresholds(old, new, t, expected):
    assert widen_with_thresholds(old, new, *t) == expected


def unroll(pi0, step, tc):
    """Header values over tc literal iterations of a body adding ``step``."""
    acc, cur = pi0, pi0
    for _ in range(tc):
        cur = add(cur, step)
        acc = join(acc, cur)
    return acc


def test_accelerate_matches_unrolled_iteration():
    assert accelerate_loop(ONE, PI(2, 2), 10) == PI(1, 11) == unroll(ONE, ONE, 10)


def test_accelerate_barrier_free_body():
    for tc in (0, 1, 7, 1000):
        assert accelerate_loop(ONE, ONE, tc) == ONE


def test_accelerate_unknown_trip_count_widens():
    assert accelerate_loop(ONE, PI(2, 2), None) == PI(1, INF)


def test_format_interval():
    assert format_interval(PI(2, INF)) == "[2,inf]"
    assert format_interval(PI(2, 7), bound=7) == "[2,inf]"
    assert format_interval(BOTTOM) == "bot"


# ------------------------------------------------------------------ lattice properties

@settings(max_examples=500)
@given(intervals(), intervals(), intervals())
def test_join_laws(a, b, c):
    assert join(a, b) == join(b, a)
    assert join(join(a, b), c) == join(a, join(b, c))
    assert join(a, a) == a
    j = join(a, b)
    assert leq(a, j) and leq(b, j)
    if leq(a, c) and leq(b, c):
        assert leq(j, c)


@settings(max_examples=500)
@given(intervals(), intervals(), intervals())
def test_meet_laws(a, b, c):
    assert meet(a, b) == meet(b, a)
    assert meet(meet(a, b), c) == meet(a, meet(b, c))
    assert meet(a, top_(BOUND)) == a
    m = meet(a, b)
    assert leq(m, a) and leq(m, b)
    if leq(c, a) and leq(c, b):
        assert leq(c, m)


def top_(bound):
    return PI(0, bound)


@settings(max_examples=500)
@given(intervals(), intervals(), intervals())
def test_leq_is_a_partial_order(a, b, c):
    assert leq(a, a)
    if leq(a, b) and leq(b, a):
        assert a == b
    if leq(a, b) and leq(b, c):
        assert leq(a, c)
    assert leq(a, b) == (join(a, b) == b)


@settings(max_examples=500)
@given(intervals(), intervals(), st.booleans())
def test_transfer_is_monotone(a, b, is_barrier):
    node = barrier() if is_barrier else plain()
    lo, hi = meet(a, b), join(a, b)
    assert leq(transfer(node, lo), transfer(node, hi))


@settings(max_examples=500)
@given(intervals(), intervals(), st.integers(0, BOUND), st.integers(0, BOUND))
def test_widening_stabilizes(old, new, t1, t2):
    lbt, ubt = min(t1, t2), max(t1, t2)
    w = widen_with_thresholds(old, new, lbt, ubt)
    assert leq(join(old, new), w)
    assert widen_with_thresholds(w, new, lbt, ubt) == w


# ------------------------------------------------------------------ solver

SINGLE2_GOLDEN = {
    "R": ((0, 0), (0, 0)), "S1": ((0, 0), (1, 1)), "S2": ((1, 1), (1, 1)), "bar1": ((1, 1), (2, 2)),
    "S3": ((2, 2), (2, 2)), "S4": ((2, 2), (2, 2)), "bar2": ((2, 2), (3, 3)), "S5": ((3, 3), (3, 3)),
    "T": ((3, 3), (4, 4)),
}


def test_single2_phase_intervals():
    g = graph_of(open(corpus_path("single2_norace.c")).read())
    r = run_pia(g)
    got = {n.name: ((r.in_map[n.id].lb, r.in_map[n.id].ub), (r.out_map[n.id].lb, r.out_map[n.id].ub))
           for n in g.nodes}
    assert got == SINGLE2_GOLDEN


def test_chain_without_barriers_stays_at_zero():
    g = TaskGraph([TgNode(0, "R"), TgNode(1, "A"), TgNode(2, "T")], [(0, 1), (1, 2)])
    r = run_pia(g)
    assert r.in_map == r.out_map == {0: ZERO, 1: ZERO, 2: ZERO}


def test_diamond_with_one_barrier_arm():
    nodes = [TgNode(0, "R"), TgNode(1, "A", is_parallel_entry=True), barrier(2), plain(3), plain(4), TgNode(5, "T")]
    g = TaskGraph(nodes, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)])
    r = run_pia(g)
    assert r.in_map[4] == PI(1, 2)


def check_equations(g, r):
    for n in g.nodes:
        assert transfer(n, r.in_map[n.id], r.bound) == r.out_map[n.id]
        if n.id == g.root:
            assert r.in_map[n.id] == ZERO
            continue
        if n.id in r.accelerated:
            assert r.in_map[n.id] == r.accelerated[n.id]
            continue
        expected = BOTTOM
        for p in g.preds(n.id):
            expected = join(expected, r.out_map[p])
        assert leq(expected, r.in_map[n.id])
        if not n.is_loop_header:
            assert expected == r.in_map[n.id]


def test_path_oracle_on_random_dags():
    rng = random.Random(11)
    for _ in range(150):
        g = random_dag(rng)
        r = run_pia(g)
        oracle = path_oracle(g)
        for n, (pin, pout) in oracle.items():
            assert (r.in_map[n], r.out_map[n]) == (pin, pout)
        check_equations(g, r)


def test_corpus_fixpoints():
    import glob
    for path in glob.glob(corpus_path("*.c")):
        src = open(path).read()
        if "omp task" in src:
            continue
        g = graph_of(src)
        r = run_pia(g)
        check_equations(g, r)
        assert r.iterations <= 64 * (len(g.nodes) + 1) ** 2


def random_cyclic(rng):
    g = random_dag(rng, max_inner=8)
    inner = [n.id for n in g.nodes[1:-1]]
    edges = set(g.edges)
    for _ in range(rng.randint(1, 3)):
        a, b = sorted(rng.sample(inner, 2)) if len(inner) > 1 else (inner[0], inner[0])
        edges.add((b, a))
        g.nodes[a].is_loop_header = True
    return TaskGraph(g.nodes, sorted(edges), 0, g.terminal)


def bounded_walk_counts(g, max_len):
    """Phase counts reaching each node over all walks of bounded length."""
    seen = {}
    stack = [(g.root, 0, 0)]
    while stack:
        v, c, depth = stack.pop()
        seen.setdefault(v, set()).add(c)
        if depth == max_len:
            continue
        c2 = c + g.nodes[v].changes_phase
        for w in g.succs(v):
            stack.append((w, c2, depth + 1))
    return seen


def test_widening_is_sound_and_terminates_on_cyclic_graphs():
    rng = random.Random(5)
    for _ in range(100):
        g = random_cyclic(rng)
        r = run_pia(g)
        for v, counts in bounded_walk_counts(g, 9).items():
            assert r.in_map[v].lb <= min(counts) and max(counts) <= r.in_map[v].ub


def test_small_lattice_bound_saturates():
    src = ("void f(int n) {\n#pragma omp parallel\n{\nfor (k = 0; k < 100; k++) {\n"
           "#pragma omp barrier\n}\n}\n}")
    g = graph_of(src)
    r = run_pia(g, bound=5)
    assert max(x.ub for x in r.out_map.values()) == 5
    assert "inf" in format_interval(r.out_map[g.terminal], 5)


@pytest.mark.parametrize("body", BODIES, ids=lambda b: f"{len(b)}stmts")
@pytest.mark.parametrize("tc", range(0, 9))
def test_acceleration_equals_unrolling(tc, body):
    g = graph_of(loop_program(tc, 1, body))
    r = run_pia(g)
    head, expected = unrolled_header(g, r, tc)
    assert r.in_map[head] == expected
