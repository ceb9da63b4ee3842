import random

import pytest

import coarsebox as cb
from coarsebox.errors import BadInputError, BudgetExceededError
from coarsebox.homotopy import Closeness
from coarsebox.words import Word, free_reduce

from helpers import cycle_graph, cycle_winding, generator_walk, torus_graph


def test_rpath_validates_steps():
    C6 = cycle_graph(6)
    far = next(v for v in range(6) if cb.bfs_distances(C6, 0)[v] == 2)
    with pytest.raises(BadInputError):
        cb.RPath(C6, 1, (0, far))
    assert cb.RPath(C6, 2, (0, far)).length == 1


def test_is_r_close_cases():
    C8 = cycle_graph(8)
    p = cb.word_path(C8, [1, 1, 1])
    assert cb.is_r_close(p, p, 1) is Closeness.CASE_B
    extended = cb.RPath(C8, 1, p.points + (p.points[-1],) * 3)
    assert cb.is_r_close(p, extended, 1) is Closeness.CASE_A
    assert cb.is_r_close(extended, p, 1) is Closeness.CASE_A
    T = torus_graph(8)
    row0 = cb.word_path(T, [1, 1, 1])
    # three vertical steps away at scale 2: rows at distance r + 1
    start = T.evaluate([2, 2, 2])
    row3 = cb.RPath(T, 1, tuple(T.evaluate([1] * k, start) for k in range(4)))
    assert cb.is_r_close(row0, row3, 2) is Closeness.NOT_CLOSE


def test_is_r_close_symmetric_reflexive():
    C7 = cycle_graph(7)
    rng = random.Random(2)
    paths = []
    for _ in range(12):
        letters = [rng.choice([1, -1, 0]) for _ in range(6)]
        paths.append(cb.word_path(C7, letters))
    for p in paths:
        assert cb.is_r_close(p, p, 1) is Closeness.CASE_B
        for q in paths:
            assert cb.is_r_close(p, q, 1) is cb.is_r_close(q, p, 1)


def test_is_r_close_rejects_mismatched_graphs():
    with pytest.raises(BadInputError):
        cb.is_r_close(
            cb.word_path(cycle_graph(5), [1]), cb.word_path(cycle_graph(7), [1]), 1
        )


def test_concat_examples():
    C6 = cycle_graph(6)
    c1 = cb.RPath(C6, 1, (0, 0, 0))
    c2 = cb.RPath(C6, 1, (0, 0))
    assert cb.concat(c1, c2).length == 3
    p = cb.word_path(C6, [1, 1])
    back = cb.RPath(C6, 1, tuple(reversed(p.points)))
    loop = cb.concat(p, back)
    assert loop.length == 4 and loop.is_loop()
    arc2 = cb.word_path(C6, [1, 1])
    arc4 = cb.word_path(C6, [1, 1, 1, 1], start=arc2.points[-1])
    full = cb.concat(arc2, arc4)
    assert full.length == 6 and full.is_loop()
    with pytest.raises(BadInputError):
        cb.concat(arc2, arc2)  # endpoint of the arc is not its start


def test_witness_reduce_examples():
    C5 = cycle_graph(5)
    chain = cb.witness_reduce(C5, [1, -1], 1)
    chain.validate()
    assert chain.end.points == (0,)

    chain = cb.witness_reduce(C5, [1, 0, 1], 1)  # explicit stay in the middle
    assert chain.end.points == cb.word_path(C5, [1, 1]).points

    C7 = cycle_graph(7)
    rng = random.Random(17)
    for _ in range(25):
        letters = [rng.choice([1, -1]) for _ in range(10)]
        chain = cb.witness_reduce(C7, letters, 1)
        chain.validate()
        reduced = free_reduce(Word(tuple(letters)))
        assert chain.end.points == cb.word_path(C7, reduced.letters).points


def test_witness_jump_examples():
    T = torus_graph(6)
    square = Word((1, 2, -1, -2))
    chain = cb.witness_jump(T, Word(()), square, Word(()), 2)
    chain.validate()
    assert chain.start.length == 4 and chain.end.points == (0,)

    # empty insertion is a single-path chain
    chain = cb.witness_jump(T, Word((1,)), Word(()), Word((-1,)), 1)
    assert len(chain.paths) == 1

    # detour through a finite-order direction: u=b, v=a^4, w=b^-1 over Z/4 x Z/12
    pa = [((x + 1) % 4) * 12 + y for x in range(4) for y in range(12)]
    pb = [x * 12 + (y + 1) % 12 for x in range(4) for y in range(12)]
    X = cb.from_permutations(2, [pa, pb], provenance="z4xz12")  # gen1 has order 4
    chain = cb.witness_jump(X, Word((2,)), Word((1, 1, 1, 1)), Word((-2,)), 2)
    chain.validate()
    assert chain.end.points == cb.word_path(X, [2, -2]).points


def test_witness_jump_rejects_long_insertions():
    T = torus_graph(6)
    with pytest.raises(BadInputError):
        cb.witness_jump(T, Word(()), Word((1, 2, -1, -2)), Word(()), 1)
    with pytest.raises(BadInputError):
        cb.witness_jump(T, Word((1,)), Word((2, -2)), Word(()), 2)  # u*w not closed


def test_to_one_path_examples():
    C12 = cycle_graph(12)
    p = cb.word_path(C12, [1, 1, 1], scale=3)
    one, chain = cb.to_one_path(p)
    assert one.points == p.points and len(chain.paths) == 1

    big = cb.RPath(C12, 3, (0, C12.evaluate([1, 1, 1])))
    one, chain = cb.to_one_path(big)
    chain.validate()
    assert all(
        a == b or C12.step(a, 1) == b or C12.step(a, -1) == b
        for a, b in zip(one.points, one.points[1:])
    )

    Y = cb.from_matrices_sl2(8)  # 32 vertices is plenty for a random 3-path
    rng = random.Random(23)
    for _ in range(10):
        pts = [0]
        for _ in range(5):
            options = [v for v in range(Y.num_vertices) if int(cb.bfs_distances(Y, pts[-1])[v]) <= 3]
            pts.append(rng.choice(options))
        p = cb.RPath(Y, 3, tuple(pts))
        one, chain = cb.to_one_path(p)
        chain.validate()
        assert one.points[0] == p.points[0] and one.points[-1] == p.points[-1]


def test_classify_loops_one_vertex():
    rep = cb.classify_loops(cb.bouquet(2), 2, 4)
    assert rep.class_count == 1


def test_classify_loops_c8():
    C8 = cycle_graph(8)
    rep = cb.classify_loops(C8, 1, 10)
    assert rep.class_count == 3
    const = rep.class_of_loop((0,))
    plus = rep.class_of_loop(generator_walk(C8, 8))
    minus = rep.class_of_loop(generator_walk(C8, -8))
    assert len({const, plus, minus}) == 3
    windings = sorted(cycle_winding(C8, r) for r in rep.representatives)
    assert windings == [-1, 0, 1]
    # every short reduced-trivial loop stays with the constant
    assert rep.class_of_loop((0, 1, 0)) == const
    assert rep.class_of_loop((0, 2, 0, 1, 0)) == const


def test_classify_loops_c5_jump():
    C5 = cycle_graph(5)
    rep = cb.classify_loops(C5, 2, 7)
    assert rep.verdict((0,), generator_walk(C5, 5)) == "SameClass"


def test_classify_never_separates_witness_chains():
    C8 = cycle_graph(8)
    rep = cb.classify_loops(C8, 1, 10)
    rng = random.Random(31)
    for _ in range(20):
        letters = [rng.choice([1, -1]) for _ in range(4)]
        word = letters + [-x for x in reversed(letters)]  # reduces to nothing
        chain = cb.witness_reduce(C8, word, 1)
        classes = {rep.class_of_loop(p.points) for p in chain.paths}
        assert len(classes) == 1


def test_classify_never_separates_jump_chains():
    from helpers import klein_four_graph

    K = klein_four_graph()
    rep = cb.classify_loops(K, 1, 6)
    chain = cb.witness_jump(K, Word(()), Word((1, 1)), Word(()), 1)
    chain.validate()
    classes = {rep.class_of_loop(p.points) for p in chain.paths}
    assert len(classes) == 1  # the involution loop contracts at scale 1


def test_classify_matches_pairwise_reference():
    # independent route: components from raw pairwise closeness checks on
    # RPath objects, no vectorization shared with the implementation
    C6 = cycle_graph(6)
    r, L = 1, 8
    report = cb.classify_loops(C6, r, L)
    states = sorted(report._state_index, key=report._state_index.get)
    paths = [cb.RPath(C6, r, s) for s in states]
    n = len(states)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = 0
    for i in range(n):
        for j in range(i + 1, n):
            if cb.is_r_close(paths[i], paths[j], r) is not Closeness.NOT_CLOSE:
                edges += 1
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    reference = {}
    for i in range(n):
        reference.setdefault(find(i), []).append(i)
    assert len(reference) == report.class_count
    assert edges == report.n_edges
    ref_partition = {frozenset(v) for v in reference.values()}
    impl_partition = {}
    for s, i in report._state_index.items():
        impl_partition.setdefault(int(report._class_of[i]), set()).add(i)
    assert {frozenset(v) for v in impl_partition.values()} == ref_partition


def test_classify_budget_errors():
    C8 = cycle_graph(8)
    with pytest.raises(BudgetExceededError):
        cb.classify_loops(C8, 1, 10, state_budget=100)
    with pytest.raises(BudgetExceededError):
        cb.classify_loops(C8, 1, 10, edge_budget=1000)
