import itertools
from math import comb

import networkx as nx
import pytest

import oracles
from fodeflab import graph as G
from fodeflab import trees as T
from fodeflab.errors import CapExceeded, PreconditionError
from fodeflab.succinct import tower


def test_catalog_counts_by_depth():
    for i in range(4):
        cat = T.enumerate_diverging(i)
        assert cat.M[i] == tower(i)
        exact = [cat.m[j] for j in range(i + 1)]
        assert exact == [tower(j) - (tower(j - 1) if j else 0) for j in range(i + 1)]


def test_is_diverging_agrees_with_asymmetry():
    # rooted: diverging exactly when the root-fixing automorphism group is trivial
    for n in range(1, 9):
        for g in G.enumerate_trees(n):
            for r in range(n):
                t = G.RootedTree.from_graph(g, r)
                assert T.is_diverging(t) == (G.automorphisms(t) == 1)


def test_unrooted_diverging_means_asymmetric_or_center_swap():
    for n in range(1, 10):
        for g in G.enumerate_trees(n):
            ng = oracles.to_nx(g)
            centers = G.metrics(g).centers
            # label each center so that only automorphisms fixing them survive
            nx.set_node_attributes(ng, {v: centers.index(v) if v in centers else -1
                                        for v in ng}, "c")
            gm = nx.algorithms.isomorphism.GraphMatcher(
                ng, ng, node_match=lambda a, b: a["c"] == b["c"])
            fixing = sum(1 for _ in gm.isomorphisms_iter())
            assert T.is_diverging_tree(g) == (fixing == 1)


def test_max_orders():
    assert [T.max_diverging_order(i) for i in range(4)] == [1, 2, 4, 11]


def test_gen_diverging_rooted_examples():
    t = T.gen_diverging_rooted(3, 4)
    assert t.n == 4 and t.depth == 3 and T.code_is_path(t.code())
    big = T.gen_diverging_rooted(3, 11)
    # the maximal tree hangs every depth <= 2 diverging tree from the root
    assert sorted(T.code_order(b.code()) for b in big.branches()) == [1, 2, 3, 4]
    for n in range(4, 12):
        t = T.gen_diverging_rooted(3, n)
        assert t.n == n and T.is_diverging(t) and t.depth == 3
    with pytest.raises(PreconditionError):
        T.gen_diverging_rooted(3, 12)


def test_gen_diverging_tree_examples():
    g = T.gen_diverging_tree(8, 2)
    assert g.n == 8 and G.metrics(g).radius == 3 and T.is_diverging_tree(g)
    g = T.gen_diverging_tree(9, 3)
    assert g.n == 9 and G.metrics(g).radius == 4
    with pytest.raises(PreconditionError):
        T.gen_diverging_tree(5, 2)


def test_ranked_family_sizes_and_base():
    assert len(T.gen_ranked(0)) == 4 and len(T.gen_ranked(1)) == 6
    assert len(T.gen_ranked(2)) == 20
    assert [T.ranked_counts(i)[0] for i in range(4)] == [4, 6, 20, comb(20, 10)]
    for t in T.gen_ranked(1).trees():
        assert t.depth == 5
    report = T.check_base(T.ranked_base())
    assert all(report[k] for k in ("order_at_most_8", "depth_4", "diverging", "antichain"))
    codes = T.ranked_base()
    for a, b in itertools.permutations(codes, 2):
        assert not T.rooted_embeds(a, b)


def test_ranked_minimum_orders():
    orders = T.gen_ranked(1).orders
    assert T.ranked_counts(1)[1] == min(orders)
    assert T.ranked_counts(2)[1] == min(T.gen_ranked(2).orders)


def test_ranked_rank_recognises_members():
    for g in T.gen_ranked(1).graphs():
        assert T.ranked_rank(g) == 1
    assert T.ranked_rank(G.path(5)) is None
    with pytest.raises(CapExceeded):
        T.gen_ranked(T.RANKED_CAP + 1)


@pytest.mark.parametrize("make", [
    lambda: T.distance_strategy(G.path(5), G.path(4), (0, 4), (0, 3)),
    lambda: T.diameter_strategy(G.path(4), G.path(4)),
    lambda: T.cycle_strategy(G.path(4), G.path(5)),
    lambda: T.diverging_strategy(G.path(4), G.star(3)),
    lambda: T.divergence_break_strategy(G.path(4), G.path(4)),
    lambda: T.center_strategy(G.path(4), G.path(4)),
    lambda: T.ranked_root_strategy(G.path(4), G.path(5)),
    lambda: T.ranked_vs_disconnected_strategy(G.path(4), G.empty(2)),
])
def test_strategy_preconditions_are_enforced(make):
    with pytest.raises(PreconditionError):
        make()


def test_distance_strategy_example():
    s = T.distance_strategy(G.path(5), G.path(6), (0, 4), (0, 5))
    assert s.bound == 2 and T.run_strategy(s)
    assert not T.run_strategy(s, rounds=1)


def test_cycle_strategy_on_p4_c4():
    s = T.cycle_strategy(G.path(4), G.cycle(4))
    assert s.alternations == 0 and s.bound <= 2 + 4
    assert T.run_strategy(s)


def test_minimize_star_and_path():
    star = G.RootedTree.from_graph(G.star(10), 0)
    small = T.minimize_rooted(star, 2)
    assert small.n == 3 and T.rooted_value(small, 2) == T.rooted_value(star, 2)
    p = G.RootedTree.from_graph(G.path(3), 0)
    assert T.minimize_rooted(p, 3).code() == p.code()


def test_minimize_collapses_a_repeated_value_on_a_path():
    long = G.RootedTree.from_graph(G.path(12), 0)
    small = T.minimize_rooted(long, 2)
    assert small.n < long.n
    assert T.rooted_value(small, 2) == T.rooted_value(long, 2)
    assert not T.minimality_violations(small, 2)


def test_minimization_report_bounds():
    t = G.RootedTree.from_graph(G.star(6), 0)
    rep = T.minimization_report(t, 2)
    assert rep["depth_ok"] and rep["width_ok"] and rep["violations"] == []
    assert rep["order_after"] <= rep["order_before"]


def test_certify_diverging_tree_of_order_eight():
    g = T.gen_diverging_tree(8, 2)
    rep = T.certify_tree_definability(g, 8)
    assert rep["ok"] and rep["radius"] == 3 and rep["max_rank"] <= 5


def test_certify_rejects_non_diverging():
    with pytest.raises(PreconditionError):
        T.certify_tree_definability(G.star(3), 4)


def test_path_definability_below_log_bound():
    for n in range(1, 6):
        assert T.certify_path_definability(n, 7)["ok"]
