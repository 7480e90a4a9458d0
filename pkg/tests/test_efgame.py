import itertools

import pytest

import oracles
from fodeflab import efgame as E
from fodeflab import formula as F
from fodeflab.errors import IllegalMove
from fodeflab.graph import complete, cycle, empty, graphs_up_to, path, star
from fodeflab.semantics import evaluate

SMALL = graphs_up_to(3)


def test_equal_values_iff_no_small_rank_sentence_separates():
    engine = E.ValueEngine({"k": 4, "order": 4})
    for g, h in itertools.combinations(graphs_up_to(4), 2):
        for k in range(4):
            same = engine.value(g, (), k) == engine.value(h, (), k)
            assert same == (not oracles.spoiler_wins(g, h, k))


def test_known_distinguishing_ranks():
    # K2 vs E2 differ on an edge: two pebbles
    assert E.distinguishing_rank(complete(2), empty(2)) == 2
    # sizes 1 and 2 are told apart by "exists two distinct vertices"
    assert E.distinguishing_rank(path(1), empty(2)) == 2
    assert E.distinguishing_rank(cycle(4), path(4)) == oracles.minimax_rank(cycle(4), path(4))


def test_isomorphic_graphs_are_never_distinguished():
    g = path(4)
    h = g.relabel([3, 1, 0, 2])
    assert E.value(g, (), 4) == E.value(h, (), 4)


def test_pebbled_values_respect_atomic_type():
    g = path(3)
    # k counts the pebbled rounds too
    assert E.value(g, (0, 1), 2) != E.value(g, (0, 2), 2)
    assert E.value(g, (0, 1), 4) == E.value(g, (2, 1), 4)


def test_game_trace_is_a_winning_line():
    g, h = cycle(4), path(4)
    d = E.distinguishing_rank(g, h)
    trace = E.game_trace(g, h, d)
    assert 1 <= len(trace) <= d
    u = tuple(m["spoiler"]["vertex"] if m["spoiler"]["graph"] == 0 else m["duplicator"]["vertex"]
              for m in trace)
    v = tuple(m["spoiler"]["vertex"] if m["spoiler"]["graph"] == 1 else m["duplicator"]["vertex"]
              for m in trace)
    assert not E.partial_isomorphism(g, h, u, v)


def test_alternation_game_monotone_examples():
    g, h = star(3), path(4)
    d = E.distinguishing_rank(g, h)
    d0 = E.distinguishing_rank_alt(g, h, 0)
    assert d0 >= d == E.distinguishing_rank_alt(g, h, None)
    assert d0 == oracles.minimax_rank(g, h, alternations=0)


def test_value_formula_defines_the_value():
    universe = graphs_up_to(4)
    for g in graphs_up_to(3):
        f = E.value_formula(g, (), 2, universe=universe)
        assert F.quantifier_rank(f) <= 2
        mine = E.value(g, (), 2)
        for h in universe:
            assert evaluate(f, h) == (E.value(h, (), 2) == mine)


def test_defining_formula_separates_within_bound():
    for g in graphs_up_to(3):
        sentence, k, cert = E.defining_formula(g, 4)
        assert cert["k"] == k == E.bounded_definability_rank(g, 4)
        for h in graphs_up_to(4):
            assert evaluate(sentence, h) == oracles.nx_isomorphic(g, h)


def test_pebble_all_strategy_wins_on_different_sizes():
    g, h = empty(2), empty(3)
    assert E.verify_strategy(E.PebbleAllStrategy(), g, h, 3)
    assert not E.verify_strategy(E.PebbleAllStrategy(), g, h, 2)


def test_strategy_with_illegal_switch_is_reported():
    class Switcher(E.Strategy):
        def move(self, pos):
            return len(pos.u) % 2, 0

    with pytest.raises(IllegalMove):
        E.verify_strategy(Switcher(), path(3), path(4), 3, a=0)


def test_spoiler_and_duplicator_choices():
    g, h = path(3), complete(3)
    side, x = E.spoiler_choice(g, h, (), (), 3)
    assert side in (0, 1)
    # after any reply Spoiler still wins in the remaining rounds
    other = (g, h)[1 - side]
    for y in range(other.n):
        u, v = ((x,), (y,)) if side == 0 else ((y,), (x,))
        assert E.spoiler_wins(g, h, 2, None, (u, v))
    # on isomorphic paths only the center answers the center for three rounds
    assert E.duplicator_choice(path(3), path(3), (), (), 0, 1, 3) == 1
    assert E.duplicator_choice(path(3), path(3), (), (), 0, 1, 1) == 0


def test_violation_reports_the_broken_pair():
    bad = E.violation(complete(2), empty(2), (0, 1), (0, 1))
    assert bad["condition"] == "adjacency" and sorted(bad["pebbles"]) == [0, 1]
    assert E.violation(path(2), path(2), (0, 1), (1, 0)) is None
