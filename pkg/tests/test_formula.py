import itertools

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fodeflab import formula as F
from fodeflab.errors import ArityError, FormulaSyntaxError, UnboundVariableError
from fodeflab.graph import graphs_up_to, path, Graph

SMALL = graphs_up_to(3)


def _atoms(vs):
    pairs = [(a, b) for a in vs for b in vs]
    return st.sampled_from([F.AtomAdj(a, b) for a, b in pairs] + [F.AtomEq(a, b) for a, b in pairs])


def formulas(depth=3, bound=()):
    """Random formulas whose free variables lie in ``bound`` plus variable 0."""
    vs = tuple(bound) or (0,)
    if depth == 0:
        return _atoms(vs)
    sub = formulas(depth - 1, bound)
    fresh = len(bound) + 1 if bound else 1
    inner = formulas(depth - 1, tuple(bound or (0,)) + (fresh,))
    return st.one_of(
        _atoms(vs),
        sub.map(F.Not),
        st.tuples(sub, sub).map(lambda p: F.And(p)),
        st.tuples(sub, sub).map(lambda p: F.Or(p)),
        inner.map(lambda b: F.Exists(fresh, b)),
        inner.map(lambda b: F.Forall(fresh, b)),
    )


def sentences():
    return formulas(3, ()).map(lambda f: F.Exists(0, f))


def _same_on_small(f, g):
    return all(oracles.naive_eval(f, h) == oracles.naive_eval(g, h) for h in SMALL)


def test_parse_and_render_round_trip():
    f = F.parse("(exists x (forall y (= y x)))")
    assert isinstance(f, F.Exists) and isinstance(f.body, F.Forall)
    assert isinstance(f.body.body, F.AtomEq)
    assert F.parse(F.render(f)) is f


@pytest.mark.parametrize("text,err", [
    ("(exists x", FormulaSyntaxError),
    ("(adj x y)", UnboundVariableError),
    ("(exists x (adj x))", ArityError),
    ("(frob x)", FormulaSyntaxError),
    ("(exists x (adj x x)) )", FormulaSyntaxError),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        F.parse(text)


def test_syntax_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as exc:
        F.parse("(exists x")
    assert exc.value.pos == len("(exists x")


def test_uniqueness_quantifier_adds_two_to_rank():
    body = "(exists y (adj x y))"
    plain = F.parse(f"(exists x {body})")
    unique = F.parse(f"(existsU x {body})")
    assert F.quantifier_rank(unique) == F.quantifier_rank(plain) + 1
    assert F.quantifier_rank(unique) == F.quantifier_rank(plain.body) + 2
    assert F.alternation_number(unique) <= F.alternation_number(plain) + 1
    # exactly one vertex with a loop is impossible in a simple graph
    assert not any(oracles.naive_eval(F.parse("(existsU x (adj x x))"), g) for g in SMALL)
    one_isolated = F.parse("(existsU x (forall y (not (adj x y))))")
    assert oracles.naive_eval(one_isolated, path(1))
    assert not oracles.naive_eval(one_isolated, Graph(2))


def test_measures_on_examples():
    assert F.quantifier_rank(F.parse("(exists x (= x x))").body) == 0
    f = F.parse("(exists x (and (adj x x) (forall y (= y x))))")
    assert F.quantifier_rank(f) == 2
    assert F.alternation_number(F.parse("(exists x (forall y (= x y)))")) == 1
    neg = F.parse("(not (exists x (forall y (exists z (and (= x y) (= y z))))))")
    pos = F.parse("(forall x (exists y (forall z (and (= x y) (= y z)))))")
    assert F.alternation_number(neg) == F.alternation_number(pos) == 2
    assert F.length(F.AtomEq(0, 1)) == 3
    assert F.length(F.Not(F.AtomAdj(0, 1))) == 4


def test_naive_definition_constants():
    assert F.quantifier_rank(F.naive_definition(path(2))) == 3
    # frozen after a direct count on the emitted formula
    assert F.length(F.naive_definition(Graph(1))) == 25


def test_ordering_gadget_alternation():
    from fodeflab.tmcompile import ladder_formula
    assert F.alternation_number(ladder_formula()) == 2


def test_nest_agrees_with_rank():
    f = F.parse("(and (exists x (forall y (adj x y))) (not (forall x (= x x))))")
    seqs = F.nest(f)
    assert max(len(s) for s in seqs) == F.quantifier_rank(f)


@settings(max_examples=80, deadline=None)
@given(sentences())
def test_nnf_preserves_meaning_and_measures(f):
    g = F.to_nnf(f)
    assert _same_on_small(f, g)
    assert F.quantifier_rank(g) == F.quantifier_rank(f)
    assert F.alternation_number(g) == F.alternation_number(f)
    stack = [g]
    while stack:
        x = stack.pop()
        if isinstance(x, F.Not):
            assert isinstance(x.f, (F.AtomAdj, F.AtomEq))
        elif isinstance(x, (F.And, F.Or)):
            stack.extend(x.args)
        elif isinstance(x, (F.Exists, F.Forall)):
            stack.append(x.body)


@settings(max_examples=80, deadline=None)
@given(sentences())
def test_prenex_equivalent_and_in_the_right_class(f):
    p = F.to_prenex(f)
    assert F.is_prenex(p)
    assert _same_on_small(f, p)
    for c in F.classify(f):
        if c.kind == "AltSetExists":
            assert any(d.kind == "Sigma" and d.m <= c.m + 1 for d in F.classify(p))
        if c.kind == "AltSetForall":
            assert any(d.kind == "Pi" and d.m <= c.m + 1 for d in F.classify(p))


@settings(max_examples=60, deadline=None)
@given(formulas(2, (0, 1)))
def test_dnf_rewrite_of_quantifier_free_part(f):
    if not F.is_quantifier_free(f):
        return
    d = F.qf_to_dnf(f)
    for g in SMALL:
        for a, b in itertools.product(range(g.n), repeat=2):
            env = {0: a, 1: b}
            assert oracles.naive_eval(d, g, env) == oracles.naive_eval(f, g, env)


def test_prefix_class_inclusions():
    f = F.parse("(exists x (forall y (= y x)))")
    kinds = {(c.kind, c.m) for c in F.classify(f)}
    assert ("Sigma", 2) in kinds and ("AltSet", 1) in kinds
    # least classes: AltSet(1) sits inside AltSetForall(2); AltSetExists already at 1
    assert ("AltSetExists", 1) in kinds and ("AltSetForall", 2) in kinds


def test_hash_consing_shares_equal_nodes():
    assert F.AtomAdj(0, 1) is F.AtomAdj(0, 1)
    assert F.And((F.AtomEq(0, 0),)) is F.And((F.AtomEq(0, 0),))
