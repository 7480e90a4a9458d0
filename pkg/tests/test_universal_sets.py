import pytest

import oracles
from fodeflab import formula as F
from fodeflab import universal_sets as U
from fodeflab.errors import CapExceeded, PreconditionError
from fodeflab.graph import complete, empty, path


@pytest.fixture(scope="module")
def u2():
    return U.build_universal(2)


def test_perfect_dnf_count():
    assert len(U.perfect_dnfs(1)) == 2
    dnfs = U.perfect_dnfs(2)
    assert len(dnfs) == 16 and len(set(dnfs)) == 16
    assert U.false_form() in dnfs


def test_false_form_is_false():
    for g in (path(1), complete(3)):
        assert not oracles.naive_eval(U.false_form(), g, {0: 0})


def test_u1_counts():
    u = U.build_universal(1)
    assert u.counts[0]["base"] == 2
    c = u.counts[1]
    assert (c["step1"], c["step2"], c["step3"], c["step4"]) == (2, 2, 0, 2)


def test_members_mask_matches_their_formula(u2):
    dom = U.Domain(2, 4)
    for layer in u2.layers[1:]:
        for x in layer[:25]:
            free = [v for v in range(2) if v not in x.bound]
            for p, (gi, a) in enumerate(dom.points):
                env = {v: a[v] for v in free}
                truth = oracles.naive_eval(x.formula, dom.graphs[gi], env)
                assert truth == bool((x.mask >> p) & 1)


def test_members_are_in_the_class(u2):
    for x in u2.sentences:
        assert not F.free_vars(x.formula)
        assert F.quantifier_rank(x.formula) <= 2
        assert U.in_class(x.formula)


def test_existential_and_universal_parts(u2):
    e, a = u2.existential_part(), u2.universal_part()
    assert len(e) + len(a) == len(u2.sentences)
    assert len(a) == u2.counts[2]["step4"]


def test_without_dedup_step_counts_are_raw():
    u = U.build_universal(1, dedup=False)
    assert u.counts[1]["step1"] == u.counts[1]["step1_kept"]


def test_universality_on_seeded_samples(u2):
    for seed in range(3):
        res = U.universality_check(2, U.sample_sentences(2, 20, seed), uset=u2)
        assert res["ok"], res["misses"]


def test_sample_outside_class_rejected(u2):
    outside = F.parse("(forall x (exists y (adj x y)))")
    with pytest.raises(PreconditionError):
        U.universality_check(2, [outside], uset=u2)
    with pytest.raises(PreconditionError):
        U.universality_check(1, [F.parse("(exists x (exists y (adj x y)))")])


def test_d_half_upper_examples():
    hit = U.d_half_upper(path(1), 2, 4)
    assert hit["found"] and hit["m"] == 2
    assert not U.d_half_upper(complete(3), 2, 4).to_json()["found"]
    assert isinstance(U.d_half_upper(empty(2), 2, 4), U.NotFound)


def test_caps():
    with pytest.raises(CapExceeded):
        U.build_universal(3)
    with pytest.raises(PreconditionError):
        U.build_universal(0)
    with pytest.raises(CapExceeded):
        U.build_universal(2, proxy_order=7)
