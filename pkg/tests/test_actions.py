import random

import pytest
from hypothesis import given, settings, strategies as st

from delg.actions import (
    CTR,
    ActionModel,
    FiniteDomainVar,
    apply_pointed,
    classify,
    executable_actions,
    merge_pointed_actions,
    post_valuation,
    product,
)
from delg.errors import ExecutabilityError, ModelError
from delg.formula import TRUE, Atom, Not, eval_prop, parse_formula
from delg.generators import random_announcements, random_model, random_propositional_actions
from delg.models import EpistemicModel, PointedModel, evaluate, is_s5


def example():
    m = EpistemicModel(
        ["w", "u"],
        {b: [(x, y) for x in ("w", "u") for y in ("w", "u")] for b in ("a", "b")},
        {"w": {"p"}},
    )
    a = ActionModel(
        ["alpha", "skip"],
        {"a": [("alpha", "alpha"), ("skip", "skip")],
         "b": [(x, y) for x in ("alpha", "skip") for y in ("alpha", "skip")]},
        {"alpha": Atom("p"), "skip": TRUE},
        {"alpha": {"p": parse_formula("false")}},
        {"alpha": CTR, "skip": CTR},
    )
    return PointedModel(m, "w"), a


def test_product_worlds_and_knowledge():
    pm, a = example()
    m = product(pm.model, a)
    # alpha needs p, so (u, alpha) is missing
    assert set(m.worlds) == {("w", "alpha"), ("w", "skip"), ("u", "skip")}
    i = m.index(("w", "alpha"))
    assert m.val(i) == frozenset()
    assert evaluate(PointedModel(m, ("w", "alpha")), parse_formula("K[a] !p"))
    assert not evaluate(PointedModel(m, ("w", "alpha")), parse_formula("K[b] p | K[b] !p"))


def test_apply_pointed_checks_precondition():
    pm, a = example()
    with pytest.raises(ExecutabilityError):
        apply_pointed(pm.repoint("u"), a, "alpha")
    after = apply_pointed(pm, a, "alpha")
    assert evaluate(after, parse_formula("K[a] !p"))


def test_executable_actions_sorted():
    pm, a = example()
    assert executable_actions(pm, a) == ["alpha", "skip"]
    assert executable_actions(pm.repoint("u"), a) == ["skip"]


def test_post_reads_old_valuation():
    a = ActionModel(["swap"], {}, post={"swap": {"p": Atom("q"), "q": Atom("p")}})
    assert post_valuation({"p"}, a, "swap") == {"q"}


def test_bad_action_models():
    with pytest.raises(ModelError):
        ActionModel([], {})
    with pytest.raises(ModelError):
        ActionModel(["x"], {}, post={"x": {"p": parse_formula("K[a] q")}})
    with pytest.raises(ModelError):
        ActionModel(["x"], {"a": [("x", "y")]})


def test_classification():
    pm, a = example()
    c = classify(a, agents=["a", "b"])
    assert c.propositional and c.s5
    assert not c.identity_relations and not c.all_announcements
    ann = ActionModel(["x", "y"], {"a": [("x", "x"), ("y", "y")]}, {"x": Atom("p")})
    c = classify(ann)
    assert c.all_announcements and c.non_expanding
    assert classify(ann, point="x").public_announcement == "x"


def test_separable_actions_are_non_expanding():
    a = ActionModel(
        ["x", "y"],
        {"a": [(s, t) for s in "xy" for t in "xy"]},
        {"x": Atom("p"), "y": Not(Atom("p"))},
    )
    c = classify(a)
    assert c.separable is True and c.non_expanding and not c.identity_relations


def test_merge_pointed_actions():
    _, a = example()
    merged, points = merge_pointed_actions([(a, "alpha"), (a, "skip")])
    assert len(merged.actions) == 4
    assert points == ["m0_alpha", "m1_skip"]


def test_finite_domain_variable_encodings():
    for enc in ("onehot", "binary"):
        v = FiniteDomainVar("turn", ["a", "b", "c"], enc)
        for d in v.domain:
            val = v.valuation(d)
            assert v.value_in(val) == d
            assert eval_prop(v.test(d), val)
            assert not any(eval_prop(v.test(e), val) for e in v.domain if e != d)
    with pytest.raises(ModelError):
        FiniteDomainVar("x", ["a", "a"])


@given(st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_product_of_s5_models_is_s5(seed):
    rng = random.Random(seed)
    m = random_model(rng, rng.randint(1, 4), ("p", "q"), ("a", "b"))
    if seed % 2:
        a = random_propositional_actions(rng, rng.randint(1, 4), ("p", "q"), ("a", "b"))
    else:
        a = random_announcements(rng, rng.randint(1, 4), ("p", "q"), ("a", "b"))
    assert is_s5(product(m, a))


@given(st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_apply_pointed_agrees_with_full_product(seed):
    rng = random.Random(seed)
    m = random_model(rng, rng.randint(1, 4), ("p", "q"), ("a", "b"))
    a = random_propositional_actions(rng, rng.randint(1, 3), ("p", "q"), ("a", "b"))
    full = product(m, a)
    for w in full.worlds:
        pm = PointedModel(m, w[0])
        after = apply_pointed(pm, a, w[1])
        for text in ("p", "K[a] q", "M[b] (p & !q)", "K[a] K[b] p"):
            f = parse_formula(text)
            assert evaluate(after, f) == evaluate(PointedModel(full, w), f)
