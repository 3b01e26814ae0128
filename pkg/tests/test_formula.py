import pytest
from hypothesis import given, settings, strategies as st

from delg.errors import FormulaSyntaxError, UnknownAgentError
from delg.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Implies,
    Knows,
    Not,
    Or,
    Poss,
    agents_of,
    atoms_of,
    desugar,
    eval_prop,
    is_propositional,
    modal_depth,
    parse_formula,
    substitute,
    to_text,
)


def formulas():
    leaves = st.one_of(st.sampled_from(["p", "q", "r"]).map(Atom), st.just(TRUE), st.just(FALSE))

    def extend(sub):
        agent = st.sampled_from(["a", "b"])
        return st.one_of(
            sub.map(Not),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Knows, agent, sub),
            st.builds(Poss, agent, sub),
        )

    return st.recursive(leaves, extend, max_leaves=8)


def test_parse_basic_operators():
    f = parse_formula("K[a] !p & (q | M[b] r) -> true")
    assert f == Implies(And(Knows("a", Not(Atom("p"))), Or(Atom("q"), Poss("b", Atom("r")))), TRUE)


def test_implication_is_right_associative():
    assert parse_formula("p -> q -> r") == Implies(Atom("p"), Implies(Atom("q"), Atom("r")))


def test_modal_depth_and_symbols():
    f = parse_formula("K[a] (p & M[b] q) | r")
    assert modal_depth(f) == 2
    assert atoms_of(f) == {"p", "q", "r"}
    assert agents_of(f) == {"a", "b"}
    assert not is_propositional(f)
    assert is_propositional(parse_formula("p & !q"))


def test_syntax_error_has_position():
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula("p &\n  & q", source="goal.txt")
    assert e.value.line == 2
    assert e.value.column == 3
    assert str(e.value).startswith("goal.txt:2:3:")


def test_unknown_agent_rejected():
    with pytest.raises(UnknownAgentError):
        parse_formula("K[c] p", agents=["a", "b"])
    assert parse_formula("K[a] p", agents=["a"]) == Knows("a", Atom("p"))


def test_eval_prop():
    f = parse_formula("p & !q -> r")
    assert eval_prop(f, {"q"})
    assert not eval_prop(f, {"p"})
    assert eval_prop(f, {"p", "r"})


def test_substitute_atoms():
    f = substitute(parse_formula("p & !q"), {"p": parse_formula("M[a] s")})
    assert f == And(Poss("a", Atom("s")), Not(Atom("q")))


@given(formulas())
@settings(max_examples=200, deadline=None)
def test_print_parse_round_trip(f):
    assert parse_formula(to_text(f)) == f


@given(formulas(), st.sets(st.sampled_from(["p", "q", "r"])))
@settings(max_examples=200, deadline=None)
def test_desugar_preserves_propositional_truth(f, val):
    if is_propositional(f):
        assert eval_prop(desugar(f), val) == eval_prop(f, val)
