import random

from hypothesis import given, settings, strategies as st

from delg.arena import (
    arena_bound,
    build_arena,
    build_multiplayer_arena,
    expand_knowledge_depth1,
    solve_attractor,
)
from delg.formula import parse_formula
from delg.generators import random_controller_instance, random_multiplayer_propositional
from delg.problem import parse_problem

FLIP = """
agents a
model {
  world w { }
  world u { p }
  obs a { w u }
  point w
}
actions {
  action set owner ctr { pre !p; post p := true; }
  action clear owner env { pre p; post p := false; }
  action idle owner env { pre true; }
}
mode controller
goal p
"""


def test_two_player_arena_shape():
    p = parse_problem(FLIP)
    g = build_arena(p.pm, p.actions)
    assert g.initial == ("w", "w")
    assert ("w", "u") in g.vertices
    assert all(g.owner[v] == 0 for v in g.vertices if v[0] == "w")
    t = dict(g.moves[("w", "w")])["set"]
    assert t == ("a", "set", ("p",), 1)
    assert g.owner[t] == 1
    assert len(g) <= arena_bound(p.pm, p.actions)


def test_vertex_relation_follows_worlds_and_actions():
    p = parse_problem(FLIP)
    g = build_arena(p.pm, p.actions)
    assert ("w", "u") in g.related("a", ("w", "w"))


def test_attractor_on_arena():
    p = parse_problem(FLIP)
    g = build_arena(p.pm, p.actions)
    win, choice = solve_attractor(g, lambda v: "p" in g.valuation[v])
    # the Environment can always clear p again, but p holds right after "set"
    assert g.initial in win
    assert choice[g.initial] == "set"


def test_knowledge_expansion_tracks_information_sets():
    p = parse_problem(FLIP)
    g = build_arena(p.pm, p.actions)
    ex = expand_knowledge_depth1(g, parse_formula("K[a] p"), a=p.actions)
    _, sets = ex.initial
    assert dict(sets)["a"] == {("w", "w"), ("w", "u")}
    assert not ex.holds(ex.initial)
    assert ex.graph.complete


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_arena_sizes_within_bounds(seed):
    rng = random.Random(seed)
    atoms = [f"p{i}" for i in range(rng.randint(1, 4))]
    p = random_controller_instance(rng, "propositional", rng.randint(1, 4), rng.randint(1, 5),
                                   atoms=atoms)
    assert len(build_arena(p.pm, p.actions)) <= arena_bound(p.pm, p.actions)
    d = random_multiplayer_propositional(rng, rng.randint(1, 4), rng.randint(1, 5), atoms)
    g = build_multiplayer_arena(d.pm, d.actions, d.turn)
    assert len(g) <= arena_bound(d.pm, d.actions, multi=True)
    assert all(g.owner[v] in d.turn.domain for v in g.vertices)
