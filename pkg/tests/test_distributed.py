import random

import pytest
from hypothesis import given, settings, strategies as st

from delg.actions import ActionModel, FiniteDomainVar
from delg.distributed import (
    TeamSplit,
    check_hypotheses,
    is_hierarchical,
    solve_distributed,
    solve_distributed_announcements,
    solve_distributed_public,
    strategy_tree_search,
    verify_distributed_strategy,
)
from delg.errors import HypothesisError, ModelError
from delg.formula import TRUE
from delg.generators import random_controller_instance, random_distributed_announcements
from delg.models import EpistemicModel, PointedModel
from delg.problem import load_problem, parse_problem
from delg.reductions import controller_as_distributed
from delg.strategy import DistributedStrategy
from delg.verdict import Status

# a does not know whether p; b does.  Only b can make the announcement
# that lets a learn p, and it is b's turn.
RELAY = """
agents a b e
turnvar turn in { a b e }
team { a b }
mode distributed
model {
  world w { p turn@b }
  world u { turn@b }
  obs a { w u }
  point w
}
actions {
  action say owner b { pre turn@b & K[b] p; post turn@a := true; post turn@b := false; post turn@e := false; }
  action hush owner b { pre turn@b; post turn@e := true; post turn@b := false; post turn@a := false; }
  action stop owner e { pre turn@e; post turn@e := false; post turn@b := true; post turn@a := false; }
}
goal K[a] p
"""


def args(p):
    return p.pm, p.actions, p.split, p.goal, p.turn


def test_relay_is_won_by_all_methods():
    p = parse_problem(RELAY)
    assert check_hypotheses(p.pm, p.actions, p.turn).ok
    for method in ("auto", "fig4", "fig5", "tree"):
        v = solve_distributed(*args(p), method=method, horizon=4)
        assert v.yes, method
        assert verify_distributed_strategy(*args(p)[:4], v.strategy, p.turn), method


def test_relay_lost_when_b_is_universal():
    p = parse_problem(RELAY)
    split = TeamSplit({"a"}, {"b", "e"})
    v = solve_distributed_public(p.pm, p.actions, split, p.goal, p.turn)
    assert v.status is Status.NO


def test_team_split_rejects_overlap():
    with pytest.raises(ModelError):
        TeamSplit({"a"}, {"a"})


def test_solvers_refuse_hypothesis_violations():
    turn = FiniteDomainVar("turn", ["a", "b"])
    m = EpistemicModel(["w"], {"a": [("w", "w")], "b": [("w", "w")]}, {"w": turn.valuation("b")})
    a = ActionModel(["x"], {"a": [("x", "x")], "b": [("x", "x")]}, {"x": TRUE},
                    {"x": turn.assign("b")}, {"x": "a"})
    pm = PointedModel(m, "w")
    rep = check_hypotheses(pm, a, turn)
    assert rep.turn_discipline.status == "fail"
    assert "x" in rep.turn_discipline.witness
    with pytest.raises(HypothesisError):
        solve_distributed_public(pm, a, TeamSplit({"a"}, {"b"}), TRUE, turn)


def test_hierarchy(data_dir):
    p = load_problem(data_dir / "teamdfa_win.delg")
    h = is_hierarchical(p.pm, p.actions, p.split)
    assert not h and set(h.witness) == {"a", "b"}
    c = controller_as_distributed(random_controller_instance(random.Random(1), "announcement"))
    assert is_hierarchical(c.pm, c.actions, c.split)


def test_team_dfa_instances(data_dir):
    win = load_problem(data_dir / "teamdfa_win.delg")
    v = strategy_tree_search(*args(win)[:4], 6, win.turn)
    assert v.yes
    assert verify_distributed_strategy(*args(win)[:4], v.strategy, win.turn)
    bad = load_problem(data_dir / "teamdfa_bad.delg")
    v = strategy_tree_search(*args(bad)[:4], 6, bad.turn)
    assert not v.yes


def test_verifier_rejects_empty_strategy():
    p = parse_problem(RELAY)
    c = verify_distributed_strategy(*args(p)[:4], DistributedStrategy({}, "fig5"), p.turn)
    assert not c


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_fig4_matches_tree_search(seed):
    rng = random.Random(seed)
    p = random_distributed_announcements(rng, rng.randint(1, 3), rng.randint(2, 4), ("p", "q"))
    n = len(p.pm.model.worlds)
    f = solve_distributed_announcements(*args(p), rounds=n)
    t = strategy_tree_search(*args(p)[:4], n, p.turn)
    assert f.status == t.status
    for v in (f, t):
        if v.yes:
            assert verify_distributed_strategy(*args(p)[:4], v.strategy, p.turn)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_single_perfect_information_agent_is_controller(seed):
    from delg.controller import solve_controller_public

    rng = random.Random(seed)
    p = random_controller_instance(rng, "public", rng.randint(1, 3), rng.randint(2, 4))
    d = controller_as_distributed(p)
    v = solve_controller_public(p.pm, p.actions, p.goal)
    w = solve_distributed_public(*args(d))
    assert v.status == w.status
