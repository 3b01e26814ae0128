import random

import pytest
from hypothesis import given, settings, strategies as st

from delg.controller import (
    solve_controller,
    solve_controller_announcements,
    solve_controller_bounded,
    solve_controller_propositional,
    solve_controller_public,
    verify_controller_strategy,
)
from delg.errors import PreconditionError
from delg.generators import random_controller_instance
from delg.problem import load_problem, parse_problem
from delg.strategy import ControllerStrategy
from delg.verdict import Status

TELL = """
agents a
model {
  world w { p }
  world u { }
  obs a { w u }
  point w
}
actions {
  action tell owner ctr { pre p; }
  action wait owner ctr { pre true; }
  action pass owner env { pre true; }
}
mode controller
goal K[a] p
"""

STUCK = """
agents a
model {
  world w { p }
  world u { }
  obs a { w u }
  point w
}
actions {
  action wait owner ctr { pre true; }
}
mode controller
goal K[a] p
"""


def test_announcement_game_is_won_in_one_move():
    p = parse_problem(TELL)
    v = solve_controller_announcements(p.pm, p.actions, p.goal)
    assert v.yes and v.bound == 4
    assert verify_controller_strategy(p.pm, p.actions, p.goal, v.strategy)
    # the strategy announces p at the start
    assert "tell" in v.strategy.entries.values()


def test_all_methods_agree_on_small_game():
    p = parse_problem(TELL)
    for method in ("fig2", "fig3", "arena", "bounded", "auto"):
        v = solve_controller(p.pm, p.actions, p.goal, method)
        assert v.yes, method
        assert verify_controller_strategy(p.pm, p.actions, p.goal, v.strategy), method


def test_deadlock_modes():
    p = parse_problem(STUCK)
    assert solve_controller(p.pm, p.actions, p.goal, "fig3").status is Status.NO
    v = solve_controller(p.pm, p.actions, p.goal, "fig3", deadlock="vacuous")
    assert v.yes
    assert verify_controller_strategy(p.pm, p.actions, p.goal, v.strategy)


def test_too_few_rounds_is_bounded_no():
    p = parse_problem(TELL.replace("goal K[a] p", "goal K[a] !p"))
    assert solve_controller_announcements(p.pm, p.actions, p.goal).status is Status.NO
    v = solve_controller_announcements(p.pm, p.actions, p.goal, rounds=1)
    assert v.status is Status.NO_WITHIN_BOUND


def test_method_preconditions(data_dir):
    p = load_problem(data_dir / "two_agents.delg")
    with pytest.raises(PreconditionError):
        solve_controller_announcements(p.pm, p.actions, p.goal)
    with pytest.raises(PreconditionError):
        solve_controller(p.pm, p.actions, p.goal, "nonsense")


def test_qbf_instances(data_dir):
    assert solve_controller(*_args(load_problem(data_dir / "qbf_true.delg"))).yes
    assert solve_controller(*_args(load_problem(data_dir / "qbf_false.delg"))).no


def _args(p):
    return p.pm, p.actions, p.goal


def test_verifier_rejects_empty_and_wrong_strategies():
    p = parse_problem(TELL)
    empty = ControllerStrategy("pointed", {}, clock="parity")
    c = verify_controller_strategy(p.pm, p.actions, p.goal, empty)
    assert not c and "no entry" in c.reason
    v = solve_controller_public(p.pm, p.actions, p.goal)
    bad = ControllerStrategy("pointed", {k: "wait" for k in v.strategy.entries}, clock="parity")
    c = verify_controller_strategy(p.pm, p.actions, p.goal, bad)
    assert not c and "loops" in c.reason


@given(st.integers(0, 10**6), st.sampled_from(["announcement", "public", "propositional"]))
@settings(max_examples=80, deadline=None)
def test_yes_verdicts_ship_valid_strategies(seed, kind):
    rng = random.Random(seed)
    p = random_controller_instance(rng, kind, rng.randint(1, 3), rng.randint(1, 4))
    for method in ("auto", "bounded"):
        v = solve_controller(p.pm, p.actions, p.goal, method)
        if v.yes:
            assert verify_controller_strategy(p.pm, p.actions, p.goal, v.strategy)


@given(st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_propositional_arena_matches_configuration_graph(seed):
    rng = random.Random(seed)
    p = random_controller_instance(rng, "propositional", rng.randint(1, 3), rng.randint(2, 4))
    a = solve_controller_propositional(p.pm, p.actions, p.goal)
    b = solve_controller_bounded(p.pm, p.actions, p.goal)
    if a.status in (Status.YES, Status.NO) and b.status in (Status.YES, Status.NO):
        assert a.status == b.status
