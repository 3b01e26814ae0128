import random

import pytest

from delg.errors import FormulaSyntaxError, UnknownAgentError
from delg.formula import parse_formula
from delg.generators import random_controller_instance, random_distributed_announcements
from delg.models import canonical_key
from delg.problem import (
    instance_hash,
    load_problem,
    parse_problem,
    read_certificate,
    write_certificate,
    write_problem,
)
from delg.controller import solve_controller, verify_controller_strategy


def test_load_example(data_dir):
    p = load_problem(data_dir / "two_agents.delg")
    assert p.agents == ("a", "b")
    assert p.mode == "plan"
    assert p.pm.point == "w"
    assert set(p.actions.actions) == {"alpha", "skip"}
    assert p.goal == parse_formula("K[a] !p")
    # b cannot tell the actions apart, a can
    assert ("alpha", "skip") in p.actions.relation("b")
    assert ("alpha", "skip") not in p.actions.relation("a")


def test_model_only_file(data_dir):
    p = load_problem(data_dir / "two_agents_after.delg")
    assert p.actions is None and p.goal is None


def test_errors_carry_location():
    with pytest.raises(FormulaSyntaxError) as e:
        parse_problem("agents a\nmodel {\n  world w { p }\n  point w\n}\ngoal K[a] &\n", "x.delg")
    assert str(e.value).startswith("x.delg:6:")
    with pytest.raises(UnknownAgentError):
        parse_problem("agents a\nmodel {\n  world w { }\n  point w\n}\nactions {\n"
                      "  action x owner ctr { pre true; }\n}\ngoal K[z] p\n")


def test_round_trip_controller_instances():
    for seed in range(20):
        p = random_controller_instance(random.Random(seed), "public", 3, 3)
        q = parse_problem(write_problem(p))
        assert canonical_key(q.pm) == canonical_key(p.pm)
        assert q.goal == p.goal
        assert q.actions.actions == p.actions.actions
        assert write_problem(q) == write_problem(p)
        assert instance_hash(q) == instance_hash(p)


def test_round_trip_distributed_instances():
    for seed in range(20):
        p = random_distributed_announcements(random.Random(seed), 3, 3)
        q = parse_problem(write_problem(p))
        assert q.turn == p.turn and q.split == p.split
        assert write_problem(q) == write_problem(p)


def test_certificate_round_trip():
    for seed in range(40):
        p = random_controller_instance(random.Random(seed), "announcement", 3, 3)
        v = solve_controller(p.pm, p.actions, p.goal)
        if not v.yes:
            continue
        text = write_certificate(v.strategy, p)
        h, s = read_certificate(text)
        assert h == instance_hash(p)
        assert verify_controller_strategy(p.pm, p.actions, p.goal, s)
