import pytest

from delg.game import GameGraph, Node, attractor, explore, strategy_support


def chain():
    # or -> and -> goal, and a side branch to a dead end
    return GameGraph(
        "s",
        {
            "s": Node("or", (("left", "t"), ("right", "d"))),
            "t": Node("and", (("x", "g"), ("y", "g"))),
            "d": Node("dead"),
            "g": Node("goal"),
        },
    )


def test_attractor_ranks_and_choice():
    rank, choice = attractor(chain())
    assert rank == {"g": 0, "t": 1, "s": 2}
    assert choice == {"s": "left"}


def test_and_node_needs_all_successors():
    g = GameGraph("t", {"t": Node("and", (("x", "g"), ("y", "d"))), "g": Node("goal"), "d": Node("dead")})
    rank, _ = attractor(g)
    assert "t" not in rank


def test_deadlock_modes():
    g = GameGraph("t", {"t": Node("and")})
    assert "t" not in attractor(g, "lose")[0]
    assert "t" in attractor(g, "vacuous")[0]
    with pytest.raises(ValueError):
        attractor(g, "draw")


def test_optimistic_horizon():
    g = GameGraph("s", {"s": Node("or", (("x", "h"),)), "h": Node("horizon")})
    assert "s" not in attractor(g)[0]
    assert "s" in attractor(g, optimistic=True)[0]


def test_cycles_are_not_winning():
    g = GameGraph("s", {"s": Node("or", (("x", "t"),)), "t": Node("and", (("y", "s"),))})
    assert attractor(g)[0] == {}


def test_strategy_support_follows_choices():
    g = chain()
    rank, choice = attractor(g)
    assert strategy_support(g, choice, rank) == ["s"]


def test_explore_budget_marks_horizon():
    def expand(n):
        return "or", [("inc", n + 1, n + 1)]

    g = explore(0, 0, expand, max_nodes=5)
    assert not g.complete
    assert g.truncated
    assert len(g) == 6
