"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The lines are also repeated in the terminal summary of the pytest run.
"""
import itertools
import random
import time

from conftest import ACCEPTANCE_LINES, DATA

from delg.actions import ActionModel, FiniteDomainVar, product
from delg.arena import arena_bound, build_arena, build_multiplayer_arena
from delg.controller import (
    solve_controller_announcements,
    solve_controller_propositional,
    solve_controller_public,
    verify_controller_strategy,
)
from delg.distributed import (
    check_hypotheses,
    solve_distributed_announcements,
    solve_distributed_public,
    strategy_tree_search,
    verify_distributed_strategy,
)
from delg.formula import TRUE, Atom, modal_depth, parse_formula
from delg.generators import (
    random_condplan,
    random_controller_instance,
    random_distributed_announcements,
    random_formula,
    random_g4,
    random_model,
    random_multiplayer_propositional,
    random_pointed_model,
    random_propositional_actions,
    qbf_exhaustive_family,
    random_announcements,
    random_qbf,
)
from delg.models import (
    EpistemicModel,
    PointedModel,
    bisim_contract,
    evaluate,
    holds_at,
    is_s5,
    restrict_to_component,
)
from delg.planning import plan_exists, verify_plan
from delg.problem import load_problem
from delg.reductions import (
    QbfInstance,
    TeamDfaInstance,
    condplan_brute_force,
    condplan_to_controller,
    controller_as_distributed,
    g4_brute_force,
    g4_to_controller,
    normalize_qbf,
    parse_teamdfa,
    qbf_brute_force,
    qbf_to_controller,
    teamdfa_to_distributed,
)
from delg.verdict import Status

# certificate checks made by every suite, summarised by criterion 7
CERTS = {"checked": 0, "failed": []}


def _report(n, ok, detail, elapsed=None, limit=None):
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.2f}s"
        timing += f" < {limit}s]" if limit is not None else "]"
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} {detail}{timing}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _check_controller(tag, p, v):
    if v.yes:
        CERTS["checked"] += 1
        c = verify_controller_strategy(p.pm, p.actions, p.goal, v.strategy)
        if not c:
            CERTS["failed"].append((tag, v.method, c.reason))


def _check_distributed(tag, p, v):
    if v.yes:
        CERTS["checked"] += 1
        c = verify_distributed_strategy(p.pm, p.actions, p.split, p.goal, v.strategy, p.turn)
        if not c:
            CERTS["failed"].append((tag, v.method, c.reason))


def test_criterion_01_example_product_and_plan():
    t0 = time.time()
    p = load_problem(DATA / "two_agents.delg")
    m = product(p.pm.model, p.actions)
    i = m.index(("w", "alpha"))
    facts = {
        "K[a] !p": holds_at(m, i, parse_formula("K[a] !p")),
        "K[b] p": holds_at(m, i, parse_formula("K[b] p")),
        "K[b] !p": holds_at(m, i, parse_formula("K[b] !p")),
    }
    v = plan_exists(p.pm, p.actions, p.goal)
    ok = (
        facts == {"K[a] !p": True, "K[b] p": False, "K[b] !p": False}
        and v.yes
        and v.plan == ("alpha",)
        and bool(verify_plan(p.pm, p.actions, v.plan, p.goal))
    )
    elapsed = time.time() - t0
    _report(1, ok and elapsed < 1, f"facts={facts} plan={v.plan}", elapsed, 1)


def test_criterion_02_qbf_differential():
    t0 = time.time()
    family = qbf_exhaustive_family(2, 3)
    rng = random.Random(2)
    family += [random_qbf(rng, 4) for _ in range(200)]
    wrong, yes = 0, 0
    for n, q in enumerate(family):
        p = qbf_to_controller(normalize_qbf(q))
        v = solve_controller_announcements(p.pm, p.actions, p.goal)
        _check_controller(f"qbf{n}", p, v)
        yes += v.yes
        if v.status != (Status.YES if qbf_brute_force(q) else Status.NO):
            wrong += 1
    elapsed = time.time() - t0
    ok = wrong == 0 and elapsed < 30
    _report(2, ok, f"{len(family)} QBFs ({yes} true), {wrong} disagreements", elapsed, 30)


def test_criterion_03_g4_and_condplan_differential():
    t0 = time.time()
    rng = random.Random(3)
    wrong_g4 = 0
    for n in range(100):
        g = random_g4(rng)
        p = g4_to_controller(g)
        v = solve_controller_public(p.pm, p.actions, p.goal)
        _check_controller(f"g4-{n}", p, v)
        if v.status != (Status.YES if g4_brute_force(g) else Status.NO):
            wrong_g4 += 1
    wrong_cp = 0
    for n in range(50):
        init, actions, goal = random_condplan(rng, 4, 3, 2)
        p = condplan_to_controller(init, actions, goal)
        v = solve_controller_public(p.pm, p.actions, p.goal)
        _check_controller(f"cp-{n}", p, v)
        if v.status != (Status.YES if condplan_brute_force(init, actions, goal) else Status.NO):
            wrong_cp += 1
    elapsed = time.time() - t0
    ok = wrong_g4 == 0 and wrong_cp == 0 and elapsed < 60
    _report(3, ok, f"G4 100 ({wrong_g4} wrong), condplan 50 ({wrong_cp} wrong)", elapsed, 60)


def test_criterion_04_cross_method_agreement():
    t0 = time.time()
    wrong, arena_runs, yes, total = 0, 0, 0, 0
    for seed in range(150):
        rng = random.Random(seed)
        propositional = seed % 2 == 0
        p = random_controller_instance(
            rng,
            "announcement",
            n_worlds=rng.randint(2, 4),
            n_actions=rng.randint(2, 4),
            pre_depth=0 if propositional else 1,
        )
        v2 = solve_controller_announcements(p.pm, p.actions, p.goal)
        v3 = solve_controller_public(p.pm, p.actions, p.goal)
        verdicts = [v2, v3]
        if propositional and modal_depth(p.goal) <= 1:
            verdicts.append(solve_controller_propositional(p.pm, p.actions, p.goal))
            arena_runs += 1
        for v in verdicts:
            _check_controller(f"c4-{seed}", p, v)
        total += 1
        yes += v2.yes
        if len({v.status for v in verdicts}) != 1:
            wrong += 1
    elapsed = time.time() - t0
    ok = total >= 100 and wrong == 0 and elapsed < 60
    _report(
        4, ok, f"{total} instances ({yes} yes, {arena_runs} with arena), {wrong} disagreements",
        elapsed, 60,
    )


def test_criterion_05_distributed_collapses_to_controller():
    t0 = time.time()
    wrong, total = 0, 0
    for seed in range(120):
        rng = random.Random(1000 + seed)
        kind = "announcement" if seed % 2 == 0 else "public"
        p = random_controller_instance(
            rng, kind, n_worlds=rng.randint(2, 3), n_actions=rng.randint(2, 4)
        )
        d = controller_as_distributed(p)
        if kind == "announcement":
            v = solve_controller_announcements(p.pm, p.actions, p.goal)
            w = solve_distributed_announcements(d.pm, d.actions, d.split, d.goal, d.turn)
        else:
            v = solve_controller_public(p.pm, p.actions, p.goal)
            w = solve_distributed_public(d.pm, d.actions, d.split, d.goal, d.turn)
        _check_controller(f"c5-{seed}", p, v)
        _check_distributed(f"c5-{seed}", d, w)
        total += 1
        if v.status != w.status:
            wrong += 1
    elapsed = time.time() - t0
    ok = total >= 50 and wrong == 0 and elapsed < 60
    _report(5, ok, f"{total} instances, {wrong} disagreements", elapsed, 60)


def test_criterion_06_distributed_oracle():
    t0 = time.time()
    wrong, total, skipped, statuses = 0, 0, 0, {}
    for seed in range(200):
        rng = random.Random(5000 + seed)
        p = random_distributed_announcements(
            rng, n_worlds=rng.randint(1, 3), n_actions=rng.randint(2, 4), atoms=("p", "q")
        )
        if not check_hypotheses(p.pm, p.actions, p.turn).ok:
            skipped += 1
            continue
        n = len(p.pm.model.worlds)
        f = solve_distributed_announcements(p.pm, p.actions, p.split, p.goal, p.turn, rounds=n)
        tr = strategy_tree_search(p.pm, p.actions, p.split, p.goal, n, p.turn)
        _check_distributed(f"c6-{seed}", p, f)
        _check_distributed(f"c6-{seed}", p, tr)
        total += 1
        statuses[f.status.value] = statuses.get(f.status.value, 0) + 1
        if f.status != tr.status:
            wrong += 1
    elapsed = time.time() - t0
    ok = total >= 100 and wrong == 0 and elapsed < 120
    _report(
        6, ok, f"{total} instances {statuses} ({skipped} failed H1-H3), {wrong} disagreements",
        elapsed, 120,
    )


def test_criterion_07_certificates():
    # fresh instances of the kinds the other suites do not exercise
    for seed in range(60):
        rng = random.Random(7000 + seed)
        p = random_controller_instance(
            rng, "propositional", n_worlds=rng.randint(1, 3), n_actions=rng.randint(2, 4),
            goal_depth=rng.randint(0, 1),
        )
        _check_controller(f"c7-{seed}", p, solve_controller_propositional(p.pm, p.actions, p.goal))
        d = controller_as_distributed(random_controller_instance(rng, "announcement", 2, 3))
        n = len(d.pm.model.worlds)
        _check_distributed(f"c7-{seed}", d, strategy_tree_search(
            d.pm, d.actions, d.split, d.goal, 2 * n, d.turn))
    for name in ("teamdfa_win.delg",):
        p = load_problem(DATA / name)
        _check_distributed(name, p, strategy_tree_search(p.pm, p.actions, p.split, p.goal, 6, p.turn))
    failed = CERTS["failed"]
    ok = CERTS["checked"] > 0 and not failed
    _report(7, ok, f"{CERTS['checked']} yes-certificates checked, {len(failed)} failures {failed[:3]}")


def test_criterion_08_construction_sizes():
    t0 = time.time()
    bad = []
    for seed in range(100):
        rng = random.Random(8000 + seed)
        n_atoms = rng.randint(1, 4)
        atoms = [f"p{i}" for i in range(n_atoms)]
        p = random_controller_instance(
            rng, "propositional", n_worlds=rng.randint(1, 4), n_actions=rng.randint(1, 5),
            atoms=atoms,
        )
        g = build_arena(p.pm, p.actions)
        if len(g) > arena_bound(p.pm, p.actions):
            bad.append(("two-player", seed, len(g)))
        d = random_multiplayer_propositional(rng, rng.randint(1, 4), rng.randint(1, 5), atoms)
        g = build_multiplayer_arena(d.pm, d.actions, d.turn)
        if len(g) > arena_bound(d.pm, d.actions, multi=True):
            bad.append(("multi-player", seed, len(g)))
    for k in range(1, 5):
        variables = [f"v{i}" for i in range(2 * k)]
        prefix = [("exists" if i % 2 == 0 else "forall", v) for i, v in enumerate(variables)]
        p = qbf_to_controller(QbfInstance(prefix, Atom("v0")))
        if len(p.pm.model.worlds) != 4 * k + 1 or len(p.actions.actions) != 4 * k:
            bad.append(("qbf", k, len(p.pm.model.worlds), len(p.actions.actions)))
    elapsed = time.time() - t0
    _report(8, not bad, f"100 two-player + 100 multi-player arenas, QBF k=1..4; violations {bad}",
            elapsed)


def test_criterion_09_semantics_preservation():
    t0 = time.time()
    rng = random.Random(9)
    atoms, agents = ("p", "q"), ("a", "b")
    bisim_bad = 0
    for n in range(1000):
        pm = random_pointed_model(rng, rng.randint(1, 5), atoms, agents, s5=n % 2 == 0)
        f = random_formula(rng, atoms, agents, depth=2, size=rng.randint(1, 6))
        truth = evaluate(pm, f)
        if evaluate(bisim_contract(pm), f) != truth or evaluate(restrict_to_component(pm), f) != truth:
            bisim_bad += 1
    s5_bad = 0
    for n in range(200):
        m = random_model(rng, rng.randint(1, 4), atoms, agents, s5=True)
        if n % 2:
            a = random_propositional_actions(rng, rng.randint(1, 4), atoms, agents)
        else:
            a = random_announcements(rng, rng.randint(1, 4), atoms, agents)
        if not is_s5(product(m, a)):
            s5_bad += 1
    bound_bad = 0
    for n in range(100):
        p = random_controller_instance(rng, "announcement", rng.randint(1, 4), rng.randint(1, 4))
        w = len(p.pm.model.worlds)
        v1 = plan_exists(p.pm, p.actions, p.goal, bound=w)
        v2 = plan_exists(p.pm, p.actions, p.goal, bound=w + 5)
        if v1.status != v2.status or v1.status not in (Status.YES, Status.NO):
            bound_bad += 1
        if v1.yes and not verify_plan(p.pm, p.actions, v1.plan, p.goal):
            bound_bad += 1
    elapsed = time.time() - t0
    ok = bisim_bad == 0 and s5_bad == 0 and bound_bad == 0
    _report(
        9, ok,
        f"bisim/component {bisim_bad}/1000, S5 closure {s5_bad}/200, bound {bound_bad}/100 violations",
        elapsed,
    )


def _violators():
    """Hand-built instances, each breaking exactly the named hypothesis."""
    turn = FiniteDomainVar("turn", ["a", "b"])
    ta, tb = turn.valuation("a"), turn.valuation("b")
    ident = lambda names: [(x, x) for x in names]
    full = lambda names: [(x, y) for x in names for y in names]
    out = {}

    # H1: a cannot tell two worlds that disagree on whose turn it is
    m = EpistemicModel(["w", "u"], {"a": full(["w", "u"]), "b": ident(["w", "u"])},
                       {"w": ta, "u": tb})
    a = ActionModel(["x"], {"a": ident(["x"]), "b": ident(["x"])},
                    {"x": turn.test("a")}, {"x": turn.assign("b")}, {"x": "a"})
    out["H1"] = (PointedModel(m, "w"), a, turn, ("'w'", "'u'"))

    # H2: b confuses two actions that hand the turn to different agents
    m = EpistemicModel(["w"], {"a": [("w", "w")], "b": [("w", "w")]}, {"w": ta})
    names = ["x", "y"]
    a = ActionModel(names, {"a": ident(names), "b": full(names)},
                    {x: turn.test("a") for x in names},
                    {"x": turn.assign("a"), "y": turn.assign("b")}, {"x": "a", "y": "a"})
    out["H2"] = (PointedModel(m, "w"), a, turn, ("x", "y"))

    # H3: a cannot tell w from u, but x is executable only at w
    m = EpistemicModel(["w", "u"], {"a": full(["w", "u"]), "b": ident(["w", "u"])},
                       {"w": ta | {"p"}, "u": ta})
    names = ["x", "y"]
    a = ActionModel(names, {"a": ident(names), "b": ident(names)},
                    {"x": parse_formula("turn@a & p"), "y": turn.test("b")},
                    {"x": turn.assign("b"), "y": turn.assign("a")}, {"x": "a", "y": "b"})
    out["H3"] = (PointedModel(m, "w"), a, turn, ("'w'", "'u'"))

    # turn discipline: x belongs to a but is executable whatever the turn
    m = EpistemicModel(["w"], {"a": [("w", "w")], "b": [("w", "w")]}, {"w": tb})
    a = ActionModel(["x"], {"a": [("x", "x")], "b": [("x", "x")]},
                    {"x": TRUE}, {"x": turn.assign("b")}, {"x": "a"})
    out["turn-discipline"] = (PointedModel(m, "w"), a, turn, ("x",))
    return out


def test_criterion_10_hypotheses():
    t0 = time.time()
    problems = []
    dfas = [parse_teamdfa((DATA / f).read_text()) for f in ("dfa_win.dfa", "dfa_lose.dfa")]
    rng = random.Random(10)
    for _ in range(8):
        states = [f"s{i}" for i in range(rng.randint(1, 4))]
        delta = {(s, b): rng.choice(states) for s in states for b in (0, 1)}
        dfas.append(TeamDfaInstance(
            states, states[0], delta,
            {s for s in states if rng.random() < 0.5}, {s for s in states if rng.random() < 0.3},
        ))
    for t, enc in itertools.product(dfas, ("onehot", "binary")):
        rep = check_hypotheses(*_teamdfa_args(t, enc))
        if not rep.ok:
            problems.append(("teamdfa", enc, rep.as_dict()))
    for name, (pm, a, turn, needles) in _violators().items():
        rep = dict(check_hypotheses(pm, a, turn).items())
        r = rep[name]
        if r.status != "fail" or not all(s in r.witness for s in needles):
            problems.append((name, r.status, r.witness))
    elapsed = time.time() - t0
    _report(10, not problems, f"{len(dfas) * 2} encodings, 4 violators; problems {problems}", elapsed)


def _teamdfa_args(t, enc):
    p = teamdfa_to_distributed(t, enc)
    return p.pm, p.actions, p.turn
