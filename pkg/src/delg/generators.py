"""Seeded random models, formulas and instances for tests and benchmarks.

Every generator takes a ``random.Random`` so that families are reproducible.
"""
from __future__ import annotations

import itertools
import random

from .actions import CTR, ENV, ActionModel, FiniteDomainVar
from .distributed import TeamSplit
from .formula import FALSE, TRUE, And, Atom, Formula, Knows, Not, Or, Poss, conj, disj, eval_prop
from .models import EpistemicModel, PointedModel
from .problem import Problem
from .reductions import CondPlanAction, G4Instance, QbfInstance

# --------------------------------------------------------------------------
# formulas


def random_formula(rng: random.Random, atoms, agents=(), depth: int = 1, size: int = 4) -> Formula:
    """Random formula over ``atoms`` with modal depth at most ``depth``."""
    atoms, agents = list(atoms), list(agents)
    if size <= 1 or not atoms:
        roll = rng.random()
        if roll < 0.08 or not atoms:
            return rng.choice([TRUE, FALSE])
        return Atom(rng.choice(atoms))
    kinds = ["not", "and", "or"]
    if depth > 0 and agents:
        kinds += ["K", "M"]
    k = rng.choice(kinds)
    if k == "not":
        return Not(random_formula(rng, atoms, agents, depth, size - 1))
    if k in ("K", "M"):
        sub = random_formula(rng, atoms, agents, depth - 1, size - 1)
        return (Knows if k == "K" else Poss)(rng.choice(agents), sub)
    left = rng.randint(1, size - 1)
    a = random_formula(rng, atoms, agents, depth, left)
    b = random_formula(rng, atoms, agents, depth, size - left)
    return And(a, b) if k == "and" else Or(a, b)


def random_propositional(rng: random.Random, atoms, size: int = 3) -> Formula:
    return random_formula(rng, atoms, (), 0, size)


# --------------------------------------------------------------------------
# models


def random_partition_pairs(rng: random.Random, items) -> list:
    """Pairs of a random equivalence relation on ``items``."""
    items = list(items)
    blocks = []
    for x in items:
        j = rng.randint(0, len(blocks))
        if j == len(blocks):
            blocks.append([x])
        else:
            blocks[j].append(x)
    return [(x, y) for b in blocks for x in b for y in b]


def random_relation_pairs(rng: random.Random, items, density: float = 0.4) -> list:
    items = list(items)
    return [(x, y) for x in items for y in items if rng.random() < density]


def random_model(
    rng: random.Random, n_worlds: int, atoms, agents, s5: bool = True
) -> EpistemicModel:
    worlds = [f"w{i}" for i in range(n_worlds)]
    val = {w: {p for p in atoms if rng.random() < 0.5} for w in worlds}
    rel = {
        b: random_partition_pairs(rng, worlds) if s5 else random_relation_pairs(rng, worlds)
        for b in agents
    }
    return EpistemicModel(worlds, rel, val, agents)


def random_pointed_model(rng, n_worlds, atoms, agents, s5=True) -> PointedModel:
    m = random_model(rng, n_worlds, atoms, agents, s5)
    return PointedModel(m, rng.choice(m.worlds))


# --------------------------------------------------------------------------
# action models


def _owners(rng, names, owners):
    # the first owner (Controller) gets most actions
    weights = [2] + [1] * (len(owners) - 1)
    own = {x: rng.choices(owners, weights)[0] for x in names}
    # make sure both sides have at least one action when there is room
    if len(names) >= len(owners):
        for x, o in zip(rng.sample(names, len(owners)), owners):
            own[x] = o
    return own


def _random_pre(rng, atoms, agents, depth):
    """Preconditions that are often satisfiable, so that games do not stall at once."""
    if rng.random() < 0.2:
        return TRUE
    f = random_formula(rng, atoms, agents, depth, rng.randint(1, 3))
    return Not(f) if rng.random() < 0.3 else f


def random_announcements(
    rng: random.Random, n: int, atoms, agents, depth: int = 1, owners=(CTR, ENV)
) -> ActionModel:
    names = [f"x{i}" for i in range(n)]
    pre = {x: _random_pre(rng, atoms, agents, depth) for x in names}
    ident = [(x, x) for x in names]
    return ActionModel(names, {b: ident for b in agents}, pre, owner=_owners(rng, names, owners))


def random_public_actions(
    rng: random.Random, n: int, atoms, agents, depth: int = 1, owners=(CTR, ENV)
) -> ActionModel:
    """Identity relations; random preconditions and propositional postconditions."""
    names = [f"x{i}" for i in range(n)]
    atoms = list(atoms)
    pre, post = {}, {}
    for x in names:
        pre[x] = _random_pre(rng, atoms, agents, depth)
        changed = rng.sample(atoms, rng.randint(0, min(2, len(atoms))))
        post[x] = {p: random_propositional(rng, atoms, rng.randint(1, 2)) for p in changed}
    ident = [(x, x) for x in names]
    return ActionModel(names, {b: ident for b in agents}, pre, post, _owners(rng, names, owners))


def random_propositional_actions(
    rng: random.Random, n: int, atoms, agents, owners=(CTR, ENV), same_side_classes=True
) -> ActionModel:
    """S5 action model with propositional pre/post.

    With ``same_side_classes`` no agent confuses a ``ctr`` action with an
    ``env`` action, which the knowledge-expanded arena requires.
    """
    names = [f"x{i}" for i in range(n)]
    atoms = list(atoms)
    own = _owners(rng, names, owners)
    pre, post = {}, {}
    for x in names:
        pre[x] = random_propositional(rng, atoms, rng.randint(1, 3))
        changed = rng.sample(atoms, rng.randint(0, min(2, len(atoms))))
        post[x] = {p: random_propositional(rng, atoms, rng.randint(1, 2)) for p in changed}
    rel = {}
    for b in agents:
        if same_side_classes:
            rel[b] = []
            for o in owners:
                rel[b] += random_partition_pairs(rng, [x for x in names if own[x] == o])
        else:
            rel[b] = random_partition_pairs(rng, names)
    return ActionModel(names, rel, pre, post, own)


# --------------------------------------------------------------------------
# whole instances


def random_controller_instance(
    rng: random.Random,
    kind: str = "announcement",
    n_worlds: int = 3,
    n_actions: int = 3,
    atoms=("p", "q"),
    agents=("a", "b"),
    pre_depth: int = 1,
    goal_depth: int = 1,
    env_pass: bool = True,
) -> Problem:
    """``kind`` is ``announcement``, ``public`` or ``propositional``.

    With ``env_pass`` Environment can always move, so that most games are
    not lost to an Environment deadlock.
    """
    pm = random_pointed_model(rng, n_worlds, atoms, agents)
    if kind == "announcement":
        a = random_announcements(rng, n_actions, atoms, agents, pre_depth)
    elif kind == "public":
        a = random_public_actions(rng, n_actions, atoms, agents, pre_depth)
    elif kind == "propositional":
        a = random_propositional_actions(rng, n_actions, atoms, agents)
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    if env_pass:
        a = _with_env_pass(a, agents)
    if kind == "announcement" and goal_depth > 0:
        goal = _learning_goal(rng, pm, atoms, agents, goal_depth)
    else:
        goal = random_formula(rng, atoms, agents, goal_depth, rng.randint(1, 4))
    return Problem(tuple(agents), pm, a, goal, "controller")


def _learning_goal(rng, pm, atoms, agents, depth):
    """``K[b] psi`` with ``psi`` a fact at the point: announcements never change
    facts, so goals about learning true facts are the reachable ones."""
    val = pm.model.valuation(pm.point)
    psi = random_propositional(rng, atoms, rng.randint(1, 3))
    for _ in range(20):
        if eval_prop(psi, val):
            break
        psi = random_propositional(rng, atoms, rng.randint(1, 3))
    goal = Knows(rng.choice(agents), psi)
    if rng.random() < 0.4:
        goal = And(goal, random_formula(rng, atoms, agents, depth, rng.randint(1, 3)))
    return goal


def _with_env_pass(a: ActionModel, agents) -> ActionModel:
    """Add an Environment action ``pass`` that is always executable and changes nothing."""
    names = list(a.actions) + ["pass"]
    rel = {b: list(a.relation(b)) + [("pass", "pass")] for b in agents}
    return ActionModel(names, rel, a.pre, a.post, {**a.owner, "pass": ENV})


def random_distributed_announcements(
    rng: random.Random,
    n_worlds: int = 3,
    n_actions: int = 4,
    atoms=("p",),
    existential=("a", "b"),
    universal=("u",),
    goal_depth: int = 1,
) -> Problem:
    """Announcement game satisfying the hypotheses by construction.

    Every action of agent ``x`` has precondition ``turn=x & K[x] psi``, which
    ``x`` always knows, and hands the turn to a fixed next agent.  The turn
    is the same in every world.
    """
    agents = tuple(existential) + tuple(universal)
    turn = FiniteDomainVar("turn", agents)
    start = rng.choice(agents)
    worlds = [f"w{i}" for i in range(n_worlds)]
    val = {w: {p for p in atoms if rng.random() < 0.5} | turn.valuation(start) for w in worlds}
    rel = {b: random_partition_pairs(rng, worlds) for b in agents}
    model = EpistemicModel(worlds, rel, val, agents)
    names = [f"x{i}" for i in range(n_actions)]
    # every agent that can get the turn should own something; cycle through them
    order = list(agents)
    rng.shuffle(order)
    owner = {x: order[i % len(order)] for i, x in enumerate(names)}
    pre, post = {}, {}
    for x in names:
        o = owner[x]
        psi = random_formula(rng, atoms, agents, max(goal_depth - 1, 0), rng.randint(1, 3))
        pre[x] = conj([turn.test(o), Knows(o, psi)])
        post[x] = turn.assign(rng.choice(agents))
    ident = [(x, x) for x in names]
    a = ActionModel(names, {b: ident for b in agents}, pre, post, owner)
    goal = random_formula(rng, atoms, agents, goal_depth, rng.randint(1, 4))
    split = TeamSplit(frozenset(existential), frozenset(universal))
    return Problem(agents, PointedModel(model, rng.choice(worlds)), a, goal, "distributed", turn, split)


def random_multiplayer_propositional(
    rng: random.Random, n_worlds: int, n_actions: int, atoms, agents=("a", "b")
) -> Problem:
    """Propositional instance with a turn variable over ``agents``."""
    turn = FiniteDomainVar("turn", agents)
    start = rng.choice(agents)
    worlds = [f"w{i}" for i in range(n_worlds)]
    val = {w: {p for p in atoms if rng.random() < 0.5} | turn.valuation(start) for w in worlds}
    model = EpistemicModel(worlds, {b: random_partition_pairs(rng, worlds) for b in agents}, val)
    names = [f"x{i}" for i in range(n_actions)]
    owner = {x: rng.choice(agents) for x in names}
    pre, post = {}, {}
    for x in names:
        pre[x] = conj([turn.test(owner[x]), random_propositional(rng, atoms, rng.randint(1, 2))])
        changed = rng.sample(list(atoms), rng.randint(0, min(2, len(atoms))))
        post[x] = {p: random_propositional(rng, atoms, rng.randint(1, 2)) for p in changed}
        post[x].update(turn.assign(rng.choice(agents)))
    a = ActionModel(names, {b: random_partition_pairs(rng, names) for b in agents}, pre, post, owner)
    split = TeamSplit(frozenset(agents[:1]), frozenset(agents[1:]))
    goal = random_propositional(rng, atoms, 2)
    return Problem(tuple(agents), PointedModel(model, rng.choice(worlds)), a, goal, "distributed",
                   turn, split)


# --------------------------------------------------------------------------
# reduction inputs


def _clause(lits):
    return disj(Atom(v) if pos else Not(Atom(v)) for v, pos in lits)


def qbf_clauses(variables) -> list:
    """All nonempty clauses over ``variables`` without complementary literals."""
    out = []
    for signs in itertools.product((None, True, False), repeat=len(variables)):
        lits = tuple((v, s) for v, s in zip(variables, signs) if s is not None)
        if lits:
            out.append(lits)
    return out


def qbf_exhaustive_family(n_vars: int = 2, max_clauses: int = 3) -> list:
    """Every CNF matrix of at most ``max_clauses`` distinct clauses."""
    variables = [f"p{i}" for i in range(1, n_vars + 1)]
    prefix = tuple(("exists" if i % 2 == 0 else "forall", v) for i, v in enumerate(variables))
    clauses = qbf_clauses(variables)
    out = []
    for n in range(0, max_clauses + 1):
        for combo in itertools.combinations(clauses, n):
            out.append(QbfInstance(prefix, conj(_clause(c) for c in combo)))
    return out


def random_qbf(rng: random.Random, n_vars: int = 4, n_clauses: int = None) -> QbfInstance:
    variables = [f"p{i}" for i in range(1, n_vars + 1)]
    prefix = tuple(("exists" if i % 2 == 0 else "forall", v) for i, v in enumerate(variables))
    if n_clauses is None:
        n_clauses = rng.randint(1, 5)
    clauses = []
    for _ in range(n_clauses):
        vs = rng.sample(variables, rng.randint(1, min(3, n_vars)))
        clauses.append(tuple((v, rng.random() < 0.5) for v in vs))
    return QbfInstance(prefix, conj(_clause(c) for c in clauses))


def random_g4(rng: random.Random, k: int = None, n_terms: int = None) -> G4Instance:
    if k is None:
        k = rng.randint(1, 2)
    atoms = [f"p{i}" for i in range(1, k + 1)] + [f"q{i}" for i in range(1, k + 1)]
    if n_terms is None:
        n_terms = rng.randint(1, 3)
    terms = []
    for _ in range(n_terms):
        vs = rng.sample(atoms, rng.randint(1, len(atoms)))
        terms.append(tuple((v, rng.random() < 0.5) for v in vs))
    init = frozenset(p for p in atoms if rng.random() < 0.5)
    return G4Instance(k, tuple(terms), init)


def random_condplan(rng: random.Random, n_atoms: int = 4, n_actions: int = 3, n_posts: int = 2):
    """Returns ``(init, actions, goal)``."""
    atoms = [f"p{i}" for i in range(n_atoms)]
    actions = []
    for _ in range(rng.randint(1, n_actions)):
        posts = []
        for _ in range(rng.randint(1, n_posts)):
            changed = rng.sample(atoms, rng.randint(1, 2))
            posts.append({p: random_propositional(rng, atoms, rng.randint(1, 2)) for p in changed})
        actions.append(CondPlanAction(random_propositional(rng, atoms, 2), tuple(posts)))
    init = frozenset(p for p in atoms if rng.random() < 0.5)
    goal = random_propositional(rng, atoms, rng.randint(1, 3))
    return init, actions, goal
