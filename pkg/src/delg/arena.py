"""Epistemic game arenas for propositional action models.

Two-player arenas have world vertices ``("w", world)`` and action vertices
``("a", action, valuation, i)`` where ``i`` is the player about to move.
Multi-player arenas drop ``i``; the owner is read from the turn variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .actions import CTR, ENV, ActionModel, FiniteDomainVar, classify, post_valuation
from .errors import ModelError, PreconditionError
from .formula import (
    And,
    Atom,
    Bot,
    Formula,
    Implies,
    Knows,
    Not,
    Or,
    Poss,
    Top,
    agents_of,
    atoms_of,
    eval_prop,
    modal_depth,
)
from .game import GameGraph, Node, explore
from .models import PointedModel, component_mask, _bits


@dataclass
class GameArena:
    """Finite game graph with per-agent vertex relations and valuations.

    ``owner`` maps vertices to 0/1 (two-player) or to an agent (multi-player).
    ``moves[v]`` lists ``(action, target)`` pairs sorted by action id.
    """

    vertices: tuple
    owner: dict
    initial: Hashable
    moves: dict
    valuation: dict
    agents: tuple
    _related: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self) -> frozenset:
        return frozenset((v, t) for v, ms in self.moves.items() for _, t in ms)

    def successors(self, v) -> tuple:
        return tuple(t for _, t in self.moves[v])

    def related(self, agent, v) -> tuple:
        """Vertices ``u`` with ``v R'_agent u``."""
        return self._related[agent](v)

    def relation(self, agent) -> frozenset:
        return frozenset((v, u) for v in self.vertices for u in self.related(agent, v))

    @property
    def relations(self) -> dict:
        return {b: self.relation(b) for b in self.agents}


def _problem_atoms(pm: PointedModel, a: ActionModel, goal: Formula = None) -> frozenset:
    out = set(pm.model.atoms()) | set(a.atoms())
    if goal is not None:
        out |= atoms_of(goal)
    return frozenset(out)


def arena_bound(pm, a, goal=None, multi=False) -> int:
    """``|W| + |A| * 2^(m+1)`` (two-player) or ``|W| + |A| * 2^m`` (multi-player)."""
    m = len(_problem_atoms(pm, a, goal))
    return len(pm.model.worlds) + len(a.actions) * 2 ** (m + (0 if multi else 1))


def _require_propositional(a: ActionModel):
    if not classify(a).propositional:
        raise PreconditionError("arena construction needs a propositional action model")


def _component_worlds(pm: PointedModel) -> list:
    m = pm.model
    return list(_bits(component_mask(m, 1 << pm.index)))


def _relation_index(pm, a, vertices, key_of):
    """Per-agent relation lookups shared by both arena kinds."""
    m = pm.model
    by_action = {}
    for v in vertices:
        if v[0] == "a":
            by_action.setdefault(key_of(v), []).append(v)
    agents = tuple(sorted(set(m.agents) | set(a.agents)))
    related = {}
    for b in agents:
        ms, As = m.succ(b), a.succ(b)

        def rel(v, b=b, ms=ms, As=As):
            if v[0] == "w":
                i = m.index(v[1])
                return tuple(("w", m.worlds[j]) for j in _bits(ms[i]))
            out = []
            k = a.index(v[1])
            for l in _bits(As[k]):
                out.extend(by_action.get(key_of(v, a.actions[l]), ()))
            return tuple(out)

        related[b] = rel
    return agents, related


def build_arena(pm: PointedModel, a: ActionModel) -> GameArena:
    """Two-player arena simulating the Controller/Environment game on ``MA*``.

    Vertices reachable from every world of the point's component are built,
    since knowledge at the initial world ranges over its related worlds.
    """
    _require_propositional(a)
    m = pm.model
    sides = (a.owned_by(CTR), a.owned_by(ENV))
    sides = tuple(tuple(sorted(s, key=str)) for s in sides)
    worlds = _component_worlds(pm)
    vertices, owner, moves, valuation = [], {}, {}, {}
    queue = []
    for i in worlds:
        v = ("w", m.worlds[i])
        vertices.append(v)
        owner[v] = 0
        valuation[v] = m.vals[i]
        queue.append(v)
    pos = 0
    while pos < len(queue):
        v = queue[pos]
        pos += 1
        val = valuation[v]
        side = 0 if v[0] == "w" else v[3]
        out = []
        for x in sides[side]:
            if not eval_prop(a.pre[x], val):
                continue
            t = ("a", x, tuple(sorted(post_valuation(val, a, x))), 1 - side)
            out.append((x, t))
            if t not in owner:
                vertices.append(t)
                owner[t] = t[3]
                valuation[t] = frozenset(t[2])
                queue.append(t)
        moves[v] = tuple(out)

    def key_of(v, action=None):
        return (v[1] if action is None else action, v[3])

    agents, related = _relation_index(pm, a, vertices, key_of)
    return GameArena(
        tuple(vertices), owner, ("w", pm.point), moves, valuation, agents, related
    )


def build_multiplayer_arena(pm: PointedModel, a: ActionModel, turn: FiniteDomainVar) -> GameArena:
    """Multi-player arena; each vertex belongs to the agent named by ``turn``."""
    _require_propositional(a)
    m = pm.model
    acts = sorted(a.actions, key=str)
    worlds = _component_worlds(pm)
    vertices, owner, moves, valuation = [], {}, {}, {}

    def add(v, val):
        mover = turn.value_in(val)
        if mover is None:
            raise ModelError(f"vertex {v!r} does not determine whose turn it is")
        vertices.append(v)
        owner[v] = mover
        valuation[v] = frozenset(val)
        queue.append(v)

    queue = []
    for i in worlds:
        add(("w", m.worlds[i]), m.vals[i])
    pos = 0
    while pos < len(queue):
        v = queue[pos]
        pos += 1
        val = valuation[v]
        out = []
        for x in acts:
            if not eval_prop(a.pre[x], val):
                continue
            nv = post_valuation(val, a, x)
            t = ("a", x, tuple(sorted(nv)))
            out.append((x, t))
            if t not in owner:
                add(t, nv)
        moves[v] = tuple(out)

    def key_of(v, action=None):
        return v[1] if action is None else action

    agents, related = _relation_index(pm, a, vertices, key_of)
    return GameArena(
        tuple(vertices), owner, ("w", pm.point), moves, valuation, agents, related
    )


# --------------------------------------------------------------------------
# depth-1 knowledge expansion


@dataclass
class ExpandedArena:
    """Arena whose vertices carry the information sets of the goal's agents.

    An expanded vertex is ``(v, ((b, S_b), ...))``.
    """

    base: GameArena
    agents: tuple
    goal: Formula
    initial: tuple = None
    graph: GameGraph = None

    def __post_init__(self):
        v0 = self.base.initial
        sets = tuple((b, frozenset(self.base.related(b, v0))) for b in self.agents)
        self.initial = (v0, sets)

    def step(self, ev, target):
        """Expanded successor when the play moves from ``ev`` to base vertex ``target``."""
        base = self.base
        _, sets = ev
        new = []
        for b, s in sets:
            reach = set()
            for x in s:
                reach.update(base.successors(x))
            new.append((b, frozenset(u for u in base.related(b, target) if u in reach)))
        return (target, tuple(new))

    def holds(self, ev) -> bool:
        v, sets = ev
        return _eval_depth1(self.goal, self.base.valuation[v], dict(sets), self.base.valuation)

    def owner(self, ev):
        return self.base.owner[ev[0]]

    def moves(self, ev):
        return tuple((x, self.step(ev, t)) for x, t in self.base.moves[ev[0]])


def _eval_depth1(f, val, sets, valuation) -> bool:
    if isinstance(f, Atom):
        return f.name in val
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Not):
        return not _eval_depth1(f.sub, val, sets, valuation)
    if isinstance(f, And):
        return _eval_depth1(f.left, val, sets, valuation) and _eval_depth1(
            f.right, val, sets, valuation
        )
    if isinstance(f, Or):
        return _eval_depth1(f.left, val, sets, valuation) or _eval_depth1(
            f.right, val, sets, valuation
        )
    if isinstance(f, Implies):
        return (not _eval_depth1(f.left, val, sets, valuation)) or _eval_depth1(
            f.right, val, sets, valuation
        )
    if isinstance(f, Knows):
        return all(eval_prop(f.sub, valuation[u]) for u in sets[f.agent])
    if isinstance(f, Poss):
        return any(eval_prop(f.sub, valuation[u]) for u in sets[f.agent])
    raise TypeError(f)


def expand_knowledge_depth1(
    g: GameArena, goal: Formula, max_nodes: int = None, a: ActionModel = None
) -> ExpandedArena:
    """Track the information set of every agent the goal talks about.

    Returns an :class:`ExpandedArena` whose ``graph`` holds the reachable
    expanded vertices as ``or``/``and``/``goal`` nodes.  If the action
    model ``a`` is given, agents whose action relation links Controller and
    Environment actions are rejected, because arena histories cannot mix
    the two sides at one position.
    """
    if modal_depth(goal) > 1:
        raise PreconditionError("knowledge expansion supports goals of modal depth <= 1")
    agents = tuple(sorted(agents_of(goal)))
    if a is not None:
        for b in agents:
            for x, y in a.relation(b):
                if a.owner[x] != a.owner[y]:
                    raise PreconditionError(
                        f"agent {b} confuses {x} ({a.owner[x]}) with {y} ({a.owner[y]})"
                    )
    ex = ExpandedArena(g, agents, goal)

    def expand(ev):
        if ex.holds(ev):
            return "goal", []
        kind = "or" if ex.owner(ev) == 0 else "and"
        return kind, [(x, t, t) for x, t in ex.moves(ev)]

    ex.graph = explore(ex.initial, ex.initial, expand, max_nodes)
    return ex


def arena_graph(g: GameArena, goal_pred) -> GameGraph:
    """The arena itself as a game graph, for a vertex predicate."""
    nodes = {}
    for v in g.vertices:
        if goal_pred(v):
            nodes[v] = Node("goal")
        else:
            nodes[v] = Node("or" if g.owner[v] == 0 else "and", g.moves[v])
    return GameGraph(g.initial, nodes)


def solve_attractor(g: GameArena, goal_pred, deadlock: str = "lose"):
    """Winning set of Player 0 and a positional strategy (vertex -> action)."""
    from .game import attractor

    graph = arena_graph(g, goal_pred)
    rank, choice = attractor(graph, deadlock)
    return frozenset(rank), choice
