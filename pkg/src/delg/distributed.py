"""Distributed synthesis of uniform strategies for a team of agents.

Whose turn it is is stored in a finite-domain variable ``turn`` ranging over
the agents.  When an existential agent ``x`` picks an action, the choice is
made for its whole indistinguishability cell: the game continues from every
world of the cell, which is what makes the resulting strategy uniform.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .actions import (
    ActionModel,
    FiniteDomainVar,
    apply_pointed,
    classify,
    product,
    satisfiable,
)
from .arena import build_multiplayer_arena
from .errors import HypothesisError, ModelError, PreconditionError
from .formula import FALSE, TRUE, And, Formula, Not, is_propositional, eval_prop
from .game import attractor, explore, strategy_support
from .models import (
    PointedModel,
    _bits,
    canonical_key,
    cell_key,
    evaluate,
    model_key,
    restrict_to_component,
    truth_mask,
)
from .strategy import DistributedStrategy, InfoKey
from .verdict import Check, Status, Verdict

DEFAULT_BUDGET = 2_000_000
DEFAULT_MAX_NODES = 200_000


@dataclass(frozen=True)
class TeamSplit:
    existential: frozenset
    universal: frozenset

    def __post_init__(self):
        object.__setattr__(self, "existential", frozenset(self.existential))
        object.__setattr__(self, "universal", frozenset(self.universal))
        both = self.existential & self.universal
        if both:
            raise ModelError(f"agents on both teams: {sorted(both)}")

    @property
    def agents(self) -> frozenset:
        return self.existential | self.universal

    def is_existential(self, agent) -> bool:
        return agent in self.existential


def turn_variable(agents) -> FiniteDomainVar:
    return FiniteDomainVar("turn", tuple(agents))


def _all_agents(pm, a):
    return sorted(set(pm.model.agents) | set(a.agents))


def _mover(val, turn: FiniteDomainVar, where=""):
    x = turn.value_in(val)
    if x is None:
        raise HypothesisError(f"turn is not determined{where}")
    return x


# --------------------------------------------------------------------------
# hypotheses


@dataclass
class HypothesisResult:
    status: str  # "pass", "fail" or "unknown"
    witness: str = ""

    def __bool__(self):
        return self.status == "pass"


@dataclass
class HypothesesReport:
    h1: HypothesisResult
    h2: HypothesisResult
    h3: HypothesisResult
    turn_discipline: HypothesisResult

    def items(self):
        return (
            ("H1", self.h1),
            ("H2", self.h2),
            ("H3", self.h3),
            ("turn-discipline", self.turn_discipline),
        )

    @property
    def ok(self) -> bool:
        return all(r.status == "pass" for _, r in self.items())

    def as_dict(self) -> dict:
        return {k: {"status": r.status, "witness": r.witness} for k, r in self.items()}


def _conjuncts(f):
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _turn_effect(a: ActionModel, x, turn: FiniteDomainVar):
    """Value of ``turn`` after ``x``: a domain value, ``keep`` or ``None`` (not constant)."""
    entries = {p: a.post[x][p] for p in turn.atoms() if p in a.post[x]}
    if not entries:
        return "keep"
    if any(f not in (TRUE, FALSE) for f in entries.values()):
        return None
    val = {p for p in turn.atoms() if entries.get(p) == TRUE}
    return turn.value_in(val) if len(entries) == len(turn.atoms()) else None


def _check_h1(pm, turn):
    comp = restrict_to_component(pm).model
    values = {}
    for i, w in enumerate(comp.worlds):
        values.setdefault(turn.value_in(comp.vals[i]), []).append(w)
    if None in values:
        return HypothesisResult("fail", f"world {values[None][0]!r} has no single turn value")
    if len(values) > 1:
        (v1, w1), (v2, w2) = sorted(values.items(), key=str)[:2]
        return HypothesisResult(
            "fail", f"world {w1[0]!r} has turn={v1} but world {w2[0]!r} has turn={v2}"
        )
    (value,) = values
    return HypothesisResult("pass", f"turn={value} everywhere")


def _check_h2(pm, a, turn):
    for b in _all_agents(pm, a):
        for x, y in sorted(a.relation(b), key=str):
            if x == y:
                continue
            ex, ey = _turn_effect(a, x, turn), _turn_effect(a, y, turn)
            if ex == "keep":
                ex = a.owner[x]
            if ey == "keep":
                ey = a.owner[y]
            if ex is None or ey is None or ex != ey:
                return HypothesisResult(
                    "fail", f"agent {b} confuses {x} and {y}, which set turn to {ex} and {ey}"
                )
    return HypothesisResult("pass")


def _reachable_models(pm, a, horizon=None, max_models=5000):
    """Component models reachable by executing any action at any world.

    Returns ``(models, complete)``; ``complete`` is false when the horizon
    or the model budget cut the exploration short.
    """
    start = restrict_to_component(pm)
    seen = {model_key(start): start}
    frontier = [start]
    depth = 0
    complete = True
    while frontier:
        if horizon is not None and depth >= horizon:
            complete = False
            break
        nxt = []
        for cur in frontier:
            m = cur.model
            for i, w in enumerate(m.worlds):
                for k, x in enumerate(a.actions):
                    if not truth_mask(m, a.pre[x]) >> i & 1:
                        continue
                    new = apply_pointed(PointedModel(m, w), a, x)
                    key = model_key(new)
                    if key not in seen:
                        if len(seen) >= max_models:
                            return list(seen.values()), False
                        seen[key] = new
                        nxt.append(new)
        frontier = nxt
        depth += 1
    return list(seen.values()), complete


def _exec_set(a, acts, val=None, m=None, i=None):
    if val is not None:
        return frozenset(x for x in acts if eval_prop(a.pre[x], val))
    return frozenset(x for x in acts if truth_mask(m, a.pre[x]) >> i & 1)


def _check_h3_arena(pm, a, turn):
    arena = build_multiplayer_arena(pm, a, turn)
    for x in sorted(turn.domain):
        acts = [y for y in a.actions if a.owner[y] == x]
        seen = set()
        stack = []
        for v in arena.vertices:
            if v[0] == "w":
                st = (v, frozenset(arena.related(x, v)))
                seen.add(st)
                stack.append(st)
        while stack:
            v, s = stack.pop()
            if arena.owner[v] == x:
                here = _exec_set(a, acts, arena.valuation[v])
                for u in sorted(s, key=str):
                    there = _exec_set(a, acts, arena.valuation[u])
                    if there != here:
                        return HypothesisResult(
                            "fail",
                            f"agent {x} cannot tell {_vname(v)} from {_vname(u)} "
                            f"but can execute {sorted(map(str, here))} vs {sorted(map(str, there))}",
                        )
            reach = set()
            for y in s:
                reach.update(arena.successors(y))
            for _, t in arena.moves[v]:
                st = (t, frozenset(u for u in arena.related(x, t) if u in reach))
                if st not in seen:
                    seen.add(st)
                    stack.append(st)
    return HypothesisResult("pass")


def _vname(v):
    if v[0] == "w":
        return f"world {v[1]!r}"
    return f"vertex ({v[1]}, {{{' '.join(v[2])}}})"


def _check_h3_models(pm, a, turn, horizon):
    models, complete = _reachable_models(pm, a, horizon)
    for cur in models:
        m = cur.model
        for i, w in enumerate(m.worlds):
            x = turn.value_in(m.vals[i])
            if x is None:
                continue
            acts = [y for y in a.actions if a.owner[y] == x]
            here = _exec_set(a, acts, m=m, i=i)
            for j in _bits(m.succ(x)[i]):
                there = _exec_set(a, acts, m=m, i=j)
                if there != here:
                    return HypothesisResult(
                        "fail",
                        f"agent {x} cannot tell {w!r} from {m.worlds[j]!r} but can execute "
                        f"{sorted(map(str, here))} vs {sorted(map(str, there))}",
                    )
    if complete:
        return HypothesisResult("pass")
    return HypothesisResult("unknown", f"no violation within {horizon} steps")


def _check_turn_discipline(pm, a, turn):
    for x in a.actions:
        owner = a.owner[x]
        if owner not in turn.domain:
            return HypothesisResult("fail", f"owner {owner!r} of {x} is not a turn value")
        eff = _turn_effect(a, x, turn)
        if eff is None:
            return HypothesisResult("fail", f"{x} does not assign turn a constant value")
    pending = []
    for x in a.actions:
        test = turn.test(a.owner[x])
        conj = _conjuncts(a.pre[x])
        if all(c in conj for c in _conjuncts(test)):
            continue
        if is_propositional(a.pre[x]):
            if not satisfiable(And(a.pre[x], Not(test))):
                continue
        pending.append(x)
    if not pending:
        return HypothesisResult("pass")
    cls = classify(a, agents=_all_agents(pm, a))
    if cls.propositional:
        try:
            arena = build_multiplayer_arena(pm, a, turn)
        except ModelError as e:
            return HypothesisResult("fail", str(e))
        for v in arena.vertices:
            for x in pending:
                if eval_prop(a.pre[x], arena.valuation[v]) and arena.owner[v] != a.owner[x]:
                    return HypothesisResult(
                        "fail", f"{x} is executable at {_vname(v)} where turn={arena.owner[v]}"
                    )
        return HypothesisResult("pass")
    if cls.non_expanding:
        models, complete = _reachable_models(pm, a)
        for cur in models:
            m = cur.model
            for x in pending:
                mask = truth_mask(m, a.pre[x]) & ~truth_mask(m, turn.test(a.owner[x]))
                if mask:
                    w = m.worlds[next(_bits(mask))]
                    return HypothesisResult("fail", f"{x} is executable at {w!r} off its turn")
        if complete:
            return HypothesisResult("pass")
    return HypothesisResult("unknown", f"could not decide for {sorted(map(str, pending))}")


def check_hypotheses(
    pm: PointedModel, a: ActionModel, turn: FiniteDomainVar = None, horizon: int = 8
) -> HypothesesReport:
    """Check H1 (starting player known), H2 (turn stays known), H3 (agents know
    their executable actions) and the turn discipline, each with a witness."""
    if turn is None:
        raise PreconditionError("a turn variable is required")
    h1 = _check_h1(pm, turn)
    h2 = _check_h2(pm, a, turn)
    td = _check_turn_discipline(pm, a, turn)
    cls = classify(a, agents=_all_agents(pm, a))
    try:
        if cls.propositional:
            h3 = _check_h3_arena(pm, a, turn)
        elif cls.non_expanding:
            h3 = _check_h3_models(pm, a, turn, None)
        else:
            h3 = _check_h3_models(pm, a, turn, horizon)
    except ModelError as e:
        h3 = HypothesisResult("unknown", str(e))
    return HypothesesReport(h1, h2, h3, td)


def _require_hypotheses(pm, a, split, turn):
    for x in a.actions:
        if a.owner[x] not in split.agents:
            raise HypothesisError(f"owner {a.owner[x]!r} of {x} is on neither team")
    r1 = _check_h1(pm, turn)
    if not r1:
        raise HypothesisError(f"H1 fails: {r1.witness}")
    r2 = _check_h2(pm, a, turn)
    if not r2:
        raise HypothesisError(f"H2 fails: {r2.witness}")
    td = _check_turn_discipline(pm, a, turn)
    if td.status == "fail":
        raise HypothesisError(f"turn discipline fails: {td.witness}")


# --------------------------------------------------------------------------
# alternating algorithms


def _owned(a, x):
    return sorted((y for y in a.actions if a.owner[y] == x), key=str)


def _distributed_game(pm, a, split, goal, turn, rounds=None, max_nodes=None):
    def tick(i):
        return None if i is None else i + 1

    def expand(payload):
        tag = payload[0]
        if tag == "p":
            _, cur, i = payload
            if evaluate(cur, goal):
                return "goal", []
            if rounds is not None and i >= rounds:
                return "dead", []
            m = cur.model
            x = _mover(m.vals[cur.index], turn, f" at {cur.point!r}")
            if split.is_existential(x):
                mask = m.succ(x)[cur.index]
                ck = cell_key(m, mask)
                return "all", [(None, ("c", x, ck, i), ("c", cur, mask, x, i, ck))]
            children = []
            for y in _owned(a, x):
                if evaluate(cur, a.pre[y]):
                    nxt = apply_pointed(cur, a, y)
                    children.append((y, ("p", canonical_key(nxt), tick(i)), ("p", nxt, tick(i))))
            return "and", children
        if tag == "c":
            _, cur, mask, x, i, ck = payload
            m = cur.model
            cell = list(_bits(mask))
            children = []
            for y in _owned(a, x):
                pre = truth_mask(m, a.pre[y])
                if not pre >> cur.index & 1:
                    continue
                if pre & mask != mask:
                    bad = m.worlds[next(_bits(mask & ~pre))]
                    raise HypothesisError(
                        f"H3 fails: {x} may execute {y} at {cur.point!r} "
                        f"but not at the indistinguishable {bad!r}"
                    )
                chid = ("ch", x, ck, y, i)
                children.append((y, chid, ("ch", cur, cell, y, i)))
            return "or", children
        _, cur, cell, y, i = payload
        children = []
        for j in cell:
            nxt = apply_pointed(cur.repoint(cur.model.worlds[j]), a, y)
            children.append((cur.model.worlds[j], ("p", canonical_key(nxt), tick(i)), ("p", nxt, tick(i))))
        return "all", children

    root = ("p", canonical_key(pm), 0 if rounds is not None else None)
    return explore(root, ("p", pm, root[2]), expand, max_nodes)


def _distributed_verdict(g, method, deadlock, exact, bound=None):
    rank, choice = attractor(g, deadlock)
    stats = {"nodes": len(g)}
    if g.root in rank:
        per_agent = {}
        for nid in strategy_support(g, choice, rank):
            _, x, key, clock = nid
            per_agent.setdefault(x, {})[InfoKey(key, clock)] = choice[nid]
        s = DistributedStrategy(per_agent, method=method, deadlock=deadlock)
        return Verdict(Status.YES, method, strategy=s, bound=bound, stats=stats)
    status = Status.NO if exact else Status.NO_WITHIN_BOUND
    return Verdict(status, method, bound=bound, stats=stats)


def announcement_bound(pm: PointedModel, turn: FiniteDomainVar) -> int:
    """Rounds after which the announcement game is decided: ``|W|^2 * |turn values|``."""
    n = len(pm.model.worlds)
    return n * n * len(turn.domain)


def _turn_class(pm, a, turn):
    return classify(a, agents=_all_agents(pm, a), ignore_atoms=turn.atoms())


def solve_distributed_announcements(
    pm, a, split: TeamSplit, goal, turn: FiniteDomainVar, deadlock="lose", rounds=None
) -> Verdict:
    """Round-bounded alternating search for (turn-updating) public announcements."""
    if not _turn_class(pm, a, turn).all_announcements:
        raise PreconditionError("every action must be a public announcement (up to turn)")
    _require_hypotheses(pm, a, split, turn)
    exact_bound = announcement_bound(pm, turn)
    bound = exact_bound if rounds is None else rounds
    g = _distributed_game(pm, a, split, goal, turn, rounds=bound)
    exact = bound >= exact_bound or g.root not in attractor(g, deadlock, optimistic=True)[0]
    return _distributed_verdict(g, "fig4", deadlock, exact, bound)


def solve_distributed_public(
    pm, a, split: TeamSplit, goal, turn: FiniteDomainVar, deadlock="lose",
    max_nodes=DEFAULT_MAX_NODES,
) -> Verdict:
    """Least fixpoint over information-state configurations for non-expanding instances."""
    if not _turn_class(pm, a, turn).non_expanding:
        raise PreconditionError("actions must be public or the model separable")
    _require_hypotheses(pm, a, split, turn)
    g = _distributed_game(pm, a, split, goal, turn, max_nodes=max_nodes)
    if not g.complete:
        return Verdict(Status.UNKNOWN, "fig5", stats={"nodes": len(g)})
    return _distributed_verdict(g, "fig5", deadlock, True)


# --------------------------------------------------------------------------
# history-tree search


class _Budget(Exception):
    pass


class _Layers:
    """History models ``M A^n`` over the initial component, built on demand."""

    def __init__(self, pm, a, max_worlds):
        self.a = a
        self.max_worlds = max_worlds
        self.start = restrict_to_component(pm)
        self.models = [self.start.model]
        self.child = [None]

    def __getitem__(self, n):
        while len(self.models) <= n:
            self._extend()
        return self.models[n]

    def children(self, n):
        """``(history index, action) -> index`` into layer ``n``."""
        self[n]
        return self.child[n]

    def _extend(self):
        prev, a = self.models[-1], self.a
        size = sum(bin(truth_mask(prev, a.pre[x])).count("1") for x in a.actions)
        if size > self.max_worlds:
            raise _Budget()
        nxt = product(prev, a)
        index = {w: i for i, w in enumerate(nxt.worlds)}
        child = {}
        for i, w in enumerate(prev.worlds):
            for x in a.actions:
                j = index.get(_after(w, x))
                if j is not None:
                    child[(i, x)] = j
        self.models.append(nxt)
        self.child.append(child)


def _after(w, x):
    return w + (x,) if isinstance(w, tuple) else (w, x)


def strategy_tree_search(
    pm: PointedModel,
    a: ActionModel,
    split: TeamSplit,
    goal: Formula,
    horizon: int,
    turn: FiniteDomainVar,
    deadlock: str = "lose",
    budget: int = DEFAULT_BUDGET,
    max_worlds: int = 50_000,
) -> Verdict:
    """Search all uniform action assignments on the history tree up to ``horizon``.

    Histories are the worlds of ``M A^n``; two histories are
    indistinguishable for ``x`` when related in that model.  One action is
    chosen per (depth, agent, class), and each choice obliges every history
    of the class.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    layers = _Layers(pm, a, max_worlds)
    start = layers.start
    info = {}

    def layer_info(n):
        if n not in info:
            m = layers[n]
            info[n] = (
                truth_mask(m, goal),
                {x: truth_mask(m, a.pre[x]) for x in a.actions},
                [turn.value_in(v) for v in m.vals],
            )
        return info[n]

    owned = {x: _owned(a, x) for x in turn.domain}
    memo = {}
    wins = {}
    state = {"calls": 0, "cut": False}

    def solve(n, obl):
        k = (n, obl)
        if k in memo:
            return memo[k]
        state["calls"] += 1
        if state["calls"] > budget:
            raise _Budget()
        m = layers[n]
        goals, pres, movers = layer_info(n)
        pending = [h for h in sorted(obl) if not goals >> h & 1]
        if not pending:
            memo[k] = True
            return True
        if n >= horizon:
            state["cut"] = True
            memo[k] = False
            return False
        child = layers.children(n + 1)
        base = set()
        decisions = {}
        for h in pending:
            x = movers[h]
            if x is None:
                raise HypothesisError(f"turn is not determined at history {m.worlds[h]!r}")
            if split.is_existential(x):
                cls = m.succ(x)[h]
                if (x, cls) in decisions:
                    continue
                cand = [y for y in owned[x] if pres[y] & cls == cls]
                if not cand:
                    memo[k] = False
                    return False
                decisions[(x, cls)] = cand
            else:
                acts = [y for y in owned[x] if pres[y] >> h & 1]
                if not acts and deadlock == "lose":
                    memo[k] = False
                    return False
                base.update(child[(h, y)] for y in acts)
        keys = sorted(decisions, key=lambda d: (d[0], d[1]))
        for combo in itertools.product(*(decisions[d] for d in keys)):
            nxt = set(base)
            for (x, cls), y in zip(keys, combo):
                nxt.update(child[(j, y)] for j in _bits(cls))
            nxt = frozenset(nxt)
            if solve(n + 1, nxt):
                memo[k] = True
                wins[k] = (dict(zip(keys, combo)), nxt)
                return True
        memo[k] = False
        return False

    root = (0, frozenset([start.index]))
    try:
        ok = solve(*root)
    except _Budget:
        return Verdict(Status.UNKNOWN, "tree", bound=horizon, stats={"calls": state["calls"]})
    stats = {"calls": state["calls"], "histories": sum(len(m.worlds) for m in layers.models)}
    if ok:
        per_agent = {}
        k = root
        while k in wins:
            assign, nxt = wins[k]
            n = k[0]
            for (x, cls), y in assign.items():
                names = frozenset(layers[n].worlds[j] for j in _bits(cls))
                per_agent.setdefault(x, {})[InfoKey(names, n)] = y
            k = (n + 1, nxt)
        s = DistributedStrategy(per_agent, method="tree", deadlock=deadlock, horizon=horizon)
        return Verdict(Status.YES, "tree", strategy=s, bound=horizon, stats=stats)
    exact = not state["cut"]
    if not exact and _turn_class(pm, a, turn).all_announcements:
        exact = horizon >= announcement_bound(pm, turn)
    return Verdict(Status.NO if exact else Status.NO_WITHIN_BOUND, "tree", bound=horizon, stats=stats)


def solve_distributed(pm, a, split, goal, turn, method="auto", deadlock="lose", horizon=None):
    cls = _turn_class(pm, a, turn)
    if method == "auto":
        if cls.all_announcements:
            method = "fig4"
        elif cls.non_expanding:
            method = "fig5"
        else:
            method = "tree"
    if method == "fig4":
        return solve_distributed_announcements(pm, a, split, goal, turn, deadlock, horizon)
    if method == "fig5":
        return solve_distributed_public(pm, a, split, goal, turn, deadlock)
    if method == "tree":
        _require_hypotheses(pm, a, split, turn)
        h = horizon if horizon is not None else 6
        return strategy_tree_search(pm, a, split, goal, h, turn, deadlock)
    raise PreconditionError(f"unknown distributed method {method!r}")


# --------------------------------------------------------------------------
# hierarchical information


@dataclass
class HierarchyResult:
    hierarchical: bool
    order: tuple = ()
    witness: Optional[tuple] = None  # incomparable pair when not hierarchical

    def __bool__(self):
        return self.hierarchical


def is_hierarchical(pm: PointedModel, a: ActionModel, split: TeamSplit) -> HierarchyResult:
    """Can the existential agents be ordered so that each one's relations
    (on worlds and on actions) are included in the next one's?"""
    m = pm.model
    rels = {x: (m.relation(x), a.relation(x)) for x in split.existential}

    def leq(x, y):
        return rels[x][0] <= rels[y][0] and rels[x][1] <= rels[y][1]

    order = sorted(rels, key=lambda x: (len(rels[x][0]) + len(rels[x][1]), x))
    for x, y in zip(order, order[1:]):
        if not leq(x, y):
            return HierarchyResult(False, (), (x, y))
    return HierarchyResult(True, tuple(order))


# --------------------------------------------------------------------------
# certificate checking


def verify_distributed_strategy(
    pm: PointedModel,
    a: ActionModel,
    split: TeamSplit,
    goal: Formula,
    s: DistributedStrategy,
    turn: FiniteDomainVar,
    fuel: int = None,
) -> Check:
    """Replay every outcome of ``s`` (universal agents unconstrained).

    Existential choices are looked up by information state and applied from
    every world of the mover's cell, so a certificate that passes is uniform
    by construction.
    """
    if not isinstance(s, DistributedStrategy):
        return Check(False, "not a distributed strategy")
    if s.method == "tree":
        return _verify_tree(pm, a, split, goal, s, turn, fuel)
    round_clock = s.method == "fig4"
    done = set()

    def visit(cur, i, path, trace):
        if evaluate(cur, goal):
            return None
        c = (canonical_key(cur), i)
        if c in done:
            return None
        if c in path:
            return Check(False, "a play loops without reaching the goal", trace)
        if fuel is not None and len(trace) >= fuel:
            return Check(False, f"fuel of {fuel} steps exhausted", trace, exact=False)
        m = cur.model
        x = turn.value_in(m.vals[cur.index])
        if x is None:
            return Check(False, "turn is not determined", trace)
        nxt_i = i + 1 if round_clock else None
        branches = []
        if split.is_existential(x):
            mask = m.succ(x)[cur.index]
            y = s.lookup(x, InfoKey(cell_key(m, mask), i))
            if y is None:
                return Check(False, f"no entry for {x} at a reachable information state", trace)
            if y not in a.actions or a.owner[y] != x:
                return Check(False, f"{x} is told to play {y!r}, which it does not own", trace)
            pre = truth_mask(m, a.pre[y])
            if pre & mask != mask:
                return Check(False, f"{y} is not executable throughout {x}'s cell", trace)
            for j in _bits(mask):
                branches.append((y, apply_pointed(cur.repoint(m.worlds[j]), a, y)))
        else:
            acts = [y for y in _owned(a, x) if evaluate(cur, a.pre[y])]
            if not acts and s.deadlock == "lose":
                return Check(False, f"{x} is stuck before the goal holds", trace)
            branches = [(y, apply_pointed(cur, a, y)) for y in acts]
        path.add(c)
        for y, nxt in branches:
            bad = visit(nxt, nxt_i, path, trace + (y,))
            if bad is not None:
                return bad
        path.discard(c)
        done.add(c)
        return None

    bad = visit(pm, 0 if round_clock else None, set(), ())
    return bad if bad is not None else Check(True)


def _verify_tree(pm, a, split, goal, s, turn, fuel):
    horizon = fuel if fuel is not None else s.horizon
    if horizon is None:
        horizon = max(
            (k.clock + 1 for t in s.per_agent.values() for k in t if isinstance(k, InfoKey)),
            default=0,
        )
    layers = _Layers(pm, a, 10**7)
    obl = {layers.start.index}
    trace = ()
    for n in range(horizon + 1):
        m = layers[n]
        g = truth_mask(m, goal)
        pending = [h for h in sorted(obl) if not g >> h & 1]
        if not pending:
            return Check(True)
        if n == horizon:
            return Check(False, f"plays still open after {horizon} steps", (m.worlds[pending[0]],))
        nxt = set()
        for h in pending:
            x = turn.value_in(m.vals[h])
            trace = (m.worlds[h],)
            if split.is_existential(x):
                cls = m.succ(x)[h]
                names = frozenset(m.worlds[j] for j in _bits(cls))
                y = s.lookup(x, InfoKey(names, n))
                if y is None or a.owner.get(y) != x:
                    return Check(False, f"no valid entry for {x} at depth {n}", trace)
                for j in _bits(cls):
                    c = layers.children(n + 1).get((j, y))
                    if c is None:
                        return Check(False, f"{y} is not executable throughout {x}'s cell", trace)
                    nxt.add(c)
            else:
                child = layers.children(n + 1)
                acts = [y for y in _owned(a, x) if (h, y) in child]
                if not acts and s.deadlock == "lose":
                    return Check(False, f"{x} is stuck before the goal holds", trace)
                nxt.update(child[(h, y)] for y in acts)
        obl = nxt
    return Check(True)
