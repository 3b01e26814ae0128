"""Controller synthesis: Controller and Environment alternate, Controller first.

Every solver builds an explicit AND-OR graph and runs the attractor, so all
of them share deadlock handling and strategy extraction.
"""
from __future__ import annotations

from .actions import CTR, ENV, ActionModel, apply_pointed, classify, executable_actions
from .arena import build_arena, expand_knowledge_depth1
from .errors import PreconditionError
from .formula import Formula, modal_depth
from .game import attractor, explore, strategy_support
from .models import PointedModel, canonical_key, evaluate
from .strategy import ControllerStrategy
from .verdict import Check, Status, Verdict

DEFAULT_HORIZON = 10
DEFAULT_MAX_NODES = 200_000


def _agents(pm, a):
    return sorted(set(pm.model.agents) | set(a.agents))


def _sides(a: ActionModel):
    return tuple(sorted(a.owned_by(CTR), key=str)), tuple(sorted(a.owned_by(ENV), key=str))


def _check_owners(a: ActionModel):
    bad = [x for x in a.actions if a.owner[x] not in (CTR, ENV)]
    if bad:
        raise PreconditionError(f"actions without a ctr/env owner: {sorted(map(str, bad))}")


def _pointed_game(pm, a, goal, clock, rounds=None, horizon=None, max_nodes=None):
    """Configuration graph over ``(canonical key, clock)``.

    ``clock="round"`` counts moves and stops at ``rounds`` (``dead`` nodes)
    or ``horizon`` (``horizon`` nodes); ``clock="parity"`` folds rounds
    into whose turn it is.
    """
    ctr, env = _sides(a)

    def next_clock(i):
        return i + 1 if clock == "round" else 1 - i

    def expand(payload):
        cur, i = payload
        if evaluate(cur, goal):
            return "goal", []
        if rounds is not None and i >= rounds:
            return "dead", []
        if horizon is not None and i >= horizon:
            return "horizon", []
        side = i % 2 if clock == "round" else i
        children = []
        for x in executable_actions(cur, a, ctr if side == 0 else env):
            nxt = apply_pointed(cur, a, x)
            j = next_clock(i)
            children.append((x, (canonical_key(nxt), j), (nxt, j)))
        return ("or" if side == 0 else "and"), children

    root = (canonical_key(pm), 0)
    return explore(root, (pm, 0), expand, max_nodes)


def _pointed_verdict(g, method, clock, deadlock, exact, bound=None, stats=None):
    rank, choice = attractor(g, deadlock)
    stats = dict(stats or {}, nodes=len(g))
    if g.root in rank:
        entries = {nid: choice[nid] for nid in strategy_support(g, choice, rank)}
        s = ControllerStrategy("pointed", entries, clock=clock, deadlock=deadlock)
        return Verdict(Status.YES, method, strategy=s, bound=bound, stats=stats)
    if exact:
        return Verdict(Status.NO, method, bound=bound, stats=stats)
    return Verdict(Status.NO_WITHIN_BOUND, method, bound=bound, stats=stats)


def solve_controller_announcements(
    pm: PointedModel,
    a: ActionModel,
    goal: Formula,
    deadlock: str = "lose",
    rounds: int = None,
) -> Verdict:
    """Bounded alternating search for public-announcement instances.

    A play can visit at most ``|W|`` distinct submodels with two possible
    movers each, so ``2|W|`` rounds decide the game exactly.  With smaller
    ``rounds`` a loss is still exact when it does not depend on the cut.
    """
    _check_owners(a)
    if not classify(a, agents=_agents(pm, a)).all_announcements:
        raise PreconditionError("every action must be a public announcement")
    exact_bound = 2 * len(pm.model.worlds)
    bound = exact_bound if rounds is None else rounds
    g = _pointed_game(pm, a, goal, "round", rounds=bound)
    exact = bound >= exact_bound or g.root not in attractor(g, deadlock, optimistic=True)[0]
    return _pointed_verdict(g, "fig2", "round", deadlock, exact, bound)


def solve_controller_public(
    pm: PointedModel,
    a: ActionModel,
    goal: Formula,
    deadlock: str = "lose",
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Verdict:
    """Least fixpoint over ``(key, whose turn)`` for non-expanding instances."""
    _check_owners(a)
    cls = classify(a, agents=_agents(pm, a))
    if not cls.non_expanding:
        raise PreconditionError("actions must be public or the model separable")
    g = _pointed_game(pm, a, goal, "parity", max_nodes=max_nodes)
    if not g.complete:
        return Verdict(Status.UNKNOWN, "fig3", stats={"nodes": len(g)})
    return _pointed_verdict(g, "fig3", "parity", deadlock, True)


def solve_controller_propositional(
    pm: PointedModel,
    a: ActionModel,
    goal: Formula,
    deadlock: str = "lose",
    horizon: int = DEFAULT_HORIZON,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Verdict:
    """Arena pipeline for propositional actions.

    Goals of modal depth at most one are decided exactly on the
    knowledge-expanded arena.  Deeper goals fall back to the configuration
    graph: exact if it closes within ``max_nodes``, otherwise a
    bounded-horizon search that may answer UNKNOWN.
    """
    _check_owners(a)
    if not classify(a).propositional:
        raise PreconditionError("the arena pipeline needs propositional actions")
    if modal_depth(goal) <= 1:
        arena = build_arena(pm, a)
        try:
            ex = expand_knowledge_depth1(arena, goal, max_nodes, a=a)
        except PreconditionError:
            ex = None  # some goal agent confuses Controller and Environment actions
        if ex is not None and ex.graph.complete:
            rank, choice = attractor(ex.graph, deadlock)
            stats = {"arena": len(arena), "expanded": len(ex.graph)}
            if ex.graph.root in rank:
                entries = {v: choice[v] for v in strategy_support(ex.graph, choice, rank)}
                s = ControllerStrategy("expanded", entries, deadlock=deadlock, arena=ex)
                return Verdict(Status.YES, "arena", strategy=s, stats=stats)
            return Verdict(Status.NO, "arena", stats=stats)
    return solve_controller_bounded(pm, a, goal, deadlock, horizon, max_nodes)


def solve_controller_bounded(
    pm: PointedModel,
    a: ActionModel,
    goal: Formula,
    deadlock: str = "lose",
    horizon: int = DEFAULT_HORIZON,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Verdict:
    """General fallback; exact whenever the configuration graph is finite and small."""
    _check_owners(a)
    g = _pointed_game(pm, a, goal, "parity", max_nodes=max_nodes)
    if g.complete:
        return _pointed_verdict(g, "graph", "parity", deadlock, True)
    g = _pointed_game(pm, a, goal, "round", horizon=horizon, max_nodes=max_nodes)
    rank, _ = attractor(g, deadlock)
    if g.root in rank:
        return _pointed_verdict(g, "bounded", "round", deadlock, False, horizon)
    optimistic, _ = attractor(g, deadlock, optimistic=True)
    if g.complete and g.root not in optimistic:
        return Verdict(Status.NO, "bounded", bound=horizon, stats={"nodes": len(g)})
    return Verdict(Status.UNKNOWN, "bounded", bound=horizon, stats={"nodes": len(g)})


def solve_controller(pm, a, goal, method="auto", deadlock="lose", **kw) -> Verdict:
    """Dispatch to the strongest applicable solver (``auto``) or a named one."""
    cls = classify(a, agents=_agents(pm, a))
    if method == "auto":
        if cls.all_announcements:
            method = "fig2"
        elif cls.non_expanding:
            method = "fig3"
        elif cls.propositional:
            method = "arena"
        else:
            method = "bounded"
    if method == "fig2":
        return solve_controller_announcements(pm, a, goal, deadlock, kw.get("rounds"))
    if method == "fig3":
        return solve_controller_public(pm, a, goal, deadlock)
    if method == "arena":
        return solve_controller_propositional(
            pm, a, goal, deadlock, kw.get("horizon") or DEFAULT_HORIZON
        )
    if method == "bounded":
        return solve_controller_bounded(pm, a, goal, deadlock, kw.get("horizon") or DEFAULT_HORIZON)
    raise PreconditionError(f"unknown controller method {method!r}")


# --------------------------------------------------------------------------
# certificate checking


def verify_controller_strategy(
    pm: PointedModel, a: ActionModel, goal: Formula, s: ControllerStrategy, fuel: int = None
) -> Check:
    """Expand every play where Controller follows ``s``; all must reach the goal.

    Plays are explored depth first; coming back to a configuration already on
    the current path without meeting the goal is a losing cycle.
    """
    if s.kind == "expanded":
        return _verify_expanded(pm, a, goal, s, fuel)
    ctr, env = _sides(a)
    done = set()

    def config(cur, i):
        return (canonical_key(cur), i)

    def visit(cur, i, path, trace):
        if evaluate(cur, goal):
            return None
        c = config(cur, i)
        if c in done:
            return None
        if c in path:
            return Check(False, "a play loops without reaching the goal", trace)
        if fuel is not None and len(trace) >= fuel:
            return Check(False, f"fuel of {fuel} steps exhausted", trace, exact=False)
        side = i % 2 if s.clock == "round" else i
        nxt_clock = i + 1 if s.clock == "round" else 1 - i
        if side == 0:
            x = s.lookup(c)
            if x is None:
                return Check(False, "strategy has no entry for a reachable configuration", trace)
            if x not in a.actions or x not in ctr or x not in executable_actions(cur, a, [x]):
                return Check(False, f"strategy prescribes illegal action {x!r}", trace)
            moves = [x]
        else:
            moves = executable_actions(cur, a, env)
            if not moves and s.deadlock == "lose":
                return Check(False, "Environment is stuck before the goal holds", trace)
        path.add(c)
        for x in moves:
            bad = visit(apply_pointed(cur, a, x), nxt_clock, path, trace + (x,))
            if bad is not None:
                return bad
        path.discard(c)
        done.add(c)
        return None

    bad = visit(pm, 0, set(), ())
    return bad if bad is not None else Check(True)


def _verify_expanded(pm, a, goal, s, fuel):
    ex = s.arena
    if ex is None:
        ex = expand_knowledge_depth1(build_arena(pm, a), goal, a=a)
    ctr, env = _sides(a)
    done = set()

    def visit(cur, ev, path, trace):
        if evaluate(cur, goal):
            return None
        if ev in done:
            return None
        if ev in path:
            return Check(False, "a play loops without reaching the goal", trace)
        if fuel is not None and len(trace) >= fuel:
            return Check(False, f"fuel of {fuel} steps exhausted", trace, exact=False)
        arena_moves = dict(ex.moves(ev))
        if ex.owner(ev) == 0:
            x = s.lookup(ev)
            if x is None:
                return Check(False, "strategy has no entry for a reachable vertex", trace)
            if x not in ctr or not executable_actions(cur, a, [x]):
                return Check(False, f"strategy prescribes illegal action {x!r}", trace)
            moves = [x]
        else:
            moves = executable_actions(cur, a, env)
            if not moves and s.deadlock == "lose":
                return Check(False, "Environment is stuck before the goal holds", trace)
        path.add(ev)
        for x in moves:
            if x not in arena_moves:
                return Check(False, f"arena has no move {x!r}", trace)
            bad = visit(apply_pointed(cur, a, x), arena_moves[x], path, trace + (x,))
            if bad is not None:
                return bad
        path.discard(ev)
        done.add(ev)
        return None

    bad = visit(pm, ex.initial, set(), ())
    return bad if bad is not None else Check(True)
