"""Plan existence: breadth-first search over normalised pointed models."""
from __future__ import annotations

from collections import deque

from .actions import ActionModel, apply_pointed, classify, executable
from .formula import Formula
from .models import PointedModel, canonical_key, evaluate
from .verdict import Check, Status, Verdict

DEFAULT_BOUND = 12


def plan_exists(
    pm: PointedModel,
    a: ActionModel,
    goal: Formula,
    bound: int = None,
    contract: bool = True,
    max_nodes: int = 200_000,
) -> Verdict:
    """Search for an executable action sequence after which ``goal`` holds.

    All-announcement instances are complete at depth ``|W|`` (each useful
    announcement deletes a world); non-expanding instances have a finite key
    space and the memoised search ends on its own.  Anything else is searched
    up to ``bound`` steps and may come back UNKNOWN.
    """
    cls = classify(a)
    n_worlds = len(pm.model.worlds)
    if cls.all_announcements:
        regime = "announcements"
        limit = n_worlds if bound is None else bound
        complete_at = n_worlds
    elif cls.non_expanding:
        regime = "non-expanding"
        limit = bound
        complete_at = None
    else:
        regime = "bounded"
        limit = DEFAULT_BOUND if bound is None else bound
        complete_at = float("inf")

    stats = {"regime": regime, "nodes": 1}
    if evaluate(pm, goal):
        return Verdict(Status.YES, "bfs", plan=(), stats=stats)

    actions = sorted(a.actions, key=str)
    start = canonical_key(pm, contract)
    parent = {start: None}
    frontier = deque([(pm, start, 0)])
    cut_off = False
    while frontier:
        cur, key, depth = frontier.popleft()
        if limit is not None and depth >= limit:
            cut_off = True
            continue
        for x in actions:
            if not executable(cur, a, x):
                continue
            nxt = apply_pointed(cur, a, x, normalize=contract)
            k = canonical_key(nxt, contract)
            if k in parent:
                continue
            parent[k] = (key, x)
            stats["nodes"] += 1
            if evaluate(nxt, goal):
                return Verdict(Status.YES, "bfs", plan=_unwind(parent, k), stats=stats)
            if len(parent) > max_nodes:
                return Verdict(Status.UNKNOWN, "bfs", bound=limit, stats=stats)
            frontier.append((nxt, k, depth + 1))
    if not cut_off or (complete_at is not None and limit >= complete_at):
        return Verdict(Status.NO, "bfs", stats=stats)
    return Verdict(Status.UNKNOWN, "bfs", bound=limit, stats=stats)


def _unwind(parent, key) -> tuple:
    plan = []
    while parent[key] is not None:
        key, x = parent[key]
        plan.append(x)
    return tuple(reversed(plan))


def verify_plan(pm: PointedModel, a: ActionModel, plan, goal: Formula) -> Check:
    cur = pm
    for step, x in enumerate(plan):
        if x not in a.actions:
            return Check(False, f"step {step}: unknown action {x!r}", tuple(plan[:step]))
        if not executable(cur, a, x):
            return Check(False, f"step {step}: {x} is not executable", tuple(plan[:step]))
        cur = apply_pointed(cur, a, x)
    if not evaluate(cur, goal):
        return Check(False, "goal does not hold after the plan", tuple(plan))
    return Check(True, "", tuple(plan))
