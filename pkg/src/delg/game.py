"""Explicit AND-OR game graphs and the reachability attractor.

Node kinds:

``goal``     winning outright
``or``       wins if some successor wins (the existential side moves)
``and``      wins if it has successors and all of them win; with
             ``deadlock="vacuous"`` a node without successors also wins
``all``      plain conjunction: wins if every successor wins (empty = true)
``dead``     round budget exhausted; counts as winning only when ``optimistic``
``horizon``  search cut-off; counts as winning only when ``optimistic``
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable

KINDS = ("goal", "or", "and", "all", "dead", "horizon")


@dataclass
class Node:
    kind: str
    succ: tuple = ()  # ((label, node id), ...)


@dataclass
class GameGraph:
    root: Hashable
    nodes: dict = field(default_factory=dict)
    complete: bool = True  # False when exploration hit the node budget

    def __len__(self):
        return len(self.nodes)

    @property
    def truncated(self) -> bool:
        """Did some play hit a round limit or the node budget?"""
        return any(n.kind in ("dead", "horizon") for n in self.nodes.values())


class BudgetExceeded(Exception):
    pass


def explore(root_id, root_payload, expand: Callable, max_nodes: int = None) -> GameGraph:
    """Build the graph reachable from the root.

    ``expand(payload)`` returns ``(kind, [(label, child_id, child_payload), ...])``.
    Children of ids already seen are not expanded again.  When more than
    ``max_nodes`` nodes would be created, unexpanded nodes become ``horizon``
    nodes and the graph is flagged incomplete.
    """
    g = GameGraph(root_id)
    pending = {root_id: root_payload}
    queue = deque([root_id])
    while queue:
        nid = queue.popleft()
        payload = pending.pop(nid)
        if max_nodes is not None and len(g.nodes) >= max_nodes:
            g.nodes[nid] = Node("horizon")
            g.complete = False
            continue
        kind, children = expand(payload)
        succ = []
        for label, cid, cpayload in children:
            succ.append((label, cid))
            if cid not in g.nodes and cid not in pending:
                pending[cid] = cpayload
                queue.append(cid)
        g.nodes[nid] = Node(kind, tuple(succ))
    return g


def attractor(g: GameGraph, deadlock: str = "lose", optimistic: bool = False):
    """Least fixpoint of the winning region with level-synchronous ranks.

    Returns ``(rank, choice)``: ``rank`` maps winning node ids to the number
    of moves needed; ``choice`` maps winning ``or`` nodes to the label of a
    successor of minimal rank (ties broken by ``str`` of the label).
    """
    if deadlock not in ("lose", "vacuous"):
        raise ValueError(f"unknown deadlock mode {deadlock!r}")
    preds = {nid: {} for nid in g.nodes}
    count = {}
    rank = {}
    queue = deque()
    for nid, node in g.nodes.items():
        targets = dict.fromkeys(t for _, t in node.succ)
        for t in targets:
            preds[t][nid] = None
        count[nid] = len(targets)
        base = (
            node.kind == "goal"
            or (node.kind == "all" and not targets)
            or (node.kind == "and" and not targets and deadlock == "vacuous")
            or (node.kind in ("horizon", "dead") and optimistic)
        )
        if base:
            rank[nid] = 0
            queue.append(nid)
    while queue:
        t = queue.popleft()
        for v in preds[t]:
            if v in rank:
                continue
            kind = g.nodes[v].kind
            if kind == "or":
                rank[v] = rank[t] + 1
                queue.append(v)
            elif kind in ("and", "all"):
                count[v] -= 1
                if count[v] == 0:
                    rank[v] = rank[t] + 1
                    queue.append(v)
    choice = {}
    for nid, r in rank.items():
        node = g.nodes[nid]
        if node.kind != "or":
            continue
        best = [lab for lab, t in node.succ if rank.get(t) == r - 1]
        choice[nid] = min(best, key=str)
    return rank, choice


def strategy_support(g: GameGraph, choice: dict, rank: dict) -> list:
    """``or`` nodes visited when the winner follows ``choice`` from the root."""
    if g.root not in rank:
        return []
    seen = {g.root}
    stack = [g.root]
    out = []
    while stack:
        nid = stack.pop()
        node = g.nodes[nid]
        if node.kind in ("goal", "horizon"):
            continue
        if node.kind == "or":
            out.append(nid)
            lab = choice[nid]
            nxt = [t for l, t in node.succ if l == lab]
        else:
            nxt = [t for _, t in node.succ]
        for t in nxt:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return out
