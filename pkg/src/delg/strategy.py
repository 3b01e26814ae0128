"""Strategy certificates and their stable digests."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Hashable, NamedTuple, Optional

from .errors import StrategyError


def _stable(obj) -> str:
    if isinstance(obj, bytes):
        return "b:" + obj.hex()
    if isinstance(obj, (tuple, list)):
        return "(" + ",".join(_stable(x) for x in obj) + ")"
    if isinstance(obj, frozenset):
        return "{" + ",".join(sorted(_stable(x) for x in obj)) + "}"
    return repr(obj)


def digest(key) -> str:
    """Hex digest of a strategy key, used in certificate files."""
    return hashlib.sha256(_stable(key).encode()).hexdigest()


class _Entries:
    """Key -> action table that also answers lookups by digest."""

    def __init__(self, entries=None):
        self.entries = dict(entries or {})
        self._by_digest = None

    def lookup(self, key):
        hit = self.entries.get(key)
        if hit is not None:
            return hit
        if self._by_digest is None:
            self._by_digest = {
                (k if isinstance(k, str) else digest(k)): v for k, v in self.entries.items()
            }
        return self._by_digest.get(digest(key))

    def digests(self) -> dict:
        return {(k if isinstance(k, str) else digest(k)): v for k, v in self.entries.items()}


@dataclass
class ControllerStrategy:
    """Positional strategy of Controller.

    ``kind`` is ``pointed`` (keys are ``(canonical key, clock)``) or
    ``expanded`` (keys are vertices of a knowledge-expanded arena).
    ``clock`` is ``round`` or ``parity`` for pointed strategies.
    """

    kind: str
    entries: dict
    clock: str = "parity"
    deadlock: str = "lose"
    arena: object = None  # expanded arena needed to replay ``expanded`` strategies
    _table: _Entries = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("pointed", "expanded"):
            raise StrategyError(f"unknown strategy kind {self.kind!r}")
        self._table = _Entries(self.entries)

    def lookup(self, key):
        return self._table.lookup(key)

    def __len__(self):
        return len(self.entries)


class InfoKey(NamedTuple):
    """Information state of an agent: a designated cell plus a clock.

    ``cell`` is the canonical key of the current model with the agent's
    indistinguishability cell designated (or, for the history-tree search,
    the cell itself); ``clock`` is the round index or ``None``.
    """

    cell: Hashable
    clock: Optional[int]


@dataclass
class DistributedStrategy:
    """One uniform strategy per existential agent, keyed by information states.

    Because keys are information states rather than histories, two
    indistinguishable histories can never receive different actions.
    """

    per_agent: dict  # agent -> {InfoKey or digest: action}
    method: str = "fig5"
    deadlock: str = "lose"
    horizon: Optional[int] = None  # plays are cut here (history-tree strategies)
    _tables: dict = field(default=None, repr=False)

    def __post_init__(self):
        for agent, table in self.per_agent.items():
            for k in table:
                if not isinstance(k, (InfoKey, str)):
                    raise StrategyError(
                        f"strategy entry for {agent} is keyed by {type(k).__name__}, "
                        "not by an information state"
                    )
        self._tables = {a: _Entries(t) for a, t in self.per_agent.items()}

    def lookup(self, agent, key: InfoKey):
        table = self._tables.get(agent)
        return None if table is None else table.lookup(key)

    def __len__(self):
        return sum(len(t) for t in self.per_agent.values())
