"""Finite epistemic models, formula evaluation and model normalisation.

Worlds keep their user-visible ids but every algorithm works on integer
indices; accessibility relations are stored as per-world successor bitmasks
(Python ints), so ``K[a] f`` holds at ``w`` iff ``succ[a][w] & ~truth(f) == 0``.
"""
from __future__ import annotations

import functools
import operator
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

from .errors import ModelError
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
)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class EpistemicModel:
    """Kripke structure ``(W, (R_a), V)``; immutable after construction."""

    __slots__ = ("worlds", "agents", "_index", "_vals", "_succ", "_pred")

    def __init__(
        self,
        worlds: Iterable[Hashable],
        relations: Mapping[str, Iterable[tuple]],
        valuation: Mapping[Hashable, Iterable[str]],
        agents: Iterable[str] = (),
    ):
        worlds = tuple(worlds)
        index = {w: i for i, w in enumerate(worlds)}
        if len(index) != len(worlds):
            raise ModelError("duplicate world ids")
        vals = []
        for w in worlds:
            vals.append(frozenset(valuation.get(w, ())))
        extra = set(valuation) - set(index)
        if extra:
            raise ModelError(f"valuation mentions undeclared worlds {sorted(map(str, extra))}")
        succ = {}
        for agent in sorted(set(agents) | set(relations)):
            masks = [0] * len(worlds)
            for pair in relations.get(agent, ()):
                w, u = pair
                if w not in index or u not in index:
                    raise ModelError(f"relation of {agent} uses undeclared world in {pair!r}")
                masks[index[w]] |= 1 << index[u]
            succ[agent] = tuple(masks)
        self._init(worlds, index, tuple(vals), succ)

    def _init(self, worlds, index, vals, succ):
        self.worlds = worlds
        self._index = index
        self._vals = vals
        self._succ = succ
        self.agents = tuple(sorted(succ))
        self._pred = None

    @classmethod
    def from_masks(cls, worlds, vals, succ) -> "EpistemicModel":
        """Build directly from per-agent successor bitmasks (no validation)."""
        m = cls.__new__(cls)
        worlds = tuple(worlds)
        m._init(worlds, {w: i for i, w in enumerate(worlds)}, tuple(vals), dict(succ))
        return m

    def __len__(self):
        return len(self.worlds)

    def __repr__(self):
        return f"EpistemicModel({len(self.worlds)} worlds, agents={list(self.agents)})"

    def index(self, world) -> int:
        try:
            return self._index[world]
        except KeyError:
            raise ModelError(f"unknown world {world!r}") from None

    def val(self, i: int) -> frozenset:
        return self._vals[i]

    @property
    def vals(self) -> tuple:
        return self._vals

    def valuation(self, world) -> frozenset:
        return self._vals[self.index(world)]

    def succ(self, agent: str) -> tuple:
        """Successor bitmasks of ``agent``; an unknown agent has none."""
        s = self._succ.get(agent)
        if s is None:
            return (0,) * len(self.worlds)
        return s

    def pred(self, agent: str) -> tuple:
        if self._pred is None:
            pred = {}
            for a, masks in self._succ.items():
                p = [0] * len(self.worlds)
                for i, m in enumerate(masks):
                    for j in _bits(m):
                        p[j] |= 1 << i
                pred[a] = tuple(p)
            self._pred = pred
        return self._pred.get(agent, (0,) * len(self.worlds))

    def relation(self, agent: str) -> frozenset:
        """The relation of ``agent`` as a set of world-id pairs."""
        w = self.worlds
        return frozenset((w[i], w[j]) for i, m in enumerate(self.succ(agent)) for j in _bits(m))

    @property
    def relations(self) -> dict:
        return {a: self.relation(a) for a in self.agents}

    def atoms(self) -> frozenset:
        return frozenset().union(*self._vals) if self._vals else frozenset()

    def size(self) -> int:
        """``|W| + sum |R_a| + sum |V(w)|``."""
        rel = sum(bin(m).count("1") for masks in self._succ.values() for m in masks)
        return len(self.worlds) + rel + sum(len(v) for v in self._vals)

    def structure(self):
        """Hashable exact representation (ids included); used for equality."""
        return (
            self.worlds,
            self._vals,
            tuple((a, self._succ[a]) for a in self.agents),
        )

    def __eq__(self, other):
        return isinstance(other, EpistemicModel) and self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())


@dataclass(frozen=True)
class PointedModel:
    model: EpistemicModel
    point: Hashable

    def __post_init__(self):
        self.model.index(self.point)

    @property
    def index(self) -> int:
        return self.model.index(self.point)

    def repoint(self, world) -> "PointedModel":
        return PointedModel(self.model, world)


# --------------------------------------------------------------------------
# evaluation


def truth_mask(m: EpistemicModel, f: Formula) -> int:
    """Bitmask of the worlds of ``m`` where ``f`` holds."""
    n = len(m.worlds)
    full = (1 << n) - 1
    if isinstance(f, Atom):
        mask = 0
        for i, v in enumerate(m.vals):
            if f.name in v:
                mask |= 1 << i
        return mask
    if isinstance(f, Top):
        return full
    if isinstance(f, Bot):
        return 0
    if isinstance(f, Not):
        return full & ~truth_mask(m, f.sub)
    if isinstance(f, And):
        return truth_mask(m, f.left) & truth_mask(m, f.right)
    if isinstance(f, Or):
        return truth_mask(m, f.left) | truth_mask(m, f.right)
    if isinstance(f, Implies):
        return (full & ~truth_mask(m, f.left)) | truth_mask(m, f.right)
    if isinstance(f, Knows):
        bad = full & ~truth_mask(m, f.sub)
        mask = 0
        for i, s in enumerate(m.succ(f.agent)):
            if not s & bad:
                mask |= 1 << i
        return mask
    if isinstance(f, Poss):
        good = truth_mask(m, f.sub)
        mask = 0
        for i, s in enumerate(m.succ(f.agent)):
            if s & good:
                mask |= 1 << i
        return mask
    raise TypeError(f"not a formula: {f!r}")


def holds_at(m: EpistemicModel, i: int, f: Formula) -> bool:
    return bool(truth_mask(m, f) >> i & 1)


def evaluate(pm: PointedModel, f: Formula) -> bool:
    """``M, w |= f``.  Atoms missing from a valuation are false."""
    return holds_at(pm.model, pm.index, f)


def is_s5(m: EpistemicModel) -> bool:
    n = len(m.worlds)
    for a in m.agents:
        succ = m.succ(a)
        for i in range(n):
            if not succ[i] >> i & 1:
                return False
            for j in _bits(succ[i]):
                # symmetric and transitive: R(j) == R(i) for every successor j
                if succ[j] != succ[i]:
                    return False
    return True


# --------------------------------------------------------------------------
# normalisation


def component_mask(m: EpistemicModel, start: int) -> int:
    """Worlds connected to ``start`` by the union of relations, both directions."""
    seen = start
    frontier = start
    agents = m.agents
    while frontier:
        nxt = 0
        for i in _bits(frontier):
            for a in agents:
                nxt |= m.succ(a)[i] | m.pred(a)[i]
        frontier = nxt & ~seen
        seen |= nxt
    return seen


def submodel(m: EpistemicModel, keep: list) -> EpistemicModel:
    """Induced submodel on the world indices ``keep`` (in that order)."""
    remap = {old: new for new, old in enumerate(keep)}
    succ = {}
    for a in m.agents:
        old = m.succ(a)
        masks = []
        for i in keep:
            mask = 0
            for j in _bits(old[i]):
                k = remap.get(j)
                if k is not None:
                    mask |= 1 << k
            masks.append(mask)
        succ[a] = tuple(masks)
    return EpistemicModel.from_masks(
        [m.worlds[i] for i in keep], [m.vals[i] for i in keep], succ
    )


def restrict_to_component(pm: PointedModel) -> PointedModel:
    m = pm.model
    comp = component_mask(m, 1 << pm.index)
    if comp == (1 << len(m.worlds)) - 1:
        return pm
    return PointedModel(submodel(m, list(_bits(comp))), pm.point)


def _rank(signatures) -> list:
    table = {s: r for r, s in enumerate(sorted(set(signatures)))}
    return [table[s] for s in signatures]


def _refine(m: EpistemicModel, colors: list, multiset: bool) -> list:
    """Iterate colour refinement to a fixpoint; returns canonical colour ranks.

    With ``multiset=False`` the successor colours are compared as sets, which
    makes the stable partition the coarsest bisimulation.
    """
    agents = m.agents
    succs = [m.succ(a) for a in agents]
    n_classes = len(set(colors))
    while True:
        sigs = []
        for i in range(len(colors)):
            per_agent = []
            for s in succs:
                cs = [colors[j] for j in _bits(s[i])]
                per_agent.append(tuple(sorted(cs if multiset else set(cs))))
            sigs.append((colors[i], tuple(per_agent)))
        colors = _rank(sigs)
        k = len(set(colors))
        if k == n_classes:
            return colors
        n_classes = k


def _bisim_classes(m: EpistemicModel, marks=None) -> list:
    init = [
        (tuple(sorted(v)), bool(marks and marks >> i & 1)) for i, v in enumerate(m.vals)
    ]
    return _refine(m, _rank(init), multiset=False)


def _quotient(m: EpistemicModel, classes: list):
    reps = {}
    for i, c in enumerate(classes):
        reps.setdefault(c, i)
    order = sorted(reps, key=reps.get)
    new_index = {c: k for k, c in enumerate(order)}
    succ = {}
    for a in m.agents:
        masks = [0] * len(order)
        for i, s in enumerate(m.succ(a)):
            src = new_index[classes[i]]
            for j in _bits(s):
                masks[src] |= 1 << new_index[classes[j]]
        succ[a] = tuple(masks)
    q = EpistemicModel.from_masks(
        [m.worlds[reps[c]] for c in order], [m.vals[reps[c]] for c in order], succ
    )
    return q, [new_index[c] for c in classes]


def bisim_contract(pm: PointedModel) -> PointedModel:
    """Quotient by the coarsest bisimulation respecting valuations and relations."""
    m = pm.model
    classes = _bisim_classes(m)
    if len(set(classes)) == len(classes):
        return pm
    q, image = _quotient(m, classes)
    return PointedModel(q, q.worlds[image[pm.index]])


def _encode(m: EpistemicModel, order: list, marks: int) -> tuple:
    pos = {w: k for k, w in enumerate(order)}
    marked = tuple(pos[i] for i in _bits(marks))
    vals = tuple(tuple(sorted(m.vals[i])) for i in order)
    rels = []
    for a in m.agents:
        s = m.succ(a)
        edges = sorted((pos[i], pos[j]) for i in order for j in _bits(s[i]))
        if edges:  # an agent with an empty relation is indistinguishable from an absent one
            rels.append((a, tuple(edges)))
    return (len(order), tuple(sorted(marked)), vals, tuple(rels))


def _canonical_form(m: EpistemicModel, marks: int) -> tuple:
    init = [(tuple(sorted(v)), bool(marks >> i & 1)) for i, v in enumerate(m.vals)]
    colors = _refine(m, _rank(init), multiset=True)
    return _individualise(m, colors, marks)


def _individualise(m, colors, marks):
    n = len(colors)
    groups = {}
    for i, c in enumerate(colors):
        groups.setdefault(c, []).append(i)
    ties = [g for c, g in sorted(groups.items()) if len(g) > 1]
    if not ties:
        order = sorted(range(n), key=lambda i: colors[i])
        return _encode(m, order, marks)
    # residual symmetry: try every member of the first tied class
    best = None
    for i in ties[0]:
        trial = [2 * c + (1 if j == i else 0) for j, c in enumerate(colors)]
        refined = _refine(m, _rank(trial), multiset=True)
        enc = _individualise(m, refined, marks)
        if best is None or enc < best:
            best = enc
    return best


class CanonicalKey(bytes):
    """Opaque identifier of a (multi-)pointed model up to bisimulation and renaming."""

    def short(self) -> str:
        import hashlib

        return hashlib.sha256(self).hexdigest()


def _key_for(m: EpistemicModel, marks: int, contract: bool) -> CanonicalKey:
    start = marks
    comp = component_mask(m, start)
    keep = list(_bits(comp))
    if len(keep) != len(m.worlds):
        remap = {old: new for new, old in enumerate(keep)}
        marks = sum(1 << remap[i] for i in _bits(marks))
        m = submodel(m, keep)
    if contract:
        classes = _bisim_classes(m, marks)
        if len(set(classes)) != len(classes):
            m, image = _quotient(m, classes)
            marks = functools.reduce(operator.or_, (1 << image[i] for i in _bits(marks)), 0)
    form = _canonical_form(m, marks)
    return CanonicalKey(repr(form).encode())


def canonical_key(pm: PointedModel, contract: bool = True) -> CanonicalKey:
    """Key equal for two pointed models iff their normal forms are isomorphic.

    The normal form is the component of the point, contracted by bisimulation
    (skipped when ``contract`` is false, giving an isomorphism-only key).
    """
    return _key_for(pm.model, 1 << pm.index, contract)


def cell_key(m: EpistemicModel, cell_mask: int, contract: bool = True) -> CanonicalKey:
    """Canonical key of ``m`` with a designated set of worlds (an information cell)."""
    return _key_for(m, cell_mask, contract)


def model_key(pm: PointedModel) -> CanonicalKey:
    """Key of the point's component ignoring which world is designated."""
    m = pm.model
    comp = component_mask(m, 1 << pm.index)
    return _key_for(m, comp, True)
