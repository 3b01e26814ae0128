"""Action models, the product update and action-type classification."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Optional

from .errors import ExecutabilityError, ModelError
from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Formula,
    agents_of,
    atoms_of,
    conj,
    disj,
    eval_prop,
    is_propositional,
    modal_depth,
    Not,
    to_text,
)
from .models import (
    EpistemicModel,
    PointedModel,
    _bits,
    bisim_contract,
    evaluate,
    holds_at,
    truth_mask,
)

CTR = "ctr"
ENV = "env"


class ActionModel:
    """``(A, (R_a), pre, post)`` plus an owner tag per action.

    ``post`` is sparse: a missing entry ``(alpha, p)`` means ``p := p``.
    Entries that are literally ``p := p`` are dropped on construction.
    """

    __slots__ = ("actions", "agents", "pre", "post", "owner", "_index", "_succ", "_pred")

    def __init__(
        self,
        actions: Iterable[Hashable],
        relations: Mapping[str, Iterable[tuple]],
        pre: Mapping[Hashable, Formula] = None,
        post: Mapping[Hashable, Mapping[str, Formula]] = None,
        owner: Mapping[Hashable, str] = None,
        agents: Iterable[str] = (),
    ):
        self.actions = tuple(actions)
        if not self.actions:
            raise ModelError("an action model needs at least one action")
        self._index = {x: i for i, x in enumerate(self.actions)}
        if len(self._index) != len(self.actions):
            raise ModelError("duplicate action ids")
        pre = dict(pre or {})
        post = dict(post or {})
        owner = dict(owner or {})
        for table, what in ((pre, "pre"), (post, "post"), (owner, "owner")):
            unknown = set(table) - set(self._index)
            if unknown:
                raise ModelError(f"{what} mentions undeclared actions {sorted(map(str, unknown))}")
        self.pre = {x: pre.get(x, TRUE) for x in self.actions}
        self.post = {}
        for x in self.actions:
            entries = {}
            for p, f in (post.get(x) or {}).items():
                if modal_depth(f) > 0:
                    raise ModelError(
                        f"postcondition {p} := {to_text(f)} of {x!r} is not propositional"
                    )
                if f != Atom(p):
                    entries[p] = f
            self.post[x] = entries
        self.owner = {x: owner.get(x) for x in self.actions}
        succ = {}
        for agent in sorted(set(agents) | set(relations)):
            masks = [0] * len(self.actions)
            for pair in relations.get(agent, ()):
                x, y = pair
                if x not in self._index or y not in self._index:
                    raise ModelError(f"relation of {agent} uses undeclared action in {pair!r}")
                masks[self._index[x]] |= 1 << self._index[y]
            succ[agent] = tuple(masks)
        self._succ = succ
        self.agents = tuple(sorted(succ))
        self._pred = None

    def __repr__(self):
        return f"ActionModel({list(self.actions)})"

    def __len__(self):
        return len(self.actions)

    def index(self, action) -> int:
        try:
            return self._index[action]
        except KeyError:
            raise ModelError(f"unknown action {action!r}") from None

    def succ(self, agent) -> tuple:
        s = self._succ.get(agent)
        return s if s is not None else (0,) * len(self.actions)

    def pred(self, agent) -> tuple:
        if self._pred is None:
            self._pred = {}
            for a, masks in self._succ.items():
                p = [0] * len(self.actions)
                for i, m in enumerate(masks):
                    for j in _bits(m):
                        p[j] |= 1 << i
                self._pred[a] = tuple(p)
        return self._pred.get(agent, (0,) * len(self.actions))

    def relation(self, agent) -> frozenset:
        acts = self.actions
        return frozenset(
            (acts[i], acts[j]) for i, m in enumerate(self.succ(agent)) for j in _bits(m)
        )

    @property
    def relations(self) -> dict:
        return {a: self.relation(a) for a in self.agents}

    def owned_by(self, tag) -> tuple:
        return tuple(x for x in self.actions if self.owner[x] == tag)

    def owners(self) -> frozenset:
        return frozenset(self.owner.values())

    def atoms(self) -> frozenset:
        out = set()
        for x in self.actions:
            out |= atoms_of(self.pre[x])
            for p, f in self.post[x].items():
                out.add(p)
                out |= atoms_of(f)
        return frozenset(out)

    def size(self) -> int:
        rel = sum(bin(m).count("1") for masks in self._succ.values() for m in masks)
        pre = sum(_formula_size(self.pre[x]) for x in self.actions)
        post = sum(_formula_size(f) for x in self.actions for f in self.post[x].values())
        return len(self.actions) + rel + pre + post

    def with_agents(self, agents) -> "ActionModel":
        """Copy where agents without a relation get the identity relation."""
        rel = self.relations
        for a in agents:
            if a not in self._succ:
                rel[a] = [(x, x) for x in self.actions]
        return ActionModel(self.actions, rel, self.pre, self.post, self.owner)


def _formula_size(f) -> int:
    from .formula import subformulas

    return sum(1 for _ in subformulas(f))


# --------------------------------------------------------------------------
# executability and the product


def executable(pm: PointedModel, a: ActionModel, action) -> bool:
    a.index(action)
    return evaluate(pm, a.pre[action])


def executable_actions(pm: PointedModel, a: ActionModel, among=None) -> list:
    """Executable actions in ``among`` (default: all), sorted by id."""
    cand = a.actions if among is None else among
    return sorted((x for x in cand if evaluate(pm, a.pre[x])), key=str)


def post_valuation(valuation, a: ActionModel, action) -> frozenset:
    """Valuation after ``action`` (postconditions read the old valuation)."""
    entries = a.post[action]
    if not entries:
        return frozenset(valuation)
    for p, f in entries.items():
        if not is_propositional(f):
            raise ModelError(f"non-propositional postcondition for {p} in {action!r}")
    out = {p for p in valuation if p not in entries}
    out.update(p for p, f in entries.items() if eval_prop(f, valuation))
    return frozenset(out)


def world_after(w, action):
    """Name of the product world ``(w, action)``, flattened into a history tuple."""
    if isinstance(w, tuple):
        return w + (action,)
    return (w, action)


def _pre_masks(m: EpistemicModel, a: ActionModel) -> list:
    return [truth_mask(m, a.pre[x]) for x in a.actions]


def product(m: EpistemicModel, a: ActionModel) -> EpistemicModel:
    """Full product ``M (x) A``; may have zero worlds if nothing is executable."""
    pres = _pre_masks(m, a)
    pairs = [
        (i, k) for i in range(len(m.worlds)) for k in range(len(a.actions)) if pres[k] >> i & 1
    ]
    index = {p: n for n, p in enumerate(pairs)}
    agents = sorted(set(m.agents) | set(a.agents))
    succ = {}
    for b in agents:
        ms, As = m.succ(b), a.succ(b)
        cache = {}  # worlds of one S5 class share their successor mask
        masks = []
        for i, k in pairs:
            key = (ms[i], As[k])
            mask = cache.get(key)
            if mask is None:
                mask = 0
                for j in _bits(ms[i]):
                    for l in _bits(As[k]):
                        n = index.get((j, l))
                        if n is not None:
                            mask |= 1 << n
                cache[key] = mask
            masks.append(mask)
        succ[b] = tuple(masks)
    worlds = [world_after(m.worlds[i], a.actions[k]) for i, k in pairs]
    vals = [post_valuation(m.vals[i], a, a.actions[k]) for i, k in pairs]
    return EpistemicModel.from_masks(worlds, vals, succ)


def apply_pointed(
    pm: PointedModel, a: ActionModel, action, normalize: bool = True
) -> PointedModel:
    """Execute ``action`` at the point: product, component restriction, contraction.

    Only the connected component of the new point is ever built.
    """
    m = pm.model
    k0 = a.index(action)
    i0 = pm.index
    if not holds_at(m, i0, a.pre[action]):
        raise ExecutabilityError(f"action {action!r} is not executable at {pm.point!r}")
    pres = _pre_masks(m, a)
    exec_at = [_mask_at(pres, j) for j in range(len(m.worlds))]
    agents = sorted(set(m.agents) | set(a.agents))
    index = {(i0, k0): 0}
    order = [(i0, k0)]
    pos = 0
    while pos < len(order):
        i, k = order[pos]
        pos += 1
        for b in agents:
            for ws, As in ((m.succ(b), a.succ(b)), (m.pred(b), a.pred(b))):
                for j in _bits(ws[i]):
                    for l in _bits(As[k] & exec_at[j]):
                        if (j, l) not in index:
                            index[(j, l)] = len(order)
                            order.append((j, l))
    succ = {}
    for b in agents:
        ms, As = m.succ(b), a.succ(b)
        masks = []
        for i, k in order:
            mask = 0
            for j in _bits(ms[i]):
                for l in _bits(As[k]):
                    n = index.get((j, l))
                    if n is not None:
                        mask |= 1 << n
            masks.append(mask)
        succ[b] = tuple(masks)
    worlds = [world_after(m.worlds[i], a.actions[k]) for i, k in order]
    vals = [post_valuation(m.vals[i], a, a.actions[k]) for i, k in order]
    out = PointedModel(EpistemicModel.from_masks(worlds, vals, succ), worlds[0])
    if normalize:
        out = bisim_contract(out)
    return out


def _mask_at(pres, j) -> int:
    """Bitmask over actions executable at world ``j``."""
    mask = 0
    for k, p in enumerate(pres):
        if p >> j & 1:
            mask |= 1 << k
    return mask


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ActionClass:
    propositional: bool
    s5: bool
    public_action: Optional[Hashable]
    public_announcement: Optional[Hashable]
    separable: Optional[bool]  # None: undecided within the model-size bound
    identity_relations: bool
    trivial_posts: bool

    @property
    def all_public(self) -> bool:
        return self.identity_relations

    @property
    def all_announcements(self) -> bool:
        return self.identity_relations and self.trivial_posts

    @property
    def non_expanding(self) -> bool:
        return self.identity_relations or self.separable is True


def is_identity(a: ActionModel, agents=None) -> bool:
    agents = a.agents if agents is None else agents
    return all(a.succ(b) == tuple(1 << k for k in range(len(a.actions))) for b in agents)


def action_model_is_s5(a: ActionModel) -> bool:
    n = len(a.actions)
    for b in a.agents:
        s = a.succ(b)
        for i in range(n):
            if not s[i] >> i & 1:
                return False
            for j in _bits(s[i]):
                if s[j] != s[i]:
                    return False
    return True


def action_components(a: ActionModel) -> list:
    """Connected components (union of relations, undirected), as index lists."""
    n = len(a.actions)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp, stack = [], [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            nbrs = 0
            for b in a.agents:
                nbrs |= a.succ(b)[i] | a.pred(b)[i]
            for j in _bits(nbrs):
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def satisfiable(f: Formula, world_bound: int = 2, budget: int = 50_000) -> Optional[bool]:
    """Satisfiability: exact for propositional ``f``; otherwise search small models.

    Returns ``None`` when no model with at most ``world_bound`` worlds was found.
    """
    atoms = sorted(atoms_of(f))
    if is_propositional(f):
        for bits in itertools.product((False, True), repeat=len(atoms)):
            if eval_prop(f, {p for p, b in zip(atoms, bits) if b}):
                return True
        return False
    agents = sorted(agents_of(f))
    tried = 0
    for n in range(1, world_bound + 1):
        pairs = [(i, j) for i in range(n) for j in range(n)]
        worlds = list(range(n))
        for vbits in itertools.product(range(1 << len(atoms)), repeat=n):
            val = {w: {p for k, p in enumerate(atoms) if vbits[w] >> k & 1} for w in worlds}
            for rbits in itertools.product(range(1 << len(pairs)), repeat=len(agents)):
                tried += 1
                if tried > budget:
                    return None
                rel = {
                    ag: [pr for k, pr in enumerate(pairs) if rb >> k & 1]
                    for ag, rb in zip(agents, rbits)
                }
                m = EpistemicModel(worlds, rel, val, agents)
                if truth_mask(m, f):
                    return True
    return None


def is_separable(a: ActionModel, world_bound: int = 2) -> Optional[bool]:
    verdict = True
    for comp in action_components(a):
        for i, j in itertools.combinations(comp, 2):
            both = And(a.pre[a.actions[i]], a.pre[a.actions[j]])
            sat = satisfiable(both, world_bound)
            if sat is True:
                return False
            if sat is None:
                verdict = None
    return verdict


def classify(
    a: ActionModel, point=None, agents=None, world_bound: int = 2, ignore_atoms=()
) -> ActionClass:
    """Classify ``a`` (and the pointed model ``(a, point)`` when given).

    ``ignore_atoms`` lists atoms whose postconditions are disregarded when
    deciding whether actions are announcements (used for turn variables).
    """
    propositional = all(
        modal_depth(a.pre[x]) == 0 and all(modal_depth(f) == 0 for f in a.post[x].values())
        for x in a.actions
    )
    identity = is_identity(a, agents)
    ignore = frozenset(ignore_atoms)
    trivial = all(set(a.post[x]) <= ignore for x in a.actions)
    if identity:
        separable = True
    else:
        separable = is_separable(a, world_bound)
    public_action = point if (point is not None and identity) else None
    if point is not None:
        a.index(point)
    announcement = point if (public_action is not None and set(a.post[point]) <= ignore) else None
    return ActionClass(
        propositional=propositional,
        s5=action_model_is_s5(a),
        public_action=public_action,
        public_announcement=announcement,
        separable=separable,
        identity_relations=identity,
        trivial_posts=trivial,
    )


# --------------------------------------------------------------------------
# pointed action models


def merge_pointed_actions(pointed: list) -> tuple:
    """Disjoint union of pointed action models ``[(A_i, alpha_i)]``.

    Returns the merged model and a list mapping input position to the renamed
    designated action.
    """
    if not pointed:
        raise ModelError("nothing to merge")
    agent_sets = {frozenset(a.agents) for a, _ in pointed}
    if len(agent_sets) != 1:
        raise ModelError("pointed action models disagree on the agent set")
    agents = sorted(agent_sets.pop())
    actions, pre, post, owner = [], {}, {}, {}
    rel = {b: [] for b in agents}
    points = []
    for n, (a, alpha) in enumerate(pointed):
        a.index(alpha)
        rename = {x: f"m{n}_{x}" for x in a.actions}
        for x in a.actions:
            actions.append(rename[x])
            pre[rename[x]] = a.pre[x]
            post[rename[x]] = a.post[x]
            owner[rename[x]] = a.owner[x]
        for b in agents:
            rel[b].extend((rename[x], rename[y]) for x, y in a.relation(b))
        points.append(rename[alpha])
    return ActionModel(actions, rel, pre, post, owner, agents), points


# --------------------------------------------------------------------------
# finite-domain variables


@dataclass(frozen=True)
class FiniteDomainVar:
    """Variable over a finite domain encoded by atoms.

    ``onehot`` uses one atom ``name@value`` per value; ``binary`` uses
    ``name@bitK`` atoms holding the index of the value in binary.
    """

    name: str
    domain: tuple
    encoding: str = "onehot"

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(str(d) for d in self.domain))
        if len(set(self.domain)) != len(self.domain) or not self.domain:
            raise ModelError(f"bad domain for {self.name}")
        if self.encoding not in ("onehot", "binary"):
            raise ModelError(f"unknown encoding {self.encoding!r}")

    @property
    def nbits(self) -> int:
        return max(1, (len(self.domain) - 1).bit_length())

    def atoms(self) -> tuple:
        if self.encoding == "onehot":
            return tuple(f"{self.name}@{d}" for d in self.domain)
        return tuple(f"{self.name}@bit{k}" for k in range(self.nbits))

    def _check(self, value) -> int:
        value = str(value)
        try:
            return self.domain.index(value)
        except ValueError:
            raise ModelError(f"{value!r} is not in the domain of {self.name}") from None

    def test(self, value) -> Formula:
        k = self._check(value)
        if self.encoding == "onehot":
            return Atom(f"{self.name}@{self.domain[k]}")
        lits = []
        for b, atom in enumerate(self.atoms()):
            lits.append(Atom(atom) if k >> b & 1 else Not(Atom(atom)))
        return conj(lits)

    def member(self, values) -> Formula:
        return disj(self.test(v) for v in values)

    def valuation(self, value) -> frozenset:
        k = self._check(value)
        if self.encoding == "onehot":
            return frozenset({f"{self.name}@{self.domain[k]}"})
        return frozenset(atom for b, atom in enumerate(self.atoms()) if k >> b & 1)

    def assign(self, value) -> dict:
        true_atoms = self.valuation(value)
        return {p: (TRUE if p in true_atoms else FALSE) for p in self.atoms()}

    def assign_map(self, fn) -> dict:
        """Post entries implementing ``var := fn(var)`` by guarded formulas."""
        targets = {d: self.valuation(fn(d)) for d in self.domain}
        out = {}
        for p in self.atoms():
            out[p] = disj(self.test(d) for d in self.domain if p in targets[d])
        return out

    def value_in(self, valuation) -> Optional[str]:
        """Decode a valuation; ``None`` if it encodes no (or several) values."""
        if self.encoding == "onehot":
            hits = [d for d in self.domain if f"{self.name}@{d}" in valuation]
            return hits[0] if len(hits) == 1 else None
        k = sum(1 << b for b, atom in enumerate(self.atoms()) if atom in valuation)
        return self.domain[k] if k < len(self.domain) else None


def fdvar_test(v: FiniteDomainVar, value) -> Formula:
    return v.test(value)


def fdvar_assign(v: FiniteDomainVar, value) -> dict:
    return v.assign(value)
