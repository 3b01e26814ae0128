"""Instance encoders for the hardness constructions, with brute-force oracles.

* QBF          -> controller synthesis with public announcements
* conditional planning and G4 -> controller synthesis with public actions
* TEAM DFA GAME -> distributed synthesis with propositional actions
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .actions import CTR, ENV, ActionModel, FiniteDomainVar
from .distributed import TeamSplit, strategy_tree_search
from .errors import ModelError
from .formula import (
    FALSE,
    TRUE,
    Atom,
    Formula,
    Knows,
    Not,
    Poss,
    atoms_of,
    conj,
    disj,
    eval_prop,
    substitute,
)
from .models import EpistemicModel, PointedModel
from .problem import Problem

# --------------------------------------------------------------------------
# QBF


@dataclass(frozen=True)
class QbfInstance:
    prefix: tuple  # ((quantifier, variable), ...), quantifier in {"exists", "forall"}
    matrix: Formula

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(tuple(q) for q in self.prefix))
        for q, v in self.prefix:
            if q not in ("exists", "forall"):
                raise ModelError(f"unknown quantifier {q!r}")
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ModelError("a variable is quantified twice")

    @property
    def variables(self) -> tuple:
        return tuple(v for _, v in self.prefix)

    def is_normalized(self) -> bool:
        qs = [q for q, _ in self.prefix]
        return len(qs) % 2 == 0 and all(
            q == ("exists" if i % 2 == 0 else "forall") for i, q in enumerate(qs)
        )


def normalize_qbf(q: QbfInstance) -> QbfInstance:
    """Pad with unused dummy variables until quantifiers alternate, starting
    with exists, over an even number of variables.  Free matrix variables are
    bound existentially first."""
    used = set(q.variables) | atoms_of(q.matrix)
    prefix = [("exists", v) for v in sorted(atoms_of(q.matrix) - set(q.variables))]
    prefix += list(q.prefix)
    out = []
    counter = itertools.count()

    def fresh():
        while True:
            name = f"d{next(counter)}"
            if name not in used:
                used.add(name)
                return name

    for quant, v in prefix:
        want = "exists" if len(out) % 2 == 0 else "forall"
        if quant != want:
            out.append((want, fresh()))
        out.append((quant, v))
    if len(out) % 2:
        out.append(("forall", fresh()))
    if not out:
        out = [("exists", fresh()), ("forall", fresh())]
    return QbfInstance(tuple(out), q.matrix)


def qbf_brute_force(q: QbfInstance) -> bool:
    prefix = q.prefix

    def rec(i, true_vars):
        if i == len(prefix):
            return eval_prop(q.matrix, true_vars)
        quant, v = prefix[i]
        branches = (rec(i + 1, true_vars | {v}), rec(i + 1, true_vars))
        return any(branches) if quant == "exists" else all(branches)

    return rec(0, frozenset())


def qbf_to_controller(q: QbfInstance) -> Problem:
    """Announcement game: announcing ``p{i}_true`` / ``p{i}_false`` fixes variable i.

    Worlds: ``w`` (the point, no atoms), ``u{i}`` with ``q{i}`` and
    ``w{i}`` with ``p{i}``; agent ``a`` considers every world possible.
    Variable i ends up true iff ``w{i}`` survives, i.e. iff ``M[a] p{i}``.
    """
    if not q.is_normalized():
        raise ModelError("QBF instance is not normalized; call normalize_qbf first")
    n = len(q.prefix)
    worlds = ["w"] + [f"u{i}" for i in range(1, n + 1)] + [f"w{i}" for i in range(1, n + 1)]
    val = {"w": set()}
    for i in range(1, n + 1):
        val[f"u{i}"] = {f"q{i}"}
        val[f"w{i}"] = {f"p{i}"}
    model = EpistemicModel(worlds, {"a": [(x, y) for x in worlds for y in worlds]}, val)
    actions, pre, owner = [], {}, {}
    for i in range(1, n + 1):
        stage = conj(
            [Knows("a", Not(Atom(f"q{j}"))) for j in range(1, i)]
            + [Poss("a", Atom(f"q{j}")) for j in range(i, n + 1)]
        )
        side = CTR if i % 2 == 1 else ENV
        pre[f"p{i}_true"] = conj([stage, Not(Atom(f"q{i}"))])
        pre[f"p{i}_false"] = conj([stage, Not(Atom(f"p{i}")), Not(Atom(f"q{i}"))])
        for x in (f"p{i}_true", f"p{i}_false"):
            actions.append(x)
            owner[x] = side
    a = ActionModel(actions, {"a": [(x, x) for x in actions]}, pre, owner=owner)
    mapping = {v: Poss("a", Atom(f"p{i}")) for i, v in enumerate(q.variables, 1)}
    goal = conj(
        [Knows("a", Not(Atom(f"q{j}"))) for j in range(1, n + 1)] + [substitute(q.matrix, mapping)]
    )
    notes = ["QBF " + " ".join(f"{quant} {v}" for quant, v in q.prefix)]
    return Problem(("a",), PointedModel(model, "w"), a, goal, "controller", notes=notes)


def parse_qbf(text: str) -> QbfInstance:
    """Lines ``exists x`` / ``forall y`` then ``matrix <formula>``."""
    from .formula import parse_formula

    prefix, matrix = [], None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head in ("exists", "forall"):
            prefix.extend((head, v) for v in rest.split())
        elif head == "matrix":
            matrix = parse_formula(rest)
        else:
            raise ModelError(f"line {n}: expected exists, forall or matrix")
    if matrix is None:
        raise ModelError("missing matrix line")
    return QbfInstance(tuple(prefix), matrix)


# --------------------------------------------------------------------------
# conditional planning


@dataclass(frozen=True)
class CondPlanAction:
    pre: Formula
    posts: tuple  # tuple of {atom: propositional formula}

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(dict(p) for p in self.posts))
        if not self.posts:
            raise ModelError("a nondeterministic action needs at least one outcome")


def _apply_post(val, post):
    out = {p for p in val if p not in post}
    out.update(p for p, f in post.items() if eval_prop(f, val))
    return frozenset(out)


def condplan_to_controller(init, actions: list, goal: Formula) -> Problem:
    """Controller picks an action (recorded in variable ``action``), the
    Environment then picks which outcome happens."""
    var = FiniteDomainVar("action", ["none"] + [f"c{j}" for j in range(len(actions))])
    model = EpistemicModel(["w"], {}, {"w": set(init) | var.valuation("none")})
    names, pre, post, owner = [], {}, {}, {}
    for j, act in enumerate(actions):
        c = f"c{j}"
        names.append(c)
        pre[c] = act.pre
        post[c] = var.assign(c)
        owner[c] = CTR
        for i, outcome in enumerate(act.posts):
            r = f"c{j}_r{i}"
            names.append(r)
            pre[r] = var.test(c)
            post[r] = {**outcome, **var.assign("none")}
            owner[r] = ENV
    a = ActionModel(names, {}, pre, post, owner)
    return Problem((), PointedModel(model, "w"), a, goal, "controller")


def condplan_brute_force(init, actions: list, goal: Formula, depth: int = None) -> bool:
    """Minimax over valuations: Controller picks an applicable action, the
    Environment an outcome.  The default depth (number of valuations) is exact."""
    atoms = set(init) | atoms_of(goal)
    for act in actions:
        atoms |= atoms_of(act.pre)
        for o in act.posts:
            atoms |= set(o) | set().union(*(atoms_of(f) for f in o.values()))
    if depth is None:
        depth = 2 ** len(atoms)

    @lru_cache(maxsize=None)
    def win(val, d):
        if eval_prop(goal, val):
            return True
        if d == 0:
            return False
        return any(
            all(win(_apply_post(val, o), d - 1) for o in act.posts)
            for act in actions
            if eval_prop(act.pre, val)
        )

    return win(frozenset(init), depth)


def parse_condplan(text: str):
    """Returns ``(init, actions, goal)`` from lines

    ``init <atoms>``, ``goal <formula>``, ``action <precondition>`` and, after
    each action, one or more ``outcome p := <f>; q := <g>`` lines
    (``outcome`` alone is an outcome that changes nothing).
    """
    from .formula import parse_formula

    init, actions, goal = set(), [], None
    pre, posts = None, []

    def close():
        if pre is not None:
            if not posts:
                raise ModelError("an action needs at least one outcome line")
            actions.append(CondPlanAction(pre, tuple(posts)))

    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "init":
            init.update(rest.split())
        elif head == "goal":
            goal = parse_formula(rest)
        elif head == "action":
            close()
            pre, posts = parse_formula(rest or "true"), []
        elif head == "outcome":
            if pre is None:
                raise ModelError(f"line {n}: outcome before any action")
            post = {}
            for part in filter(None, (x.strip() for x in rest.split(";"))):
                atom, sep, f = part.partition(":=")
                if not sep:
                    raise ModelError(f"line {n}: expected 'p := formula'")
                post[atom.strip()] = parse_formula(f)
            posts.append(post)
        else:
            raise ModelError(f"line {n}: expected init, goal, action or outcome")
    close()
    if goal is None:
        raise ModelError("missing goal line")
    return frozenset(init), actions, goal


# --------------------------------------------------------------------------
# G4


@dataclass(frozen=True)
class G4Instance:
    k: int
    terms: tuple  # each term: tuple of (atom, positive)
    init: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(tuple(l) for l in t) for t in self.terms))
        object.__setattr__(self, "init", frozenset(self.init))
        allowed = set(self.atoms)
        for t in self.terms:
            if len(t) > 13:
                raise ModelError("G4 terms have at most 13 literals")
            for atom, _ in t:
                if atom not in allowed:
                    raise ModelError(f"unknown G4 atom {atom!r}")
        if not self.init <= allowed:
            raise ModelError("initial valuation uses unknown atoms")

    @property
    def atoms(self) -> tuple:
        return tuple(f"p{i}" for i in range(1, self.k + 1)) + tuple(
            f"q{i}" for i in range(1, self.k + 1)
        )

    def formula(self) -> Formula:
        return disj(
            conj(Atom(p) if pos else Not(Atom(p)) for p, pos in t) for t in self.terms
        )


def g4_to_controller(g: G4Instance) -> Problem:
    """Controller flips ``p`` atoms, Environment flips ``q`` atoms; goal is the DNF.

    G4 itself is won by whoever makes the formula true; this encoding only
    rewards Controller for reaching the formula, whoever moved last.
    """
    model = EpistemicModel(["w"], {}, {"w": set(g.init)})
    names, post, owner = [], {}, {}
    for i in range(1, g.k + 1):
        for side, atom in ((CTR, f"p{i}"), (ENV, f"q{i}")):
            x = f"flip_{atom}"
            names.append(x)
            post[x] = {atom: Not(Atom(atom))}
            owner[x] = side
    a = ActionModel(names, {}, {}, post, owner)
    notes = ["G4 encoding: Controller wins when the formula first holds, whoever moved last"]
    return Problem((), PointedModel(model, "w"), a, g.formula(), "controller", notes=notes)


def g4_brute_force(g: G4Instance, depth: int = None) -> bool:
    """Minimax on (valuation, mover) with the encoded rules: the goal is
    checked before every move.  The default depth (number of
    configurations) is exact."""
    f = g.formula()
    if depth is None:
        depth = 2 * 2 ** (2 * g.k)
    ps = [f"p{i}" for i in range(1, g.k + 1)]
    qs = [f"q{i}" for i in range(1, g.k + 1)]

    @lru_cache(maxsize=None)
    def win(val, ctr_moves, d):
        if eval_prop(f, val):
            return True
        if d == 0:
            return False
        flips = ps if ctr_moves else qs
        results = (win(val ^ {x}, not ctr_moves, d - 1) for x in flips)
        return any(results) if ctr_moves else all(results)

    return win(g.init, True, depth)


def parse_g4(text: str) -> G4Instance:
    """Lines ``k <n>``, ``init <atoms>``, ``term <literals>`` (``!p1`` negates)."""
    k, init, terms = None, set(), []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "k":
            k = int(rest[0])
        elif head == "init":
            init.update(rest)
        elif head == "term":
            terms.append(tuple((lit.lstrip("!"), not lit.startswith("!")) for lit in rest))
        else:
            raise ModelError(f"line {n}: expected k, init or term")
    if k is None:
        raise ModelError("missing k line")
    return G4Instance(k, tuple(terms), frozenset(init))


# --------------------------------------------------------------------------
# TEAM DFA GAME


@dataclass(frozen=True)
class TeamDfaInstance:
    states: tuple
    initial: str
    delta: dict  # (state, bit) -> state
    f_exists: frozenset = frozenset()
    f_forall: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "f_exists", frozenset(self.f_exists))
        object.__setattr__(self, "f_forall", frozenset(self.f_forall))
        if self.initial not in self.states:
            raise ModelError("initial state is not a state")
        for s in self.states:
            for b in (0, 1):
                if self.delta.get((s, b)) not in self.states:
                    raise ModelError(f"delta is not total at ({s}, {b})")
        if not (self.f_exists | self.f_forall) <= set(self.states):
            raise ModelError("accepting sets mention unknown states")

    def run(self, q, bits) -> str:
        for b in bits:
            q = self.delta[(q, b)]
        return q


FORALL = "forall"


def teamdfa_to_distributed(t: TeamDfaInstance, encoding: str = "onehot") -> Problem:
    """Six-step rounds: check, inputs, reveal beta to a, a's bit, reveal beta2 to b, b's bit.

    The reveal steps are moves of the universal player, so that no agent
    ever has to choose among actions it cannot tell apart.  Fourteen
    actions in total.
    """
    turn = FiniteDomainVar("turn", ["a", "b", FORALL])
    q = FiniteDomainVar("q", t.states, encoding)
    stp = FiniteDomainVar("stp", [str(i) for i in range(1, 7)])
    init = turn.valuation(FORALL) | q.valuation(t.initial) | stp.valuation("1")
    model = EpistemicModel(["w"], {x: [("w", "w")] for x in ("a", "b", FORALL)}, {"w": init})

    def T(x):
        return turn.test(x)

    def S(i):
        return stp.test(str(i))

    def step(bits):
        return q.assign_map(lambda s: t.run(s, bits))

    beta, beta2, lost = Atom("beta"), Atom("beta2"), Atom("lost")
    in_forall = q.member(sorted(t.f_forall))
    acts = {}
    acts["check_lose"] = (FORALL, conj([T(FORALL), S(1), in_forall]),
                          {"lost": TRUE, **stp.assign("2"), **turn.assign(FORALL)})
    acts["check_ok"] = (FORALL, conj([T(FORALL), S(1), Not(in_forall)]),
                        {**stp.assign("2"), **turn.assign(FORALL)})
    for b1, b2 in itertools.product((0, 1), repeat=2):
        acts[f"input_{b1}{b2}"] = (
            FORALL,
            conj([T(FORALL), S(2)]),
            {"beta": TRUE if b1 else FALSE, "beta2": TRUE if b2 else FALSE,
             **step((b1, b2)), **stp.assign("3"), **turn.assign(FORALL)},
        )
    acts["reveal_beta_1"] = (FORALL, conj([T(FORALL), S(3), beta]), {**stp.assign("4"), **turn.assign("a")})
    acts["reveal_beta_0"] = (FORALL, conj([T(FORALL), S(3), Not(beta)]), {**stp.assign("4"), **turn.assign("a")})
    for bit in (0, 1):
        acts[f"a_input_{bit}"] = (
            "a", conj([T("a"), S(4)]),
            {"m": TRUE if bit else FALSE, **step((bit,)), **stp.assign("5"), **turn.assign(FORALL)},
        )
    acts["reveal_beta2_1"] = (FORALL, conj([T(FORALL), S(5), beta2]), {**stp.assign("6"), **turn.assign("b")})
    acts["reveal_beta2_0"] = (FORALL, conj([T(FORALL), S(5), Not(beta2)]), {**stp.assign("6"), **turn.assign("b")})
    for bit in (0, 1):
        acts[f"b_input_{bit}"] = (
            "b", conj([T("b"), S(6)]),
            {"m2": TRUE if bit else FALSE, **step((bit,)), **stp.assign("1"), **turn.assign(FORALL)},
        )
    names = list(acts)
    first = ["check_lose", "check_ok"] + [f"input_{x}{y}" for x, y in itertools.product("01", repeat=2)]

    def classes(groups):
        covered = {x for g in groups for x in g}
        groups = list(groups) + [[x] for x in names if x not in covered]
        return [(x, y) for g in groups for x in g for y in g]

    rel = {
        "a": classes([first, ["reveal_beta2_0", "reveal_beta2_1"], ["b_input_0", "b_input_1"]]),
        "b": classes([first, ["reveal_beta_0", "reveal_beta_1"], ["a_input_0", "a_input_1"]]),
        FORALL: classes([]),
    }
    a = ActionModel(
        names,
        rel,
        {x: v[1] for x, v in acts.items()},
        {x: v[2] for x, v in acts.items()},
        {x: v[0] for x, v in acts.items()},
    )
    goal = conj([Not(lost), S(1), q.member(sorted(t.f_exists))])
    split = TeamSplit(frozenset({"a", "b"}), frozenset({FORALL}))
    notes = ["TEAM DFA GAME encoding; the universal player makes the reveal moves"]
    return Problem(
        ("a", "b", FORALL), PointedModel(model, "w"), a, goal, "distributed", turn, split,
        notes=notes,
    )


def teamdfa_bounded(t: TeamDfaInstance, rounds: int, encoding: str = "onehot", budget=None):
    """History-tree search on the encoding with horizon ``6 * rounds``."""
    p = teamdfa_to_distributed(t, encoding)
    kw = {} if budget is None else {"budget": budget}
    return strategy_tree_search(p.pm, p.actions, p.split, p.goal, 6 * rounds, p.turn, **kw)


def parse_teamdfa(text: str) -> TeamDfaInstance:
    """Lines ``states ...``, ``initial q``, ``delta q 0 -> q'``, ``Fexists ...``, ``Fforall ...``."""
    states, initial, delta, fe, fa = [], None, {}, set(), set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "states":
            states.extend(rest)
        elif head == "initial":
            initial = rest[0]
        elif head == "delta":
            if len(rest) != 4 or rest[2] != "->" or rest[1] not in ("0", "1"):
                raise ModelError(f"line {n}: expected 'delta q b -> q2'")
            delta[(rest[0], int(rest[1]))] = rest[3]
        elif head == "Fexists":
            fe.update(rest)
        elif head == "Fforall":
            fa.update(rest)
        else:
            raise ModelError(f"line {n}: unknown line {head!r}")
    return TeamDfaInstance(tuple(states), initial, delta, frozenset(fe), frozenset(fa))


# --------------------------------------------------------------------------
# controller games as distributed games


def controller_as_distributed(p: Problem) -> Problem:
    """Same game with a turn variable: ``ctr`` (perfect information) against ``env``."""
    turn = FiniteDomainVar("turn", [CTR, ENV])
    m = p.pm.model
    agents = sorted(set(m.agents) | set(p.actions.agents))
    rel = {b: m.relation(b) for b in agents}
    ident = [(w, w) for w in m.worlds]
    rel[CTR] = ident
    rel[ENV] = ident
    vals = {w: set(m.vals[i]) | turn.valuation(CTR) for i, w in enumerate(m.worlds)}
    model = EpistemicModel(m.worlds, rel, vals, agents + [CTR, ENV])
    a = p.actions
    arel = {b: a.relation(b) for b in agents}
    arel[CTR] = [(x, x) for x in a.actions]
    arel[ENV] = [(x, x) for x in a.actions]
    pre, post = {}, {}
    for x in a.actions:
        side = a.owner[x]
        pre[x] = conj([a.pre[x], turn.test(side)])
        post[x] = {**a.post[x], **turn.assign(ENV if side == CTR else CTR)}
    na = ActionModel(a.actions, arel, pre, post, a.owner)
    split = TeamSplit(frozenset({CTR}), frozenset({ENV}))
    return Problem(
        tuple(agents) + (CTR, ENV), PointedModel(model, p.pm.point), na, p.goal,
        "distributed", turn, split,
    )
