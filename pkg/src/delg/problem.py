"""Problem files: a line-oriented text format for whole instances.

Example::

    agents a b
    model {
      world w { p }
      world u { }
      obs a { w u }
      obs b { w u }
      point w
    }
    actions {
      action alpha owner ctr { pre p; post p := false; }
      action skip owner ctr { pre true; }
      obs b { alpha skip }
    }
    mode plan
    goal K[a] !p

Agents without an ``obs``/``rel`` block get the identity relation.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from .actions import CTR, ENV, ActionModel, FiniteDomainVar
from .distributed import TeamSplit
from .errors import FormulaSyntaxError, ModelError, StrategyError, UnknownAgentError
from .formula import Formula, TokenStream, parse_formula_tokens, to_text, tokenize
from .models import EpistemicModel, PointedModel
from .strategy import ControllerStrategy, DistributedStrategy

MODES = ("plan", "controller", "distributed")


class ProblemSyntaxError(FormulaSyntaxError):
    pass


@dataclass
class Problem:
    agents: tuple
    pm: PointedModel
    actions: Optional[ActionModel]
    goal: Optional[Formula]
    mode: str = "controller"
    turn: Optional[FiniteDomainVar] = None
    split: Optional[TeamSplit] = None
    action_point: object = None
    options: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def instance_hash(self) -> str:
        return instance_hash(self)


# --------------------------------------------------------------------------
# reading


class _Reader:
    def __init__(self, text, source):
        self.s = TokenStream(tokenize(text, source), source)
        self.source = source
        self.agents = None

    def err(self, msg, tok=None, cls=ProblemSyntaxError):
        return self.s.error(msg, tok, cls)

    def ident(self, what="identifier"):
        try:
            return self.s.ident(what)
        except FormulaSyntaxError as e:
            raise ProblemSyntaxError(str(e).split(": ", 1)[-1], e.line, e.column, self.source)

    def expect(self, text):
        try:
            return self.s.expect(text)
        except FormulaSyntaxError as e:
            raise ProblemSyntaxError(str(e).split(": ", 1)[-1], e.line, e.column, self.source)

    def same_line_idents(self, tok):
        out = []
        while self.s.peek().kind == "ident" and self.s.peek().line == tok.line:
            out.append(self.s.next())
        return out

    def braced_idents(self):
        self.expect("{")
        out = []
        while not self.s.at("}"):
            out.append(self.ident())
        self.expect("}")
        return out

    def agent(self):
        tok = self.ident("agent name")
        if self.agents is not None and tok.text not in self.agents:
            raise self.err(f"unknown agent {tok.text!r}", tok, UnknownAgentError)
        return tok

    def formula(self):
        return parse_formula_tokens(self.s, self.agents)

    def relation_block(self, kind, obs, rel):
        """``obs a { x y }`` or ``rel a (x y) (y x)``."""
        agent = self.agent()
        if kind == "obs":
            obs.setdefault(agent.text, []).append(self.braced_idents())
        else:
            pairs = rel.setdefault(agent.text, [])
            while self.s.at("("):
                self.s.next()
                x, y = self.ident(), self.ident()
                self.expect(")")
                pairs.append((x, y))


def _relations(items, obs, rel, agents, what):
    names = {t.text for t in items}
    out = {}
    for b in agents:
        if b not in obs and b not in rel:
            out[b] = [(x, x) for x in items_text(items)]
            continue
        pairs = set()
        covered = set()
        for block in obs.get(b, []):
            for t in block:
                if t.text not in names:
                    raise ProblemSyntaxError(
                        f"unknown {what} {t.text!r}", t.line, t.column, None
                    )
                if t.text in covered:
                    raise ProblemSyntaxError(
                        f"{what} {t.text!r} appears in two obs classes of {b}", t.line, t.column
                    )
            cls = [t.text for t in block]
            covered.update(cls)
            pairs.update((x, y) for x in cls for y in cls)
        if b in obs:
            pairs.update((x, x) for x in items_text(items) if x not in covered)
        for x, y in rel.get(b, []):
            for t in (x, y):
                if t.text not in names:
                    raise ProblemSyntaxError(f"unknown {what} {t.text!r}", t.line, t.column)
            pairs.add((x.text, y.text))
        out[b] = sorted(pairs)
    return out


def items_text(items):
    return [t.text for t in items]


def parse_problem(text: str, source: str = None) -> Problem:
    """Parse a problem file; errors carry file, line and column."""
    try:
        return _parse(text, source)
    except ProblemSyntaxError as e:
        if e.source is None and source is not None:
            raise ProblemSyntaxError(str(e).split(": ", 1)[-1], e.line, e.column, source)
        raise


def _parse(text, source):
    r = _Reader(text, source)
    s = r.s
    agents = None
    mode = None
    goal = None
    turn = None
    team = None
    options = {}
    worlds = []
    valuation = {}
    m_obs, m_rel = {}, {}
    point = None
    actions = []
    pre, post, owner = {}, {}, {}
    a_obs, a_rel = {}, {}
    a_point = None
    have_actions = False
    while s.peek().kind != "eof":
        kw = r.ident("keyword")
        k = kw.text
        if k == "agents":
            agents = [t.text for t in r.same_line_idents(kw)]
            r.agents = frozenset(agents)
        elif k == "mode":
            t = r.ident("mode")
            if t.text not in MODES:
                raise r.err(f"unknown mode {t.text!r}", t)
            mode = t.text
        elif k == "turnvar":
            name = r.ident("variable name")
            t = r.ident()
            if t.text != "in":
                raise r.err("expected 'in'", t)
            dom = [t.text for t in r.braced_idents()]
            turn = FiniteDomainVar(name.text, dom)
        elif k == "team":
            team = [t.text for t in r.braced_idents()]
        elif k == "option":
            key = r.ident("option name")
            vals = r.same_line_idents(key)
            options[key.text] = " ".join(t.text for t in vals)
        elif k == "goal":
            goal = r.formula()
        elif k == "model":
            r.expect("{")
            while not s.at("}"):
                t = r.ident("model item")
                if t.text == "world":
                    w = r.ident("world name")
                    if w.text in valuation:
                        raise r.err(f"duplicate world {w.text!r}", w)
                    worlds.append(w)
                    valuation[w.text] = [x.text for x in r.braced_idents()]
                elif t.text in ("obs", "rel"):
                    r.relation_block(t.text, m_obs, m_rel)
                elif t.text == "point":
                    point = r.ident("world name")
                else:
                    raise r.err(f"unexpected {t.text!r} in model block", t)
            r.expect("}")
        elif k == "actions":
            have_actions = True
            r.expect("{")
            while not s.at("}"):
                t = r.ident("action item")
                if t.text == "action":
                    x = r.ident("action name")
                    if x.text in pre:
                        raise r.err(f"duplicate action {x.text!r}", x)
                    actions.append(x)
                    pre[x.text] = None
                    post[x.text] = {}
                    if s.at("owner"):
                        s.next()
                        owner[x.text] = r.ident("owner").text
                    r.expect("{")
                    while not s.at("}"):
                        f = r.ident("'pre' or 'post'")
                        if f.text == "pre":
                            pre[x.text] = r.formula()
                        elif f.text == "post":
                            p = r.ident("atom")
                            r.expect(":=")
                            post[x.text][p.text] = r.formula()
                        else:
                            raise r.err(f"unexpected {f.text!r} in action body", f)
                        r.expect(";")
                    r.expect("}")
                elif t.text in ("obs", "rel"):
                    r.relation_block(t.text, a_obs, a_rel)
                elif t.text == "point":
                    a_point = r.ident("action name")
                else:
                    raise r.err(f"unexpected {t.text!r} in actions block", t)
            r.expect("}")
        else:
            raise r.err(f"unknown keyword {k!r}", kw)

    end = s.peek()
    if not worlds:
        raise r.err("no model block with at least one world", end)
    if agents is None:
        agents = sorted(set(m_obs) | set(m_rel) | set(a_obs) | set(a_rel))
    if point is None:
        point = worlds[0]
    if point.text not in valuation:
        raise r.err(f"unknown world {point.text!r}", point)
    try:
        rel = _relations(worlds, m_obs, m_rel, agents, "world")
        model = EpistemicModel(items_text(worlds), rel, valuation, agents)
        am = None
        if have_actions and actions:
            arel = _relations(actions, a_obs, a_rel, agents, "action")
            am = ActionModel(
                items_text(actions),
                arel,
                {x: f for x, f in pre.items() if f is not None},
                post,
                owner,
                agents,
            )
    except ProblemSyntaxError as e:
        raise ProblemSyntaxError(str(e).split(": ", 1)[-1], e.line, e.column, source)
    except ModelError as e:
        raise ProblemSyntaxError(str(e), end.line, end.column, source)
    if a_point is not None and a_point.text not in pre:
        raise r.err(f"unknown action {a_point.text!r}", a_point)
    mode = mode or "controller"
    split = None
    if mode == "controller" and am is not None:
        bad = [x for x in am.actions if am.owner[x] not in (CTR, ENV)]
        if bad:
            raise r.err(f"controller mode needs owner ctr or env for {bad[0]!r}", end)
    if mode == "distributed":
        if turn is None:
            raise r.err("distributed mode needs a turnvar declaration", end)
        if team is None:
            raise r.err("distributed mode needs a team declaration", end)
        unknown = set(team) - set(turn.domain)
        if unknown:
            raise r.err(f"team members {sorted(unknown)} are not turn values", end)
        split = TeamSplit(frozenset(team), frozenset(turn.domain) - frozenset(team))
    if goal is None and am is not None:
        raise r.err("missing goal", end)
    return Problem(
        tuple(agents),
        PointedModel(model, point.text),
        am,
        goal,
        mode,
        turn,
        split,
        None if a_point is None else a_point.text,
        options,
    )


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), str(path))


# --------------------------------------------------------------------------
# writing


def world_name(w) -> str:
    if isinstance(w, tuple):
        return "_".join(world_name(x) for x in w)
    return str(w)


def _relation_lines(kind_items, succ_pairs, agent, indent):
    items = list(kind_items)
    pairs = set(succ_pairs)
    if pairs == {(x, x) for x in items}:
        return []
    classes = _classes(items, pairs)
    if classes is not None:
        return [
            f"{indent}obs {agent} {{ {' '.join(c)} }}" for c in classes if len(c) > 1
        ]
    body = " ".join(f"({x} {y})" for x, y in sorted(pairs))
    return [f"{indent}rel {agent} {body}".rstrip()]


def _classes(items, pairs):
    """Partition classes if ``pairs`` is an equivalence relation, else None."""
    succ = {x: {y for (u, y) in pairs if u == x} for x in items}
    seen, out = set(), []
    for x in items:
        if x not in succ[x]:
            return None
        if x in seen:
            continue
        cls = succ[x]
        for y in cls:
            if succ[y] != cls:
                return None
        seen |= cls
        out.append([y for y in items if y in cls])
    return out


def write_problem(p: Problem) -> str:
    m = p.pm.model
    names = [world_name(w) for w in m.worlds]
    if len(set(names)) != len(names):
        names = [f"w{i}" for i in range(len(names))]
    rename = dict(zip(m.worlds, names))
    lines = [f"# {n}" for n in p.notes]
    agents = sorted(set(p.agents) | set(m.agents) | set(p.actions.agents if p.actions else ()))
    lines.append("agents " + " ".join(agents))
    if p.turn is not None:
        lines.append(f"turnvar {p.turn.name} in {{ {' '.join(p.turn.domain)} }}")
    if p.split is not None:
        lines.append(f"team {{ {' '.join(sorted(p.split.existential))} }}")
    lines.append(f"mode {p.mode}")
    for k, v in sorted(p.options.items()):
        lines.append(f"option {k} {v}".rstrip())
    lines.append("model {")
    for i, w in enumerate(m.worlds):
        lines.append(f"  world {rename[w]} {{ {' '.join(sorted(m.vals[i]))} }}".replace("{  }", "{ }"))
    for b in agents:
        pairs = {(rename[x], rename[y]) for x, y in m.relation(b)}
        lines.extend(_relation_lines(names, pairs, b, "  "))
    lines.append(f"  point {rename[p.pm.point]}")
    lines.append("}")
    a = p.actions
    if a is not None:
        lines.append("actions {")
        for x in a.actions:
            own = f" owner {a.owner[x]}" if a.owner[x] is not None else ""
            body = [f"pre {to_text(a.pre[x])};"]
            body += [f"post {q} := {to_text(f)};" for q, f in sorted(a.post[x].items())]
            lines.append(f"  action {x}{own} {{ {' '.join(body)} }}")
        for b in agents:
            pairs = {(str(x), str(y)) for x, y in a.relation(b)}
            lines.extend(_relation_lines(list(map(str, a.actions)), pairs, b, "  "))
        if p.action_point is not None:
            lines.append(f"  point {p.action_point}")
        lines.append("}")
    if p.goal is not None:
        lines.append(f"goal {to_text(p.goal)}")
    return "\n".join(lines) + "\n"


def instance_hash(p: Problem) -> str:
    body = [ln for ln in write_problem(p).splitlines() if not ln.startswith("#")]
    return hashlib.sha256("\n".join(body).encode()).hexdigest()


# --------------------------------------------------------------------------
# strategy certificates


def write_certificate(strategy, problem: Problem) -> str:
    lines = ["# delg strategy certificate", f"instance {instance_hash(problem)}"]
    if isinstance(strategy, ControllerStrategy):
        lines += [f"kind {strategy.kind}", f"clock {strategy.clock}", f"deadlock {strategy.deadlock}"]
        for k, x in sorted(strategy._table.digests().items()):
            lines.append(f"key {k} -> {x}")
    elif isinstance(strategy, DistributedStrategy):
        lines += ["kind distributed", f"method {strategy.method}", f"deadlock {strategy.deadlock}"]
        if strategy.horizon is not None:
            lines.append(f"horizon {strategy.horizon}")
        for agent in sorted(strategy.per_agent):
            table = strategy._tables[agent].digests()
            for k, x in sorted(table.items()):
                lines.append(f"key {agent} {k} -> {x}")
    else:
        raise StrategyError(f"cannot serialise {type(strategy).__name__}")
    return "\n".join(lines) + "\n"


def read_certificate(text: str):
    """Returns ``(instance hash, strategy)``; keys stay as digests."""
    header = {}
    entries = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "key":
            if "->" not in parts or parts.index("->") != len(parts) - 2:
                raise StrategyError(f"line {n}: malformed key entry")
            entries.append(parts[1:-2] + [parts[-1]])
        elif len(parts) == 2:
            header[parts[0]] = parts[1]
        else:
            raise StrategyError(f"line {n}: cannot parse {raw!r}")
    kind = header.get("kind")
    if "instance" not in header or kind is None:
        raise StrategyError("certificate header lacks instance or kind")
    deadlock = header.get("deadlock", "lose")
    if kind == "distributed":
        per_agent = {}
        for e in entries:
            if len(e) != 3:
                raise StrategyError("distributed entries need an agent, a key and an action")
            per_agent.setdefault(e[0], {})[e[1]] = e[2]
        horizon = int(header["horizon"]) if "horizon" in header else None
        s = DistributedStrategy(per_agent, header.get("method", "fig5"), deadlock, horizon)
    else:
        table = {}
        for e in entries:
            if len(e) != 2:
                raise StrategyError("controller entries need a key and an action")
            table[e[0]] = e[1]
        s = ControllerStrategy(kind, table, header.get("clock", "parity"), deadlock)
    return header["instance"], s

