"""Epistemic formulas: AST, concrete syntax, and syntactic utilities.

Concrete syntax::

    true  false  p  !f  f & g  f | g  f -> g  K[a] f  M[a] f  ( f )

``!``, ``K[a]`` and ``M[a]`` bind tightest, then ``&``, ``|``, ``->``.
``&`` and ``|`` associate to the left, ``->`` to the right.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator

from .errors import FormulaSyntaxError, UnknownAgentError


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Knows(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True, slots=True)
class Poss(Formula):
    """Dual of :class:`Knows`: the agent considers ``sub`` possible."""

    agent: str
    sub: Formula


TRUE = Top()
FALSE = Bot()

_BINARY = (And, Or, Implies)
_MODAL = (Knows, Poss)


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    return reduce(And, parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    return reduce(Or, parts)


def children(f: Formula) -> tuple:
    if isinstance(f, (Not, Knows, Poss)):
        return (f.sub,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


def modal_depth(f: Formula) -> int:
    if isinstance(f, _MODAL):
        return 1 + modal_depth(f.sub)
    return max((modal_depth(c) for c in children(f)), default=0)


def is_propositional(f: Formula) -> bool:
    return not any(isinstance(g, _MODAL) for g in subformulas(f))


def atoms_of(f: Formula) -> frozenset:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def agents_of(f: Formula) -> frozenset:
    return frozenset(g.agent for g in subformulas(f) if isinstance(g, _MODAL))


def eval_prop(f: Formula, valuation) -> bool:
    """Evaluate a modality-free formula under a set of true atoms."""
    if isinstance(f, Atom):
        return f.name in valuation
    if isinstance(f, Not):
        return not eval_prop(f.sub, valuation)
    if isinstance(f, And):
        return eval_prop(f.left, valuation) and eval_prop(f.right, valuation)
    if isinstance(f, Or):
        return eval_prop(f.left, valuation) or eval_prop(f.right, valuation)
    if isinstance(f, Implies):
        return (not eval_prop(f.left, valuation)) or eval_prop(f.right, valuation)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    raise ValueError(f"not a propositional formula: {to_text(f)}")


def desugar(f: Formula) -> Formula:
    """Rewrite into the core grammar: atoms, negation, disjunction, knowledge."""
    if isinstance(f, (Atom, Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.sub))
    if isinstance(f, Or):
        return Or(desugar(f.left), desugar(f.right))
    if isinstance(f, And):
        return Not(Or(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Implies):
        return Or(Not(desugar(f.left)), desugar(f.right))
    if isinstance(f, Knows):
        return Knows(f.agent, desugar(f.sub))
    if isinstance(f, Poss):
        return Not(Knows(f.agent, Not(desugar(f.sub))))
    raise TypeError(f)


def substitute(f: Formula, mapping) -> Formula:
    """Replace atoms by formulas (atoms missing from ``mapping`` are kept)."""
    if isinstance(f, Atom):
        return mapping.get(f.name, f)
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.sub, mapping))
    if isinstance(f, _BINARY):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    return type(f)(f.agent, substitute(f.sub, mapping))


# --------------------------------------------------------------------------
# printing

# binding strength; higher binds tighter
_PREC = {Implies: 1, Or: 2, And: 3}
_UNARY_PREC = 4
_SYMBOL = {And: "&", Or: "|", Implies: "->"}


def _prec(f):
    return _PREC.get(type(f), _UNARY_PREC + 1)


def to_text(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, (Not, Knows, Poss)):
        if isinstance(f, Not):
            head = "!"
        else:
            head = ("K" if isinstance(f, Knows) else "M") + f"[{f.agent}] "
        inner = to_text(f.sub)
        if _prec(f.sub) < _UNARY_PREC:
            inner = f"({inner})"
        return head + inner
    p = _PREC[type(f)]
    left, right = to_text(f.left), to_text(f.right)
    if type(f) is Implies:
        # right associative
        if _prec(f.left) <= p:
            left = f"({left})"
        if _prec(f.right) < p:
            right = f"({right})"
    else:
        if _prec(f.left) < p:
            left = f"({left})"
        if _prec(f.right) <= p:
            right = f"({right})"
    return f"{left} {_SYMBOL[type(f)]} {right}"


# --------------------------------------------------------------------------
# lexing / parsing

IDENT = r"[A-Za-z0-9_@']+"
_TOKEN_RE = re.compile(
    rf"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    rf"|(?P<arrow>->)|(?P<assign>:=)|(?P<ident>{IDENT})"
    r"|(?P<sym>[!&|()\[\]{};,])"
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "ident", "sym", "eof"
    text: str
    line: int
    column: int


def tokenize(text: str, source=None) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "sym", "arrow", "assign"):
            k = "ident" if kind == "ident" else "sym"
            tokens.append(Token(k, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens, source=None):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    def peek(self, offset=0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.text == text

    def error(self, message, tok=None, cls=FormulaSyntaxError):
        tok = tok or self.peek()
        return cls(message, tok.line, tok.column, self.source)

    def expect(self, text) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.next()

    def ident(self, what="identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {what}, found {found}")
        return self.next()


class _FormulaParser:
    def __init__(self, stream: TokenStream, agents=None):
        self.s = stream
        self.agents = None if agents is None else frozenset(agents)

    def parse(self) -> Formula:
        return self.implication()

    def implication(self):
        left = self.disjunction()
        if self.s.at("->"):
            self.s.next()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.s.at("|"):
            self.s.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.s.at("&"):
            self.s.next()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.s.peek()
        if self.s.at("!"):
            self.s.next()
            return Not(self.unary())
        if tok.kind == "ident" and tok.text in ("K", "M") and self.s.peek(1).text == "[":
            self.s.next()
            self.s.next()
            agent_tok = self.s.ident("agent name")
            if self.agents is not None and agent_tok.text not in self.agents:
                raise self.s.error(
                    f"unknown agent {agent_tok.text!r}", agent_tok, UnknownAgentError
                )
            self.s.expect("]")
            cls = Knows if tok.text == "K" else Poss
            return cls(agent_tok.text, self.unary())
        if self.s.at("("):
            self.s.next()
            f = self.parse()
            self.s.expect(")")
            return f
        if tok.kind == "ident":
            self.s.next()
            if tok.text == "true":
                return TRUE
            if tok.text == "false":
                return FALSE
            return Atom(tok.text)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.s.error(f"expected a formula, found {found}")


def parse_formula_tokens(stream: TokenStream, agents=None) -> Formula:
    return _FormulaParser(stream, agents).parse()


def parse_formula(text: str, agents=None, source=None) -> Formula:
    """Parse ``text`` into a :class:`Formula`.

    If ``agents`` is given, modalities over undeclared agents raise
    :class:`UnknownAgentError`.
    """
    stream = TokenStream(tokenize(text, source), source)
    f = parse_formula_tokens(stream, agents)
    tok = stream.peek()
    if tok.kind != "eof":
        raise stream.error(f"unexpected {tok.text!r} after formula")
    return f
