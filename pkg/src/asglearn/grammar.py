"""Context-free grammar representation and the grammar file reader.

Grammar files hold one production per ``head -> body`` line, terminals are
quoted single characters, ``|`` separates alternatives and an empty body is
epsilon::

    start -> as bs cs
    as -> "a" as |
    # comment

Annotated grammars (see :mod:`asglearn.asg`) use the same syntax with a
``{ ... }`` block after an alternative; :func:`read_source` returns those
blocks so both readers share one lexer.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

from .errors import EmptyGrammar, GrammarSyntaxError, UndefinedNonterminal


class Symbol(NamedTuple):
    name: str
    terminal: bool

    def __str__(self) -> str:
        return f'"{self.name}"' if self.terminal else self.name


class Production(NamedTuple):
    head: str
    body: tuple[Symbol, ...]

    def __str__(self) -> str:
        return f"{self.head} -> {' '.join(map(str, self.body))}".rstrip()


@dataclass(frozen=True)
class Grammar:
    """CFG ``<N, T, P, S>``; production ``i`` is ``productions[i]``."""

    nonterminals: frozenset[str]
    terminals: frozenset[str]
    productions: tuple[Production, ...]
    start: str
    by_head: dict[str, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.start not in self.nonterminals:
            raise UndefinedNonterminal(f"start symbol {self.start!r} has no productions")
        if self.nonterminals & self.terminals:
            raise GrammarSyntaxError("nonterminals and terminals overlap")
        index: dict[str, list[int]] = {n: [] for n in self.nonterminals}
        for i, prod in enumerate(self.productions):
            if prod.head not in self.nonterminals:
                raise UndefinedNonterminal(f"undefined nonterminal {prod.head!r}")
            for sym in prod.body:
                pool = self.terminals if sym.terminal else self.nonterminals
                if sym.name not in pool:
                    raise UndefinedNonterminal(f"undefined symbol {sym}")
                if sym.terminal and len(sym.name) != 1:
                    raise GrammarSyntaxError(f"terminal {sym} is not a single character")
        for i, prod in enumerate(self.productions):
            index[prod.head].append(i)
        object.__setattr__(self, "by_head", {k: tuple(v) for k, v in index.items()})

    @classmethod
    def from_productions(cls, productions: Sequence[tuple[str, Sequence[Symbol]]],
                         start: str | None = None) -> Grammar:
        prods = tuple(Production(h, tuple(Symbol(*s) for s in b)) for h, b in productions)
        if not prods:
            raise EmptyGrammar("grammar has no productions")
        heads = frozenset(p.head for p in prods)
        terms = frozenset(s.name for p in prods for s in p.body if s.terminal)
        return cls(heads, terms, prods, start if start is not None else prods[0].head)

    @property
    def alphabet(self) -> str:
        return "".join(sorted(self.terminals))

    def to_text(self) -> str:
        lines = []
        for head, run in head_runs(self):
            alts = [" ".join(map(str, self.productions[i].body)) for i in run]
            lines.append(f"{head} -> " + " | ".join(alts))
        return "\n".join(line.rstrip() for line in lines) + "\n"

    @cached_property
    def nullable(self) -> frozenset[str]:
        return _nullable(self)

    @cached_property
    def productive(self) -> frozenset[str]:
        return _productive(self)


def head_runs(g: Grammar) -> list[tuple[str, list[int]]]:
    """Maximal runs of consecutive productions sharing a head.

    Writing one line per run keeps production indices stable on re-reading.
    """
    runs: list[tuple[str, list[int]]] = []
    for i, prod in enumerate(g.productions):
        if runs and runs[-1][0] == prod.head:
            runs[-1][1].append(i)
        else:
            runs.append((prod.head, [i]))
    return runs


def _nullable(g: Grammar) -> frozenset[str]:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for prod in g.productions:
            if prod.head not in nullable and all(
                    not s.terminal and s.name in nullable for s in prod.body):
                nullable.add(prod.head)
                changed = True
    return frozenset(nullable)


def _productive(g: Grammar) -> frozenset[str]:
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for prod in g.productions:
            if prod.head not in productive and all(
                    s.terminal or s.name in productive for s in prod.body):
                productive.add(prod.head)
                changed = True
    return frozenset(productive)


@dataclass(frozen=True)
class ParseTree:
    """Derivation node: ``node`` is a production index, children follow its body."""

    node: int
    children: tuple[ParseTree | str, ...]

    def yield_(self) -> str:
        return "".join(c if isinstance(c, str) else c.yield_() for c in self.children)

    def productions(self) -> Iterator[int]:
        """Production indices in preorder (the leftmost derivation)."""
        yield self.node
        for c in self.children:
            if isinstance(c, ParseTree):
                yield from c.productions()

    def pretty(self, g: Grammar, indent: int = 0) -> str:
        pad = "  " * indent
        out = [f"{pad}{g.productions[self.node]}"]
        for c in self.children:
            out.append(f'{pad}  "{c}"' if isinstance(c, str) else c.pretty(g, indent + 1))
        return "\n".join(out)


# --------------------------------------------------------------------------
# Lexing and reading

class Lexeme(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->|::=|→|⟶)
  | (?P<pipe>\|)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<lbrace>\{)
  | (?P<semi>;)
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def _unquote(raw: str, line: int, col: int) -> str:
    out, i = [], 1
    while i < len(raw) - 1:
        ch = raw[i]
        if ch == "\\":
            nxt = raw[i + 1]
            if nxt not in _ESCAPES:
                raise GrammarSyntaxError(f"unknown escape \\{nxt}", line, col + i)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def lex(text: str) -> list[Lexeme]:
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        line, col = _position(text, pos)
        if kind == "lbrace":
            end = text.find("}", m.end())
            if end < 0:
                raise GrammarSyntaxError("unterminated annotation block", line, col)
            # column/line of the block body so annotation errors can point inside it
            out.append(Lexeme("block", text[m.end():end], line, col + 1))
            pos = end + 1
            continue
        if kind == "string":
            out.append(Lexeme("string", _unquote(m.group(), line, col), line, col))
        elif kind not in ("ws", "comment", "semi"):
            out.append(Lexeme(kind, m.group(), line, col))
        pos = m.end()
    return out


class Alternative(NamedTuple):
    head: str
    body: tuple[Symbol, ...]
    block: Lexeme | None
    line: int
    column: int


def read_source(text: str) -> list[Alternative]:
    """Split grammar text into alternatives in source order, keeping raw blocks."""
    toks = lex(text)
    alts: list[Alternative] = []
    i = 0
    while i < len(toks):
        head = toks[i]
        if head.kind != "ident" or i + 1 >= len(toks) or toks[i + 1].kind != "arrow":
            raise GrammarSyntaxError(f"expected 'head ->', found {head.value!r}",
                                     head.line, head.column)
        i += 2
        while True:
            body: list[Symbol] = []
            block = None
            start_tok = toks[i] if i < len(toks) else head
            while i < len(toks):
                t = toks[i]
                if t.kind == "ident" and i + 1 < len(toks) and toks[i + 1].kind == "arrow":
                    break
                if t.kind == "ident":
                    body.append(Symbol(t.value, False))
                elif t.kind == "string":
                    if len(t.value) != 1:
                        raise GrammarSyntaxError(
                            f"terminal {t.value!r} must be exactly one character",
                            t.line, t.column)
                    body.append(Symbol(t.value, True))
                elif t.kind == "block":
                    block = t
                    i += 1
                    break
                elif t.kind in ("pipe", "arrow"):
                    if t.kind == "arrow":
                        raise GrammarSyntaxError("unexpected '->'", t.line, t.column)
                    break
                i += 1
            alts.append(Alternative(head.value, tuple(body), block,
                                    start_tok.line, start_tok.column))
            if i < len(toks) and toks[i].kind == "pipe":
                i += 1
                continue
            break
    return alts


def build_grammar(alts: Sequence[Alternative]) -> Grammar:
    if not alts:
        raise EmptyGrammar("grammar has no productions")
    heads = {a.head for a in alts}
    for a in alts:
        for s in a.body:
            if not s.terminal and s.name not in heads:
                raise UndefinedNonterminal(f"undefined nonterminal {s.name!r}",
                                           a.line, a.column)
    return Grammar.from_productions([(a.head, a.body) for a in alts])


def parse_grammar(text: str) -> Grammar:
    alts = read_source(text)
    for a in alts:
        if a.block is not None:
            raise GrammarSyntaxError("annotation block in a plain grammar (use parse_asg)",
                                     a.block.line, a.block.column)
    return build_grammar(alts)


# --------------------------------------------------------------------------
# Decoder vocabulary

class EndMarker:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "<end>"

    def __reduce__(self):
        return (EndMarker, ())


END = EndMarker()


@dataclass(frozen=True)
class Vocabulary:
    """Ordered decoder tokens; entry ``len(tokens)`` is the end marker."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate token texts in vocabulary")
        if any(not isinstance(t, str) or not t for t in self.tokens):
            raise ValueError("tokens must be nonempty strings")

    @classmethod
    def characters(cls, alphabet: str) -> Vocabulary:
        return cls(tuple(alphabet))

    @property
    def entries(self) -> tuple[str | EndMarker, ...]:
        return self.tokens + (END,)

    def index(self, entry: str | EndMarker) -> int:
        return len(self.tokens) if entry is END else self.tokens.index(entry)

    def __len__(self) -> int:
        return len(self.tokens) + 1

    def check_alphabet(self, g: Grammar):
        bad = [t for t in self.tokens if any(ch not in g.terminals for ch in t)]
        if bad:
            raise ValueError(f"tokens outside the grammar alphabet: {bad}")

    @property
    def vocabulary_id(self) -> str:
        return "|".join(self.tokens)
