"""Next-token masking under an annotated grammar.

A token ``t`` is allowed after prefix ``p`` when some string ``s`` with
``|s| <= budget`` makes ``p + t + s`` an ASG member. Rather than enumerating
candidate completions, the chart is run over ``p + t`` followed by wildcard
positions that match any terminal. Items carry the atom sets of their
completed children, so two partial derivations that agree on
(production, dot, origin, child models) are merged; that merge is the
memoization of completion search. Terminals contribute no atoms, so a
completed derivation over wildcards stands for a concrete completion.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .asg import AnnotatedGrammar, GroundAtom, NodeModel, constraint_fires, evaluate_node
from .earley import tables
from .errors import AmbiguityCapExceeded, DeadEnd
from .grammar import END, EndMarker, Vocabulary

DEFAULT_BUDGET = 16
MAX_COLUMN_ITEMS = 50_000
MAX_EPSILON_MODELS = 1_000

Vals = tuple[frozenset[GroundAtom], ...]
SItem = tuple[int, int, int, Vals]  # production, dot, origin, child atom sets
WILDCARD = None

_NO_ATOMS: frozenset[GroundAtom] = frozenset()


@dataclass(frozen=True)
class SColumn:
    items: frozenset[SItem]
    waiting: dict[str, tuple[SItem, ...]]
    scanning: dict[str, tuple[SItem, ...]]
    # start symbol completed from origin 0 without violation
    accepts: bool


class SemanticTables:
    """Per-grammar evaluation caches.  Results are pure functions of their keys."""

    def __init__(self, asg: AnnotatedGrammar):
        self.asg = asg
        self.t = tables(asg.grammar)
        self._node: dict[tuple[int, Vals], NodeModel] = {}
        self._early: dict[tuple[int, int], tuple] = {}
        self.epsilon = self._epsilon_models()

    def node(self, prod: int, vals: Vals) -> NodeModel:
        key = (prod, vals)
        model = self._node.get(key)
        if model is None:
            model = evaluate_node(self.asg.annotations[prod], vals)
            self._node[key] = model
        return model

    def early_constraints(self, prod: int, dot: int) -> tuple:
        """Child-scoped constraints whose last referenced child is ``dot``."""
        key = (prod, dot)
        found = self._early.get(key)
        if found is None:
            found = tuple(
                r for r in self.asg.annotations[prod]
                if r.kind == "constraint" and r.is_child_scoped() and r.children()
                and max(r.children()) == dot)
            self._early[key] = found
        return found

    def _epsilon_models(self) -> dict[str, set[frozenset[GroundAtom]]]:
        """Atom sets of non-violated empty derivations, per nonterminal."""
        t = self.t
        eps: dict[str, set[frozenset[GroundAtom]]] = {n: set() for n in t.nullable}
        changed = True
        while changed:
            changed = False
            for prod, body in enumerate(t.bodies):
                head = t.heads[prod]
                if not t.live[prod] or head not in eps:
                    continue
                if any(s.terminal or s.name not in eps for s in body):
                    continue
                for vals in product(*(sorted(eps[s.name], key=sorted) for s in body)):
                    model = self.node(prod, tuple(vals))
                    if not model.violated and model.atoms not in eps[head]:
                        eps[head].add(model.atoms)
                        changed = True
                        if len(eps[head]) > MAX_EPSILON_MODELS:
                            raise AmbiguityCapExceeded(
                                f"unbounded empty derivations for {head!r}")
        return eps


def _early_ok(st: SemanticTables, prod: int, dot: int, vals: Vals) -> bool:
    for rule in st.early_constraints(prod, dot):
        if constraint_fires(rule, _NO_ATOMS, vals):
            return False
    return True


def _close(st: SemanticTables, seed: Iterable[SItem], j: int,
           columns: list[SColumn]) -> SColumn:
    t = st.t
    items: set[SItem] = set()
    agenda: list[SItem] = []
    waiting: dict[str, list[SItem]] = {}
    scanning: dict[str, list[SItem]] = {}
    accepts = False

    def add(it: SItem):
        if it not in items:
            if not _early_ok(st, it[0], it[1], it[3]):
                return
            items.add(it)
            agenda.append(it)
            if len(items) > MAX_COLUMN_ITEMS:
                raise AmbiguityCapExceeded(f"chart column {j} exceeds {MAX_COLUMN_ITEMS} items")

    for it in seed:
        add(it)
    while agenda:
        prod, dot, origin, vals = item = agenda.pop()
        body = t.bodies[prod]
        if dot == len(body):
            model = st.node(prod, vals)
            if model.violated:
                continue
            head = t.heads[prod]
            if head == t.start and origin == 0:
                accepts = True
            if origin == j:
                # empty derivation: its model is in st.epsilon, which the
                # predictor already used to advance waiting items
                continue
            for p2, d2, o2, v2 in columns[origin].waiting.get(head, ()):
                add((p2, d2 + 1, o2, v2 + (model.atoms,)))
            continue
        sym = body[dot]
        if sym.terminal:
            scanning.setdefault(sym.name, []).append(item)
            continue
        waiting.setdefault(sym.name, []).append(item)
        for p in t.by_head[sym.name]:
            add((p, 0, j, ()))
        for atoms in st.epsilon.get(sym.name, ()):
            add((prod, dot + 1, origin, vals + (atoms,)))
    return SColumn(
        frozenset(items),
        {k: tuple(v) for k, v in waiting.items()},
        {k: tuple(v) for k, v in scanning.items()},
        accepts,
    )


class SemanticChart:
    """Chart over a sequence of concrete characters and wildcards."""

    __slots__ = ("st", "columns")

    def __init__(self, st: SemanticTables, columns: tuple[SColumn, ...]):
        self.st = st
        self.columns = columns

    @classmethod
    def initial(cls, st: SemanticTables) -> SemanticChart:
        t = st.t
        col = _close(st, [(p, 0, 0, ()) for p in t.by_head[t.start]], 0, [])
        return cls(st, (col,))

    @property
    def alive(self) -> bool:
        return bool(self.columns[-1].items)

    def accepts(self) -> bool:
        return self.columns[-1].accepts

    def feed(self, ch: str | None) -> SemanticChart:
        """Consume ``ch``, or any terminal when ``ch`` is None."""
        last = self.columns[-1]
        if ch is WILDCARD:
            pending = [it for its in last.scanning.values() for it in its]
        else:
            pending = list(last.scanning.get(ch, ()))
        seed = [(p, d + 1, o, v + (_NO_ATOMS,)) for p, d, o, v in pending]
        col = _close(self.st, seed, len(self.columns), list(self.columns))
        return SemanticChart(self.st, self.columns + (col,))

    def completable(self, budget: int) -> bool:
        """Some completion of at most ``budget`` characters reaches a member."""
        chart = self
        for _ in range(budget + 1):
            if chart.accepts():
                return True
            if not chart.alive:
                return False
            chart = chart.feed(WILDCARD)
        return False


class ASGMask:
    """Mask function for constrained decoding; caches charts per prefix.

    ``budget`` bounds the completion length; ``length_limit``, when set,
    additionally bounds the total string length so every allowed path can
    still terminate before it is reached.
    """

    def __init__(self, asg: AnnotatedGrammar, vocab: Vocabulary,
                 budget: int = DEFAULT_BUDGET, length_limit: int | None = None):
        self.asg = asg
        self.vocab = vocab
        self.budget = budget
        self.length_limit = length_limit
        self.st = SemanticTables(asg)
        self._charts: dict[str, SemanticChart] = {"": SemanticChart.initial(self.st)}

    def chart(self, text: str) -> SemanticChart:
        chart = self._charts.get(text)
        if chart is None:
            prev = self.chart(text[:-1])
            chart = prev.feed(text[-1]) if prev.alive else prev
            if len(self._charts) > 4096:
                self._charts = {"": self._charts[""]}
            self._charts[text] = chart
        return chart

    def member(self, w: str) -> bool:
        chart = self.chart(w)
        return len(chart.columns) == len(w) + 1 and chart.accepts()

    def allowed(self, prefix: str) -> set[str | EndMarker]:
        result: set[str | EndMarker] = set()
        for tok in self.vocab.tokens:
            budget = self.budget
            if self.length_limit is not None:
                budget = min(budget, self.length_limit - len(prefix) - len(tok))
                if budget < 0:
                    continue
            chart = self.chart(prefix + tok)
            if len(chart.columns) == len(prefix) + len(tok) + 1 and chart.completable(budget):
                result.add(tok)
        if self.member(prefix):
            result.add(END)
        return result

    def __call__(self, prefix: str) -> set[str | EndMarker]:
        result = self.allowed(prefix)
        if not result:
            raise DeadEnd(f"no token keeps {prefix!r} completable within budget {self.budget}")
        return result


def asg_valid_next_tokens(asg: AnnotatedGrammar, p: str, v: Vocabulary,
                          budget: int = DEFAULT_BUDGET) -> set[str | EndMarker]:
    return ASGMask(asg, v, budget)(p)


def chart_member(asg: AnnotatedGrammar, w: str) -> bool:
    """ASG membership through the semantic chart (no forest enumeration)."""
    return ASGMask(asg, Vocabulary(())).member(w)
