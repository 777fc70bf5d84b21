"""Incremental Earley recognition, prefix viability, next-token sets and forests.

Only productive productions are loaded into the chart, so every item that
survives a scan can still be completed; a prefix is viable exactly when its
chart column is nonempty.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import NonViablePrefix, NotInLanguage
from .grammar import END, EndMarker, Grammar, ParseTree, Vocabulary

Item = tuple[int, int, int]  # (production, dot, origin)

DEFAULT_FOREST_CAP = 64


class _Tables:
    """Grammar tables shared by every chart over the same grammar."""

    def __init__(self, g: Grammar):
        self.grammar = g
        productive = g.productive
        self.live = tuple(
            all(s.terminal or s.name in productive for s in p.body) for p in g.productions)
        self.heads = tuple(p.head for p in g.productions)
        self.bodies = tuple(p.body for p in g.productions)
        self.by_head = {
            n: tuple(i for i in g.by_head[n] if self.live[i]) for n in g.nonterminals}
        self.nullable = g.nullable
        self.start = g.start


@lru_cache(maxsize=64)
def tables(g: Grammar) -> _Tables:
    return _Tables(g)


@dataclass(frozen=True)
class Column:
    items: frozenset[Item]
    # items waiting on a nonterminal / terminal right after the dot
    waiting: dict[str, tuple[Item, ...]]
    scanning: dict[str, tuple[Item, ...]]
    # (head, origin) pairs completed at this column
    completed: frozenset[tuple[str, int]]


def _close(t: _Tables, seed: Iterable[Item], j: int, columns: list[Column]) -> Column:
    items: set[Item] = set()
    agenda = []
    for it in seed:
        if it not in items:
            items.add(it)
            agenda.append(it)
    waiting: dict[str, list[Item]] = {}
    scanning: dict[str, list[Item]] = {}
    completed: set[tuple[str, int]] = set()

    def add(it: Item):
        if it not in items:
            items.add(it)
            agenda.append(it)

    while agenda:
        prod, dot, origin = item = agenda.pop()
        body = t.bodies[prod]
        if dot == len(body):
            head = t.heads[prod]
            completed.add((head, origin))
            if origin == j:
                # same-column completion of a nullable head: covered by the
                # nullable advance in the predictor below
                continue
            for p2, d2, o2 in columns[origin].waiting.get(head, ()):
                add((p2, d2 + 1, o2))
            continue
        sym = body[dot]
        if sym.terminal:
            scanning.setdefault(sym.name, []).append(item)
            continue
        waiting.setdefault(sym.name, []).append(item)
        for p in t.by_head[sym.name]:
            add((p, 0, j))
        if sym.name in t.nullable:
            add((prod, dot + 1, origin))
    return Column(
        frozenset(items),
        {k: tuple(v) for k, v in waiting.items()},
        {k: tuple(v) for k, v in scanning.items()},
        frozenset(completed),
    )


class Chart:
    """Earley chart over a consumed prefix; immutable, extended by copying."""

    __slots__ = ("tables", "columns", "text")

    def __init__(self, tables_: _Tables, columns: tuple[Column, ...], text: str):
        self.tables = tables_
        self.columns = columns
        self.text = text

    @classmethod
    def initial(cls, g: Grammar) -> Chart:
        t = tables(g)
        col = _close(t, [(p, 0, 0) for p in t.by_head[t.start]], 0, [])
        return cls(t, (col,), "")

    @property
    def alive(self) -> bool:
        return bool(self.columns[-1].items)

    def accepts(self) -> bool:
        return (self.tables.start, 0) in self.columns[-1].completed

    def feed(self, ch: str) -> Chart:
        last = self.columns[-1]
        seed = [(p, d + 1, o) for p, d, o in last.scanning.get(ch, ())]
        j = len(self.columns)
        col = _close(self.tables, seed, j, list(self.columns))
        return Chart(self.tables, self.columns + (col,), self.text + ch)

    def feed_text(self, text: str) -> Chart:
        chart = self
        for ch in text:
            chart = chart.feed(ch)
            if not chart.alive:
                break
        return chart

    def done(self) -> set[tuple[str, int, int]]:
        return {(h, o, j) for j, col in enumerate(self.columns) for h, o in col.completed}


def chart_for(g: Grammar, text: str) -> Chart:
    return Chart.initial(g).feed_text(text)


def recognize(g: Grammar, w: str) -> bool:
    if any(ch not in g.terminals for ch in w):
        return False
    chart = chart_for(g, w)
    return len(chart.columns) == len(w) + 1 and chart.accepts()


def viable_prefix(g: Grammar, p: str) -> bool:
    if any(ch not in g.terminals for ch in p):
        return False
    chart = chart_for(g, p)
    return len(chart.columns) == len(p) + 1 and chart.alive


def _extends(chart: Chart, text: str) -> bool:
    for ch in text:
        chart = chart.feed(ch)
        if not chart.alive:
            return False
    return True


def valid_next_tokens_from(chart: Chart, v: Vocabulary) -> set[str | EndMarker]:
    result: set[str | EndMarker] = {t for t in v.tokens if _extends(chart, t)}
    if chart.accepts():
        result.add(END)
    return result


def valid_next_tokens(g: Grammar, p: str, v: Vocabulary) -> set[str | EndMarker]:
    if not viable_prefix(g, p):
        raise NonViablePrefix(f"prefix {p!r} cannot be extended to a sentence")
    return valid_next_tokens_from(chart_for(g, p), v)


class CFGMask:
    """Decoder-side mask function ``prefix -> allowed entries`` with chart reuse."""

    def __init__(self, g: Grammar, vocab: Vocabulary):
        self.grammar = g
        self.vocab = vocab
        self._charts: dict[str, Chart] = {"": Chart.initial(g)}

    def _chart(self, text: str) -> Chart:
        chart = self._charts.get(text)
        if chart is None:
            chart = self._chart(text[:-1]).feed(text[-1])
            if len(self._charts) > 4096:
                self._charts = {"": self._charts[""]}
            self._charts[text] = chart
        return chart

    def __call__(self, prefix: str) -> set[str | EndMarker]:
        chart = self._chart(prefix)
        if not chart.alive:
            raise NonViablePrefix(f"prefix {prefix!r} cannot be extended to a sentence")
        return valid_next_tokens_from(chart, self.vocab)


# --------------------------------------------------------------------------
# Parse forests

class Forest(list):
    """List of parse trees; ``truncated`` is set when the cap cut enumeration short."""

    truncated: bool = False


def iter_trees(g: Grammar, w: str) -> Iterator[ParseTree]:
    """Every cycle-free parse tree of ``w``.

    Order is deterministic: by production index, then by split points left to
    right, then by the children's own order.
    """
    chart = chart_for(g, w)
    if len(chart.columns) != len(w) + 1 or not chart.accepts():
        return
    t = chart.tables
    done = chart.done()

    @lru_cache(maxsize=None)
    def rest_derives(prod: int, m: int, i: int, j: int) -> bool:
        body = t.bodies[prod]
        if m == len(body):
            return i == j
        sym = body[m]
        if sym.terminal:
            return i < j and w[i] == sym.name and rest_derives(prod, m + 1, i + 1, j)
        return any((sym.name, i, k) in done and rest_derives(prod, m + 1, k, j)
                   for k in range(i, j + 1))

    def trees(head: str, i: int, j: int, stack: frozenset) -> Iterator[ParseTree]:
        key = (head, i, j)
        if key in stack:
            return
        stack = stack | {key}
        for prod in t.by_head[head]:
            if rest_derives(prod, 0, i, j):
                for kids in seq(prod, 0, i, j, stack):
                    yield ParseTree(prod, kids)

    def seq(prod: int, m: int, i: int, j: int, stack: frozenset) -> Iterator[tuple]:
        body = t.bodies[prod]
        if m == len(body):
            yield ()
            return
        sym = body[m]
        if sym.terminal:
            for rest in seq(prod, m + 1, i + 1, j, stack):
                yield (sym.name,) + rest
            return
        for k in range(i, j + 1):
            if (sym.name, i, k) in done and rest_derives(prod, m + 1, k, j):
                for child in trees(sym.name, i, k, stack):
                    for rest in seq(prod, m + 1, k, j, stack):
                        yield (child,) + rest

    yield from trees(t.start, 0, len(w), frozenset())


def parse_forest(g: Grammar, w: str, cap: int = DEFAULT_FOREST_CAP) -> Forest:
    if not recognize(g, w):
        raise NotInLanguage(f"{w!r} is not in the language of the grammar")
    forest = Forest()
    for tree in iter_trees(g, w):
        if len(forest) == cap:
            forest.truncated = True
            break
        forest.append(tree)
    return forest
