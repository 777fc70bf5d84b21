"""Bounded-length language comparison between annotated grammars."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .asg import AnnotatedGrammar
from .asg_mask import ASGMask
from .earley import Chart
from .grammar import Vocabulary


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexamples: tuple[str, ...]
    checked: int
    lmax: int

    def __bool__(self) -> bool:
        return self.equivalent


def viable_strings(grammars, lmax: int) -> Iterator[str]:
    """Strings up to ``lmax`` that are a viable prefix under some grammar, DFS order."""
    alphabet = sorted(set().union(*(g.terminals for g in grammars)))

    def walk(text: str, charts: tuple):
        yield text
        if len(text) == lmax:
            return
        for ch in alphabet:
            nxt = tuple(c.feed(ch) if c.alive else c for c in charts)
            if any(c.alive and len(c.columns) == len(text) + 2 for c in nxt):
                yield from walk(text + ch, nxt)

    yield from walk("", tuple(Chart.initial(g) for g in grammars))


def equivalence_check(a: AnnotatedGrammar, b: AnnotatedGrammar, lmax: int = 12,
                      limit: int = 10) -> EquivalenceResult:
    """Compare memberships on every string of length <= ``lmax``.

    Strings that are not viable prefixes of either CFG are skipped (neither
    ASG can accept them). Counterexamples come shortest first.
    """
    ma = ASGMask(a, Vocabulary(()))
    mb = ASGMask(b, Vocabulary(()))
    found, checked = [], 0
    for w in viable_strings((a.grammar, b.grammar), lmax):
        checked += 1
        if ma.member(w) != mb.member(w):
            found.append(w)
    found.sort(key=lambda w: (len(w), w))
    return EquivalenceResult(not found, tuple(found[:limit]), checked, lmax)
