"""Comparisons between the implementation and the oracles, shared by several test files."""
from __future__ import annotations

from asglearn.earley import chart_for, valid_next_tokens_from
from asglearn.grammar import END, Grammar, Vocabulary

from oracles import BoundedLanguage

BRUTE_BOUND = 12
# a chart-viable prefix with no completion within BRUTE_BOUND is re-checked here
ESCALATION_BOUND = 64


def prefix_mismatches(g: Grammar, vocab: Vocabulary, max_prefix: int = 8,
                      alphabet: str = "ab") -> list[tuple]:
    near, far = BoundedLanguage(g, BRUTE_BOUND), BoundedLanguage(g, ESCALATION_BOUND)

    def truly_viable(q: str, claimed: bool) -> bool:
        return near.viable(q) or (claimed and far.viable(q))

    bad, stack = [], [""]
    while stack:
        p = stack.pop()
        chart = chart_for(g, p)
        alive = chart.alive
        if alive != truly_viable(p, alive):
            bad.append((p, "viable", alive))
            continue
        if not alive:
            continue
        got = valid_next_tokens_from(chart, vocab)
        for t in vocab.entries:
            claimed = t in got
            expected = near.member(p) if t is END else truly_viable(p + t, claimed)
            if claimed != expected:
                bad.append((p, t, claimed))
        if len(p) < max_prefix:
            stack.extend(p + c for c in alphabet)
    return bad
