import random

import pytest
from hypothesis import given, settings, strategies as st

from asglearn.asg import member, parse_asg
from asglearn.config import bundled
from asglearn.equivalence import equivalence_check
from asglearn.errors import Unsatisfiable
from asglearn.grammar import parse_grammar
from asglearn.learner import (SearchStats, TemplateConfig, coverage_gaps, covers, evidence,
                              generate_space, hypothesis_from, learn, to_ilasp)
from asglearn.oracle import ExampleSet
from oracles import audit_minimal, planted_task

with open(bundled("abc.cfg"), encoding="utf-8") as fh:
    ABC = parse_grammar(fh.read())
with open(bundled("anbncn.asg"), encoding="utf-8") as fh:
    L1 = parse_asg(fh.read())
SPACE = generate_space(ABC)


def test_space_over_three_lists():
    # 3 ordered equality pairs each way, plus 3 nonempty constraints
    fams = [(c.family, c.positions) for c in SPACE.candidates]
    assert fams == [("equal", (1, 2)), ("equal", (2, 1)), ("equal", (1, 3)), ("equal", (3, 1)),
                    ("equal", (2, 3)), ("equal", (3, 2)),
                    ("nonempty", (1,)), ("nonempty", (2,)), ("nonempty", (3,))]
    assert [c.cost for c in SPACE.candidates] == [2] * 6 + [1] * 3
    assert all(c.production == 0 for c in SPACE.candidates)


def test_inequality_family_size():
    space = generate_space(ABC, TemplateConfig(inequality=True))
    assert len(space.candidates) == 15
    assert {c.cost for c in space.candidates if c.family == "less"} == {3}


def test_scaffolding_measures_without_constraints():
    # scaffolding alone accepts the whole CFG language
    for w in ["", "aab", "abcc", "ccc"]:
        assert member(SPACE.scaffolding, w)
    assert str(SPACE.scaffolding.annotations[1][0]) == "size(X+1) :- size(X)@2."
    assert str(SPACE.scaffolding.annotations[2][0]) == "size(0)."


def test_minimal_hypothesis_for_small_example():
    # every negative has #a != #c, so one equality constraint already covers them
    ex = ExampleSet(("aabbcc", "abc"), ("aabc", "aabbc", "abcc"))
    h = learn(SPACE, ex)
    assert h.selected == (2,) and h.cost == 2
    assert covers(h, ex).passed
    gaps = {g.candidate: g.witness for g in coverage_gaps(h, ex)}
    assert gaps[0] == "b" and gaps[6] == ""
    assert not equivalence_check(h.asg, L1, 6)


def test_richer_negatives_recover_the_language():
    # "" forces a nonempty constraint, "abbc" an a/b equality
    ex = ExampleSet(("aabbcc", "abc"), ("aabc", "aabbc", "abcc", "abbc", ""))
    h = learn(SPACE, ex)
    assert h.selected == (0, 2, 6) and h.cost == 5
    assert coverage_gaps(h, ex) == []
    assert equivalence_check(h.asg, L1, 12).equivalent


def test_empty_negatives_give_empty_hypothesis():
    h = learn(SPACE, ExampleSet(("abc", "ab"), ()))
    assert h.selected == () and h.cost == 0


def test_unsatisfiable_reports_closest():
    # no template tells one balanced string from another
    with pytest.raises(Unsatisfiable) as err:
        learn(SPACE, ExampleSet(("abc",), ("aabbcc", "b")))
    assert err.value.total == 3 and err.value.covered == 2
    assert err.value.closest == (6,)  # cheapest subset rejecting "b"


def test_positive_outside_grammar():
    with pytest.raises(Unsatisfiable):
        learn(SPACE, ExampleSet(("cba",), ("a",)))


def test_candidates_contradicting_positives_are_excluded():
    stats = SearchStats()
    h = learn(SPACE, ExampleSet(("ab", "abc"), ("aabc",)), stats=stats)
    assert h.selected == (0,)
    # "ab" has no c: eq(1,3), eq(3,1), eq(2,3), eq(3,2) and nonempty@3 all fire on it
    assert stats.excluded == (2, 3, 4, 5, 8)


def test_evidence_signatures():
    ev = evidence(SPACE, "aab")
    # counts (2, 1, 0): every equality fires, and so does nonempty@3
    assert ev.signatures == (frozenset({0, 1, 2, 3, 4, 5, 8}),)
    assert not ev.truncated


def test_hypothesis_from_and_describe():
    h = hypothesis_from(SPACE, [2, 0])
    assert h.selected == (0, 2) and h.cost == 4
    assert h.describe()[0] == "[0] start -> as bs cs { :- size(X)@1, not size(X)@2. }"


def test_ilasp_export_lists_space_and_examples():
    text = to_ilasp(SPACE, ExampleSet(("abc",), ("ab",)))
    assert "2 ~ :- size(X)@1, not size(X)@2. @1" in text
    assert "1 ~ :- size(0)@3. @1" in text
    assert '+ "abc"' in text and '- "ab"' in text


def test_ambiguous_grammar_uses_any_tree():
    g = parse_grammar('start -> xs xs\nxs -> "x" xs |')
    space = generate_space(g)
    # x^3 splits four ways; only an even split satisfies equality, so x^3 is rejected
    h = learn(space, ExampleSet(("xx", "xxxx"), ("x", "xxx")))
    assert h.selected == (0,)
    assert member(h.asg, "xxxxxx") and not member(h.asg, "xxxxx")


def check_planted(seed):
    rng = random.Random(seed)
    task, space, planted, pos, neg = planted_task(rng)
    examples = ExampleSet(pos, neg)
    best = audit_minimal(task, space.candidates, examples.positives, examples.negatives)
    if best is None:
        with pytest.raises(Unsatisfiable):
            learn(space, examples)
        return
    h = learn(space, examples)
    assert (h.cost, h.selected) == best
    assert covers(h, examples).passed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_planted_tasks_are_solved_minimally(seed):
    check_planted(seed)
