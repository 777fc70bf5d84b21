import itertools

import pytest
from hypothesis import given, settings, strategies as st

from asglearn.asg import (AnnotatedGrammar, evaluate_node, evaluate_tree, member, parse_asg,
                          parse_rules)
from asglearn.config import bundled
from asglearn.earley import parse_forest
from asglearn.errors import AmbiguityCapExceeded, AnnotationError, EvaluationError
from oracles import in_anbncm, in_anbncn


def load(name):
    with open(bundled(name), encoding="utf-8") as fh:
        return parse_asg(fh.read())


ZERO_OK = load("anbncn0.asg")
L1 = load("anbncn.asg")
L2 = load("anbncm.asg")


def only_tree(asg, w):
    (tree,) = parse_forest(asg.grammar, w)
    return tree


@pytest.mark.parametrize("w", ["abc", "aabbcc"])
def test_counting_rules_accept_balanced(w):  # [PAPER]
    assert not evaluate_tree(ZERO_OK, only_tree(ZERO_OK, w)).violated


@pytest.mark.parametrize("w", ["aabc", "aabbc", "abcc"])
def test_counting_rules_reject_unbalanced(w):  # [PAPER]
    assert evaluate_tree(ZERO_OK, only_tree(ZERO_OK, w)).violated


def test_counting_rules_measure_lists():
    tree = only_tree(ZERO_OK, "aabbcc")
    bs = tree.children[1]
    assert evaluate_tree(ZERO_OK, bs).atoms == {("size", (2,))}


def test_counting_rules_accept_empty_string():
    # zero of each letter is balanced; the n >= 1 variant adds a constraint
    assert member(ZERO_OK, "")
    assert not member(L1, "")


def all_words(alphabet, n):
    for k in range(n + 1):
        for t in itertools.product(alphabet, repeat=k):
            yield "".join(t)


def test_member_matches_counting_predicates():  # [DERIVED] block counts
    for w in all_words("abc", 7):
        assert member(ZERO_OK, w) == in_anbncn(w, n_min=0), w
        assert member(L1, w) == in_anbncn(w), w
        assert member(L2, w) == in_anbncm(w), w


def test_member_is_existential_over_trees():
    asg = parse_asg("""
    s -> s s { inner. :- inner@2. } | "a"
    """)
    # only left-branching trees survive, and a^n has exactly one
    assert all(member(asg, "a" * n) for n in range(1, 7))
    strict = parse_asg('s -> s s { inner. :- inner@1. :- inner@2. } | "a"')
    assert [member(strict, "a" * n) for n in range(1, 5)] == [True, True, False, False]


def test_member_cap():
    asg = parse_asg('s -> s s { :- leaf@1. } | "a" { leaf. }')
    assert member(asg, "a")
    with pytest.raises(AmbiguityCapExceeded):
        member(asg, "a" * 8, cap=5)


def test_comparisons_and_affine_heads():
    asg = parse_asg("""
    start -> xs ys { :- len(X)@1, len(Y)@2, X >= Y. }
    xs -> "x" xs { len(N+1) :- len(N)@2. } | { len(0). }
    ys -> "y" ys { len(N+1) :- len(N)@2. } | { len(0). }
    """)
    for i, j in itertools.product(range(4), repeat=2):
        assert member(asg, "x" * i + "y" * j) == (i < j)


def test_child_negation_in_rules():
    asg = parse_asg("""
    start -> opt { :- not some@1. }
    opt -> "a" { some. } | { none. }
    """)
    assert member(asg, "a") and not member(asg, "")


def test_local_negation_only_in_constraints():
    rules = parse_rules(":- p, not q.", arity=0)
    assert rules[0].kind == "constraint"
    with pytest.raises(AnnotationError):
        parse_rules("p :- q, not r.", arity=0)


@pytest.mark.parametrize("text", [
    "p(X) :- q.",            # unsafe head variable
    ":- not q(X)@1.",        # unsafe negated variable
    ":- p(X)@3.",            # child out of range
    "p@1.",                  # child on a head
    ":- p(X)@1, X < Y.",     # unsafe comparison
])
def test_malformed_rules(text):
    with pytest.raises(AnnotationError):
        parse_rules(text, arity=2)


def test_syntax_error_has_position():
    with pytest.raises(AnnotationError) as err:
        parse_asg('s -> "a" {\n  p(.\n}')
    assert err.value.line == 2


def test_predicate_arity_must_be_consistent():
    with pytest.raises(AnnotationError):
        parse_asg('s -> t { p(1). } \nt -> "a" { p(1, 2). }')


def test_runaway_recursion_is_an_error():
    with pytest.raises(EvaluationError):
        evaluate_node(parse_rules("n(0). n(X+1) :- n(X).", arity=0), [])


def test_comments_inside_blocks():
    asg = parse_asg('s -> "a" {\n  % a fact\n  p(1).\n}')
    assert str(asg.annotations[0][0]) == "p(1)."


def test_text_round_trip_keeps_annotations():
    for asg in (ZERO_OK, L1, L2):
        again = parse_asg(asg.to_text())
        assert again.grammar.productions == asg.grammar.productions
        assert again.annotations == asg.annotations


def test_unannotated_is_the_cfg():
    plain = AnnotatedGrammar.unannotated(L1.grammar)
    assert member(plain, "abcc") and not member(plain, "cba")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_block_strings_follow_counts(i, j, k):
    w = "a" * i + "b" * j + "c" * k
    assert member(L1, w) == (i == j == k >= 1)
    assert member(L2, w) == (i == j >= 1 and k >= 1)
