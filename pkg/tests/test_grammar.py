import pytest
from hypothesis import given, settings, strategies as st

from asglearn.errors import EmptyGrammar, GrammarSyntaxError, UndefinedNonterminal
from asglearn.grammar import END, Grammar, Symbol, Vocabulary, lex, parse_grammar
from oracles import random_cfg

import random

ABC = """
start -> as bs cs
as -> "a" as |
bs -> "b" bs |
cs -> "c" cs |
"""


def test_reads_productions_in_order():
    g = parse_grammar(ABC)
    assert g.start == "start"
    assert [str(p) for p in g.productions] == [
        "start -> as bs cs", 'as -> "a" as', "as ->", 'bs -> "b" bs', "bs ->",
        'cs -> "c" cs', "cs ->"]
    assert g.terminals == {"a", "b", "c"}
    assert g.by_head["as"] == (1, 2)


def test_nullable_and_productive():
    g = parse_grammar(ABC + 'dead -> "a" dead\n')
    assert g.nullable == {"start", "as", "bs", "cs"}
    assert "dead" not in g.productive


@pytest.mark.parametrize("arrow", ["->", "::=", "→"])
def test_arrow_spellings(arrow):
    g = parse_grammar(f's {arrow} "x" s | "y"')
    assert len(g.productions) == 2


def test_escapes_and_comments():
    g = parse_grammar('s -> "\\"" s | "\\n"  # trailing comment\n')
    assert g.terminals == {'"', "\n"}


def test_undefined_nonterminal_reports_line():
    with pytest.raises(UndefinedNonterminal) as err:
        parse_grammar('s -> "a" t\n\nu -> "b" v')
    assert err.value.line == 1
    assert "line 1" in str(err.value)


def test_multi_character_terminal_rejected():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar('s -> "ab"')
    assert err.value.line == 1


def test_empty_grammar():
    with pytest.raises(EmptyGrammar):
        parse_grammar("# nothing here\n")


def test_annotation_block_rejected_in_plain_grammar():
    with pytest.raises(GrammarSyntaxError):
        parse_grammar('s -> "a" { p(1). }')


def test_unterminated_string_position():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar('s -> "a"\nt -> "b')
    assert err.value.line == 2


def test_lexer_tracks_columns():
    toks = [t for t in lex('s -> "a"')]
    assert [(t.kind, t.column) for t in toks][:3] == [("ident", 1), ("arrow", 3), ("string", 6)]


def test_vocabulary_layout():
    v = Vocabulary(("a", "bc", "aab"))
    assert len(v) == 4
    assert v.entries[-1] is END
    assert v.index(END) == 3 and v.index("bc") == 1
    assert repr(END) == "<end>"


@pytest.mark.parametrize("tokens", [("a", "a"), ("a", "")])
def test_vocabulary_rejects_bad_tokens(tokens):
    with pytest.raises(ValueError):
        Vocabulary(tokens)


def test_vocabulary_alphabet_check():
    with pytest.raises(ValueError):
        Vocabulary(("a", "z")).check_alphabet(parse_grammar(ABC))


def test_grammar_symbol_type_checks():
    with pytest.raises(UndefinedNonterminal):
        Grammar.from_productions([("s", [Symbol("t", False)])])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_text_round_trip(seed):
    g = random_cfg(random.Random(seed))
    again = parse_grammar(g.to_text())
    assert again.productions == g.productions
    assert again.start == g.start
