import re

from hypothesis import given, strategies as st
import pytest

from cyclic_pdl.bounds import TestNotSupported as NoTests
from cyclic_pdl.bounds import (
    combinations_for, in_lang, lang_truncated, path_max, star_max,
    star_max_neg, star_max_pos, unfold_len,
)
from cyclic_pdl.parser import parse_formula, parse_item, parse_program, parse_sequent
from cyclic_pdl.syntax import AtomicProg, Choice, Seq, Sequent, Star

from _support import all_formulas
from strategies import labelled, programs, sequents

P = parse_program
S = parse_sequent


@pytest.mark.parametrize("text, n", [("a", 1), ("a;b*", 2), ("(a+b;b)*", 2), ("a**", 1)])
def test_unfold_len(text, n):
    assert unfold_len(P(text)) == n


@pytest.mark.parametrize("text, n", [
    ("|- x: [a*]p", 1), ("|- x: p", 0), ("x: [a]p |- x: q", 0),
    ("x: [a;b]p -> q |- ", 2), ("|- y: [a;b]p", 0),
])
def test_path_max(text, n):
    assert path_max("x", S(text)) == n


@pytest.mark.parametrize("text, n, words", [
    ("a*", 2, {(), ("a",), ("a", "a")}),
    ("a;b", 1, set()),
    ("a+b", 1, {("a",), ("b",)}),
    ("(a;b)*", 3, {(), ("a", "b")}),
])
def test_lang_truncated(text, n, words):
    assert lang_truncated(P(text), n) == words


@pytest.mark.parametrize("text, word, idx", [
    ("a", ("b",), set()),
    ("a*", ("a",), {0, 1}),
    ("a;b", ("a", "b"), set()),
    ("a*;b*", ("a", "b"), {0, 1, 2}),
])
def test_combinations_for(text, word, idx):
    assert combinations_for(P(text), word) == idx


@pytest.mark.parametrize("text, n", [
    ("|- x: [a*]p", 1), ("|- x: p", 0), ("x: [a]p |- x: q", 0), ("|- x: [a*]p | [b*]q", 2),
])
def test_star_max(text, n):
    assert star_max(S(text)) == n


def test_tests_are_rejected():
    with pytest.raises(NoTests):
        unfold_len(P("p?"))
    with pytest.raises(NoTests):
        star_max(S("|- x: [p?]q"))
    with pytest.raises(NoTests):
        lang_truncated(P("a;p?"), 2)


def _regex(p) -> str:
    if isinstance(p, AtomicProg):
        return p.name
    if isinstance(p, Seq):
        return f"(?:{_regex(p.first)}{_regex(p.second)})"
    if isinstance(p, Choice):
        return f"(?:{_regex(p.left)}|{_regex(p.right)})"
    if isinstance(p, Star):
        return f"(?:{_regex(p.body)})*"
    raise TypeError(p)


def _words(n):
    out = [()]
    for _ in range(n):
        out += [w + (c,) for w in out if len(w) == len(out[-1]) for c in "ab"]
    return set(out)


@given(programs(tests=False), st.integers(0, 4))
def test_lang_truncated_matches_regular_expression(p, n):
    rx = re.compile(_regex(p))
    expected = {w for w in _words(n) if rx.fullmatch("".join(w))}
    assert lang_truncated(p, n) == expected


@given(programs(tests=False), st.integers(0, 3))
def test_lang_truncated_grows_with_n(p, n):
    assert lang_truncated(p, n) <= lang_truncated(p, n + 1)


@given(programs(tests=False), st.integers(0, 4))
def test_combinations_are_positions_in_the_word(p, n):
    for w in lang_truncated(p, n):
        assert in_lang(p, w)
        assert all(0 <= k <= len(w) for k in combinations_for(p, w))


@given(sequents(tests=False), labelled(tests=False))
def test_path_max_is_monotone_under_weakening(s, item):
    for x in ("x", "y"):
        assert path_max(x, s) <= path_max(x, Sequent(s.left | {item}, s.right))
        assert path_max(x, s) <= path_max(x, Sequent(s.left, s.right | {item}))


def test_star_max_is_monotone_in_n_exhaustively():
    # every test-free formula over p, false, a, b with at most 8 nodes
    checked = 0
    for size in range(1, 9):
        for f in all_formulas(size):
            for fn in (star_max_pos, star_max_neg):
                vals = [fn(n, f) for n in range(5)]
                assert vals == sorted(vals), (fn.__name__, str(f), vals)
            checked += 1
    assert checked > 9000


def test_relational_atoms_do_not_change_path_max():
    s = S("|- x: [a*]p")
    assert path_max("x", s) == path_max("x", Sequent(s.left | {parse_item("x -a-> y")}, s.right))


def test_formula_level_examples():
    assert star_max_pos(1, parse_formula("[a*]p")) == 1
    assert star_max_neg(0, parse_formula("[a]p")) == 0
