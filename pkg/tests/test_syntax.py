from hypothesis import given
import pytest

from cyclic_pdl.parser import parse_formula, parse_item, parse_program, parse_sequent
from cyclic_pdl.syntax import (
    Atom, Box, LabelledFormula, RelAtom, Sequent, box_prefix, classify, fl_closure,
    has_nullable_star, is_test_free, labels_of, nullable, rename_labels, size, starred_labels_of,
    subst_label,
)

from strategies import formulas, programs, sequents

F = parse_formula
P = parse_program


def items(*texts):
    return frozenset(parse_item(t) for t in texts)


# substitution ---------------------------------------------------------------

def test_subst_on_labelled_formula():
    assert subst_label(parse_item("x: p"), "x", "y") == parse_item("y: p")


def test_subst_on_relational_atom_touches_matching_component_only():
    assert subst_label(parse_item("z -a-> x"), "x", "y") == parse_item("z -a-> y")


def test_subst_merges_set_members():
    assert subst_label(items("x: p", "y: p"), "x", "y") == items("y: p")


@given(sequents())
def test_subst_to_unused_label_round_trips(s):
    assert subst_label(subst_label(s, "x", "w"), "w", "x") == s


@given(sequents())
def test_rename_with_identity_is_noop(s):
    assert rename_labels(s, {l: l for l in labels_of(s)}) == s


# labels ---------------------------------------------------------------------

@pytest.mark.parametrize("texts, expected", [
    (("x -a-> y", "y: p"), {"x", "y"}),
    ((), set()),
    (("x: [a]p",), {"x"}),
])
def test_labels_of(texts, expected):
    assert labels_of(items(*texts)) == expected


@pytest.mark.parametrize("texts, expected", [
    (("x: [a*]p", "y: p"), {"x"}),
    (("x: [a][a*]p",), set()),
    ((), set()),
])
def test_starred_labels(texts, expected):
    assert starred_labels_of(items(*texts)) == expected


# box prefixing --------------------------------------------------------------

def test_box_prefix_keeps_relational_atoms():
    assert box_prefix(P("a"), items("x: p", "x -b-> y")) == items("x: [a]p", "x -b-> y")


def test_box_prefix_of_empty_set():
    assert box_prefix(P("a*"), ()) == frozenset()


def test_box_prefix_is_pointwise():
    assert box_prefix(P("a;b"), items("x: p", "x: q")) == items("x: [a;b]p", "x: [a;b]q")


# classification ------------------------------------------------------------

@pytest.mark.parametrize("text, kind", [
    ("[a]p", "basic"), ("[a*]p", "iterated"), ("p & q", "composite"),
    ("[a;b]p", "composite"), ("[q?]p", "composite"), ("p", "atomic"), ("false", "atomic"),
])
def test_classify(text, kind):
    assert classify(F(text)) == kind


@given(formulas())
def test_classify_is_total(f):
    assert classify(f) in {"atomic", "basic", "iterated", "composite"}


# Fischer-Ladner closure ----------------------------------------------------

def test_fl_closure_of_atom():
    assert fl_closure(F("p")) == {F("p")}


def test_fl_closure_of_iteration():
    assert fl_closure(F("[a*]p")) == {F("[a*]p"), F("p"), F("[a][a*]p")}


def test_fl_closure_of_composition():
    assert fl_closure(F("[a;b]p")) == {F("[a;b]p"), F("[a][b]p"), F("[b]p"), F("p")}


@given(formulas())
def test_fl_closure_contains_formula_and_is_closed(f):
    cl = fl_closure(f)
    assert f in cl
    for g in cl:
        assert fl_closure(g) <= cl


@given(formulas())
def test_fl_closure_is_linear_in_size(f):
    # the closure of a formula has at most as many members as AST nodes
    assert len(fl_closure(f)) <= size(f)


# test-freeness -------------------------------------------------------------

def test_is_test_free():
    assert is_test_free(F("[a*;b]p"))
    assert not is_test_free(F("[(q?;a)*]p"))
    assert not is_test_free(parse_sequent("x: [p?]q |- x: p"))


def test_sequent_coerces_to_frozensets():
    s = Sequent({RelAtom("x", "a", "y")}, [LabelledFormula("y", Atom("p"))])
    assert isinstance(s.left, frozenset) and isinstance(s.right, frozenset)
    assert str(s) == "x -a-> y |- y: p"


@given(programs())
def test_program_boxes_classify_consistently(p):
    assert classify(Box(p, Atom("p"))) != "atomic"


@pytest.mark.parametrize("text, expected", [
    ("a", False), ("a*", True), ("a*;b*", True), ("a;b*", False), ("a+b*", True),
])
def test_nullable(text, expected):
    assert nullable(parse_program(text)) == expected


@pytest.mark.parametrize("text, expected", [
    ("[a*]p", False), ("[a**]p", True), ("[(a;b)*]p", False), ("[(a+b*)*]p", True),
    ("[a*][(a*;b*)*]p", True),
])
def test_has_nullable_star(text, expected):
    assert has_nullable_star(parse_formula(text)) == expected
