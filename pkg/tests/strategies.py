"""Hypothesis strategies for programs, formulas, sequents and models."""

from hypothesis import strategies as st

from cyclic_pdl.semantics import KripkeModel
from cyclic_pdl.syntax import (
    BOTTOM, And, Atom, AtomicProg, Box, Choice, Implies, LabelledFormula, Or, RelAtom, Seq,
    Sequent, Star, Test,
)

PROPS = ("p", "q")
PROGS = ("a", "b")


def programs(tests=True, progs=PROGS):
    base = st.sampled_from(progs).map(AtomicProg)

    def extend(children):
        out = st.one_of(
            st.builds(Seq, children, children),
            st.builds(Choice, children, children),
            st.builds(Star, children),
        )
        if tests:
            out = out | st.builds(Test, st.sampled_from(PROPS).map(Atom))
        return out

    return st.recursive(base, extend, max_leaves=3)


def formulas(tests=True, max_leaves=4):
    base = st.sampled_from(PROPS).map(Atom) | st.just(BOTTOM)

    def extend(children):
        return st.one_of(
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Implies, children, children),
            st.builds(Box, programs(tests), children),
        )

    return st.recursive(base, extend, max_leaves=max_leaves)


def labelled(tests=True, labels=("x", "y")):
    return st.builds(LabelledFormula, st.sampled_from(labels), formulas(tests, max_leaves=3))


def sequents(tests=True, labels=("x", "y")):
    rel = st.builds(RelAtom, st.just(labels[0]), st.sampled_from(PROGS), st.just(labels[-1]))
    return st.builds(
        Sequent,
        st.frozensets(labelled(tests, labels) | rel, max_size=2),
        st.frozensets(labelled(tests, labels), min_size=1, max_size=2),
    )


@st.composite
def models(draw, max_states=3):
    n = draw(st.integers(1, max_states))
    states = tuple(f"s{i}" for i in range(1, n + 1))
    pairs = [(s, t) for s in states for t in states]
    return KripkeModel(
        states,
        {p: frozenset(draw(st.sets(st.sampled_from(states)))) for p in PROPS},
        {a: frozenset(draw(st.sets(st.sampled_from(pairs)))) for a in PROGS},
    )
