"""Seeded random formulas, programs, sequents and models for tests and scripts."""

from __future__ import annotations

import random

from .semantics import KripkeModel
from .syntax import (
    BOTTOM, And, Atom, AtomicProg, Box, Choice, Implies, LabelledFormula, Or, RelAtom, Seq,
    Sequent, Star, Test,
)


def random_program(rng: random.Random, size: int, progs=("a", "b"), tests: bool = False,
                   props=("p", "q")):
    """A program with at most ``size`` AST nodes (at least 1)."""
    if size <= 1:
        return AtomicProg(rng.choice(progs))
    kinds = ["seq", "choice", "star"] + (["test"] if tests else [])
    if size == 2:
        kinds = ["star"] + (["test"] if tests else [])
    kind = rng.choice(kinds)
    if kind == "star":
        return Star(random_program(rng, size - 1, progs, tests, props))
    if kind == "test":
        return Test(random_formula(rng, size - 1, props, progs, tests))
    k = rng.randint(1, size - 2)
    left = random_program(rng, k, progs, tests, props)
    right = random_program(rng, size - 1 - k, progs, tests, props)
    return Seq(left, right) if kind == "seq" else Choice(left, right)


def random_formula(rng: random.Random, size: int, props=("p", "q"), progs=("a", "b"),
                   tests: bool = False, bottom: bool = True):
    """A formula with at most ``size`` AST nodes (at least 1)."""
    if size <= 2:
        if bottom and rng.random() < 0.1:
            return BOTTOM
        return Atom(rng.choice(props))
    kind = rng.choice(["and", "or", "imp", "box", "box"])
    if kind == "box":
        k = rng.randint(1, min(size - 2, 4))
        return Box(random_program(rng, k, progs, tests, props),
                   random_formula(rng, size - 1 - k, props, progs, tests, bottom))
    k = rng.randint(1, size - 2)
    left = random_formula(rng, k, props, progs, tests, bottom)
    right = random_formula(rng, size - 1 - k, props, progs, tests, bottom)
    return {"and": And, "or": Or, "imp": Implies}[kind](left, right)


def random_goal(rng: random.Random, size: int, **kw) -> Sequent:
    """``|- x: phi`` for a random formula ``phi``."""
    f = random_formula(rng, size, **kw)
    return Sequent(frozenset(), frozenset([LabelledFormula("x", f)]))


def random_sequent(rng: random.Random, size: int, labels=("x", "y"), acyclic: bool = True,
                   **kw) -> Sequent:
    """A small labelled sequent; relational atoms only go forward in ``labels``."""
    left, right = set(), set()
    for _ in range(rng.randint(0, 2)):
        left.add(LabelledFormula(rng.choice(labels), random_formula(rng, size // 2 or 1, **kw)))
    for _ in range(rng.randint(1, 2)):
        right.add(LabelledFormula(rng.choice(labels), random_formula(rng, size // 2 or 1, **kw)))
    progs = kw.get("progs", ("a", "b"))
    for _ in range(rng.randint(0, 2)):
        i, j = rng.randrange(len(labels)), rng.randrange(len(labels))
        if acyclic and i >= j:
            continue
        left.add(RelAtom(labels[i], rng.choice(progs), labels[j]))
    return Sequent(frozenset(left), frozenset(right))


def corpus_sequent(rng: random.Random, max_size: int = 10) -> Sequent:
    """A test-free acyclic sequent over programs ``a``, ``b``; formulas of size <= ``max_size``.

    Half are single goals ``|- x: phi``; the rest mix labels and relational atoms.
    """
    if rng.random() < 0.5:
        return random_goal(rng, rng.randint(3, max_size))
    # random_sequent gives each formula half of ``size``
    return random_sequent(rng, rng.randint(4, 2 * max_size))


def random_model(rng: random.Random, n_states: int, props=("p", "q"), progs=("a", "b"),
                 density: float = 0.35) -> KripkeModel:
    states = tuple(f"s{i}" for i in range(1, n_states + 1))
    return KripkeModel(
        states,
        {p: frozenset(s for s in states if rng.random() < 0.5) for p in props},
        {a: frozenset((s, t) for s in states for t in states if rng.random() < density)
         for a in progs},
    )
