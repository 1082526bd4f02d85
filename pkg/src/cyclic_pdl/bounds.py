"""Numeric bounds used to argue termination of proof search.

``path_max`` estimates how long a chain of fresh successors an unwinding
can build from a label, and ``star_max`` bounds the number of iterated
formulas left in the consequents of open leaves.  Both are only defined
for test-free sequents.  ``⊕`` in the clauses below is ``max``.
"""

from __future__ import annotations

from functools import lru_cache

from .syntax import (
    And, Atom, AtomicProg, Bottom, Box, Choice, Implies, LabelledFormula, Or, Seq,
    Sequent, Star, Test, has_star,
)


class TestNotSupported(ValueError):
    pass


def unfold_len(p) -> int:
    if isinstance(p, AtomicProg):
        return 1
    if isinstance(p, Seq):
        return unfold_len(p.first) + unfold_len(p.second)
    if isinstance(p, Star):
        return unfold_len(p.body)
    if isinstance(p, Choice):
        return max(unfold_len(p.left), unfold_len(p.right))
    if isinstance(p, Test):
        raise TestNotSupported("tests are not supported")
    raise TypeError(p)


@lru_cache(maxsize=None)
def path_max_pos(f) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, (And, Or)):
        return max(path_max_pos(f.left), path_max_pos(f.right))
    if isinstance(f, Implies):
        return max(path_max_neg(f.left), path_max_pos(f.right))
    if isinstance(f, Box):
        return max(path_max_pos(f.body), unfold_len(f.prog))
    raise TypeError(f)


@lru_cache(maxsize=None)
def path_max_neg(f) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, (And, Or)):
        return max(path_max_neg(f.left), path_max_neg(f.right))
    if isinstance(f, Implies):
        return max(path_max_pos(f.left), path_max_neg(f.right))
    if isinstance(f, Box):
        if not _test_free_prog(f.prog):
            raise TestNotSupported("tests are not supported")
        return path_max_neg(f.body)
    raise TypeError(f)


def _test_free_prog(p) -> bool:
    if isinstance(p, Test):
        return False
    if isinstance(p, (Seq,)):
        return _test_free_prog(p.first) and _test_free_prog(p.second)
    if isinstance(p, Choice):
        return _test_free_prog(p.left) and _test_free_prog(p.right)
    if isinstance(p, Star):
        return _test_free_prog(p.body)
    return True


def path_max(x: str, s: Sequent) -> int:
    vals = [path_max_neg(i.formula) for i in s.left
            if isinstance(i, LabelledFormula) and i.label == x]
    vals += [path_max_pos(i.formula) for i in s.right
             if isinstance(i, LabelledFormula) and i.label == x]
    return max(vals, default=0)


# --------------------------------------------------------------------------
# Languages of programs read as regular expressions

@lru_cache(maxsize=None)
def lang_truncated(p, n: int) -> frozenset:
    """Words of ``L(p)`` of length at most ``n``, as tuples of program names."""
    if n < 0:
        return frozenset()
    if isinstance(p, AtomicProg):
        return frozenset([(p.name,)]) if n >= 1 else frozenset()
    if isinstance(p, Choice):
        return lang_truncated(p.left, n) | lang_truncated(p.right, n)
    if isinstance(p, Seq):
        return frozenset(u + v for u in lang_truncated(p.first, n)
                         for v in lang_truncated(p.second, n - len(u)))
    if isinstance(p, Star):
        body = [w for w in lang_truncated(p.body, n) if w]
        words = {()}
        frontier = {()}
        while frontier:
            frontier = {u + w for u in body for w in frontier if len(u) + len(w) <= n} - words
            words |= frontier
        return frozenset(words)
    if isinstance(p, Test):
        raise TestNotSupported("tests are not supported")
    raise TypeError(p)


def in_lang(p, w: tuple) -> bool:
    return tuple(w) in lang_truncated(p, len(w))


@lru_cache(maxsize=None)
def combinations_for(p, w: tuple) -> frozenset:
    """Indices at which iterations of starred sub-programs may end within ``w``."""
    w = tuple(w)
    if isinstance(p, AtomicProg):
        return frozenset()
    if isinstance(p, Choice):
        return combinations_for(p.left, w) | combinations_for(p.right, w)
    if isinstance(p, Seq):
        out = set()
        for i in range(len(w) + 1):
            w1, w2 = w[:i], w[i:]
            if in_lang(p.first, w1) and in_lang(p.second, w2):
                out |= combinations_for(p.first, w1)
                out |= {k + i for k in combinations_for(p.second, w2)}
        return frozenset(out)
    if isinstance(p, Star):
        out = {0}
        for i in range(1, len(w) + 1):
            w1, w2 = w[:i], w[i:]
            if in_lang(p.body, w1):
                out |= combinations_for(p.body, w1)
                out |= {k + i for k in combinations_for(p, w2)}
        return frozenset(out)
    if isinstance(p, Test):
        raise TestNotSupported("tests are not supported")
    raise TypeError(p)


# --------------------------------------------------------------------------
# starMax

@lru_cache(maxsize=None)
def star_max_pos(n: int, f) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, And):
        return max(star_max_pos(n, f.left), star_max_pos(n, f.right))
    if isinstance(f, Or):
        return star_max_pos(n, f.left) + star_max_pos(n, f.right)
    if isinstance(f, Implies):
        return star_max_neg(n, f.left) + star_max_pos(n, f.right)
    if isinstance(f, Box):
        if not _test_free_prog(f.prog):
            raise TestNotSupported("tests are not supported")
        inner = star_max_pos(n, f.body)
        return max(1, inner) if has_star(f.prog) else inner
    raise TypeError(f)


@lru_cache(maxsize=None)
def star_max_neg(n: int, f) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, And):
        return star_max_neg(n, f.left) + star_max_neg(n, f.right)
    if isinstance(f, Or):
        return max(star_max_neg(n, f.left), star_max_neg(n, f.right))
    if isinstance(f, Implies):
        return max(star_max_pos(n, f.left), star_max_neg(n, f.right))
    if isinstance(f, Box):
        total = 0
        for w in lang_truncated(f.prog, n):
            total += sum(star_max_neg(n - k, f.body) for k in combinations_for(f.prog, w))
            total += star_max_neg(n - len(w), f.body)
        return total
    raise TypeError(f)


def star_max(s: Sequent) -> int:
    total = 0
    for i in s.left:
        if isinstance(i, LabelledFormula):
            total += star_max_neg(path_max(i.label, s), i.formula)
    for i in s.right:
        if isinstance(i, LabelledFormula):
            total += star_max_pos(path_max(i.label, s), i.formula)
    return total
