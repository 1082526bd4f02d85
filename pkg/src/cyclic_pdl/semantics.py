"""Finite Kripke models, the interpretation of formulas and programs, sequent
satisfaction, brute-force countermodel search and the trace value measure
used in the soundness argument.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .syntax import (
    And, Atom, AtomicProg, Bottom, Box, Choice, Implies, Or,
    RelAtom, Seq, Sequent, Star, Test, labels_of, names_in,
)


@dataclass(frozen=True)
class KripkeModel:
    states: tuple
    props: dict = field(default_factory=dict)
    progs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.states:
            raise ValueError("at least one state required")
        known = set(self.states)
        for name, ext in self.props.items():
            if not set(ext) <= known:
                raise ValueError(f"prop {name!r} mentions an unknown state")
        for name, rel in self.progs.items():
            for s, t in rel:
                if s not in known or t not in known:
                    raise ValueError(f"prog {name!r} mentions an unknown state")

    def prop(self, name: str) -> frozenset:
        return frozenset(self.props.get(name, ()))

    def prog(self, name: str) -> frozenset:
        return frozenset(self.progs.get(name, ()))

    def successors(self, state) -> list:
        """Successors of ``state`` along any atomic program, in state order."""
        succ = {t for rel in self.progs.values() for (s, t) in rel if s == state}
        return [t for t in self.states if t in succ]


# --------------------------------------------------------------------------
# Interpretation

def _compose(r1, r2) -> frozenset:
    by_src = {}
    for s, t in r2:
        by_src.setdefault(s, []).append(t)
    return frozenset((s, u) for s, t in r1 for u in by_src.get(t, ()))


def _rt_closure(states, rel) -> frozenset:
    succ = {s: set() for s in states}
    for s, t in rel:
        succ[s].add(t)
    out = set()
    for s in states:
        seen = {s}
        todo = [s]
        while todo:
            u = todo.pop()
            for t in succ[u]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        out.update((s, t) for t in seen)
    return frozenset(out)


class _Interp:
    def __init__(self, m: KripkeModel):
        self.m = m
        self.all = frozenset(m.states)
        self.fcache = {}
        self.pcache = {}

    def formula(self, f) -> frozenset:
        hit = self.fcache.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Bottom):
            res = frozenset()
        elif isinstance(f, Atom):
            res = self.m.prop(f.name)
        elif isinstance(f, And):
            res = self.formula(f.left) & self.formula(f.right)
        elif isinstance(f, Or):
            res = self.formula(f.left) | self.formula(f.right)
        elif isinstance(f, Implies):
            res = (self.all - self.formula(f.left)) | self.formula(f.right)
        elif isinstance(f, Box):
            bad = self.all - self.formula(f.body)
            res = self.all - {s for s, t in self.program(f.prog) if t in bad}
        else:
            raise TypeError(f"not a formula: {f!r}")
        self.fcache[f] = res
        return res

    def program(self, p) -> frozenset:
        hit = self.pcache.get(p)
        if hit is not None:
            return hit
        if isinstance(p, AtomicProg):
            res = self.m.prog(p.name)
        elif isinstance(p, Seq):
            res = _compose(self.program(p.first), self.program(p.second))
        elif isinstance(p, Choice):
            res = self.program(p.left) | self.program(p.right)
        elif isinstance(p, Test):
            res = frozenset((s, s) for s in self.formula(p.cond))
        elif isinstance(p, Star):
            res = _rt_closure(self.m.states, self.program(p.body))
        else:
            raise TypeError(f"not a program: {p!r}")
        self.pcache[p] = res
        return res


def interp_formula(m: KripkeModel, f) -> frozenset:
    return _Interp(m).formula(f)


def interp_program(m: KripkeModel, p) -> frozenset:
    return _Interp(m).program(p)


def holds(m: KripkeModel, v: dict, item, interp: _Interp | None = None) -> bool:
    interp = interp or _Interp(m)
    if isinstance(item, RelAtom):
        return (v[item.src], v[item.dst]) in m.prog(item.prog)
    return v[item.label] in interp.formula(item.formula)


def satisfies_sequent(m: KripkeModel, v: dict, s: Sequent) -> bool:
    missing = labels_of(s) - set(v)
    if missing:
        raise ValueError(f"valuation is partial: no state for {sorted(missing)}")
    interp = _Interp(m)
    if all(holds(m, v, a, interp) for a in s.left):
        return any(holds(m, v, b, interp) for b in s.right)
    return True


# --------------------------------------------------------------------------
# Brute-force countermodels

class ModelWitness(NamedTuple):
    model: KripkeModel
    valuation: dict


class _Verdict:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


NOT_FOUND = _Verdict("NotFound")
TIMEOUT = _Verdict("Timeout")


def _subsets(universe: list):
    for mask in range(1 << len(universe)):
        yield frozenset(u for i, u in enumerate(universe) if mask >> i & 1)


def brute_force_countermodel(s: Sequent, max_states: int, max_models: int = 5_000_000,
                             timeout: float | None = None):
    """Return the first countermodel of ``s`` in canonical enumeration order.

    Models are enumerated by size, then program relations, then proposition
    extensions, then valuations.  Gives ``TIMEOUT`` once ``max_models``
    models have been tried or ``timeout`` seconds have passed.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    props, progs = names_in(s)
    props, progs = sorted(props), sorted(progs)
    labels = sorted(labels_of(s))
    deadline = None if timeout is None else time.monotonic() + timeout
    tried = 0
    for n in range(1, max_states + 1):
        states = tuple(f"s{i}" for i in range(1, n + 1))
        pairs = [(a, b) for a in states for b in states]
        for rels in itertools.product(*[list(_subsets(pairs)) for _ in progs]):
            for exts in itertools.product(*[list(_subsets(list(states))) for _ in props]):
                tried += 1
                if tried > max_models or (deadline and time.monotonic() > deadline):
                    return TIMEOUT
                m = KripkeModel(states, dict(zip(props, exts)), dict(zip(progs, rels)))
                interp = _Interp(m)
                for combo in itertools.product(states, repeat=len(labels)):
                    v = dict(zip(labels, combo))
                    if all(holds(m, v, a, interp) for a in s.left) and \
                            not any(holds(m, v, b, interp) for b in s.right):
                        return ModelWitness(m, v)
    return NOT_FOUND


# --------------------------------------------------------------------------
# Counterexample paths and the trace value measure

def _loop_free_paths(m: KripkeModel, start):
    out = []
    stack = [(start,)]
    while stack:
        path = stack.pop()
        out.append(path)
        for t in m.successors(path[-1]):
            if t not in path:
                stack.append(path + (t,))
    return out


def _final_segment_starts(interp: _Interp, path: tuple, tau) -> set:
    """1-based indices k_n of the valid partitions of ``path`` for ``tau``."""
    m = len(path)
    frontier = {1}
    for prog in tau.spine:
        rel = interp.program(prog)
        frontier = {
            k2 for k in frontier for k2 in range(k, m + 1)
            if (path[k - 1], path[k2 - 1]) in rel
        }
        if not frontier:
            return set()
    star = interp.program(Star(tau.focus))
    return {k for k in frontier if (path[k - 1], path[m - 1]) in star}


def _counterexamples(m: KripkeModel, v: dict, tau):
    interp = _Interp(m)
    bad = frozenset(m.states) - interp.formula(tau.formula)
    found = {}
    for path in _loop_free_paths(m, v[tau.label]):
        if path[-1] not in bad:
            continue
        starts = _final_segment_starts(interp, path, tau)
        if starts:
            found[path] = len(path) - min(starts) + 1
    return {
        p: w for p, w in found.items()
        if not any(q != p and p[:len(q)] == q for q in found)
    }


def counterexample_paths(m: KripkeModel, v: dict, tau) -> set:
    """Minimal loop-free counterexample paths for a trace value."""
    return set(_counterexamples(m, v, tau))


def trace_value_measure(m: KripkeModel, v: dict, tau) -> Counter:
    return Counter(_counterexamples(m, v, tau).values())


def dm_less(a: Counter, b: Counter) -> bool:
    """Dershowitz-Manna ordering: ``a`` is strictly below ``b``."""
    a, b = Counter(a), Counter(b)
    if +a == +b:
        return False
    for y in set(a) | set(b):
        if b[y] < a[y] and not any(x > y and a[x] < b[x] for x in set(a) | set(b)):
            return False
    return True


def dm_leq(a: Counter, b: Counter) -> bool:
    return +Counter(a) == +Counter(b) or dm_less(a, b)
