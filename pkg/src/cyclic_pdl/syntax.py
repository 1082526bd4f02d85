"""Abstract syntax of PDL formulas, programs, labelled items and sequents.

All values are immutable and hashable.  Sequents hold frozensets, so two
sequents are equal exactly when they contain the same items, which is what
bud/companion matching needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


def _cached_hash(self):
    h = self.__dict__.get("_h")
    if h is None:
        h = hash((type(self).__name__,)
                 + tuple(getattr(self, n) for n in self.__dataclass_fields__))
        object.__setattr__(self, "_h", h)
    return h


def _ast(kind=None):
    """Frozen dataclass whose structural hash is computed once and cached."""
    def wrap(cls):
        cls = dataclass(frozen=True)(cls)
        cls.__hash__ = _cached_hash
        if kind == "formula":
            cls.__str__ = lambda self: show_formula(self)
        elif kind == "program":
            cls.__str__ = lambda self: show_program(self)
        return cls
    return wrap


# --------------------------------------------------------------------------
# Formulas

@_ast("formula")
class Bottom:
    pass


@_ast("formula")
class Atom:
    name: str


@_ast("formula")
class And:
    left: "Formula"
    right: "Formula"


@_ast("formula")
class Or:
    left: "Formula"
    right: "Formula"


@_ast("formula")
class Implies:
    left: "Formula"
    right: "Formula"


@_ast("formula")
class Box:
    prog: "Program"
    body: "Formula"


Formula = Union[Bottom, Atom, And, Or, Implies, Box]

BOTTOM = Bottom()


# --------------------------------------------------------------------------
# Programs

@_ast("program")
class AtomicProg:
    name: str


@_ast("program")
class Seq:
    first: "Program"
    second: "Program"


@_ast("program")
class Choice:
    left: "Program"
    right: "Program"


@_ast("program")
class Test:
    cond: Formula


@_ast("program")
class Star:
    body: "Program"


Program = Union[AtomicProg, Seq, Choice, Test, Star]


# --------------------------------------------------------------------------
# Labelled items and sequents

Label = str


@_ast()
class RelAtom:
    """The relational atom ``src =a=> dst`` for an atomic program ``a``."""

    src: Label
    prog: str
    dst: Label

    def __str__(self):
        return f"{self.src} -{self.prog}-> {self.dst}"


@_ast()
class LabelledFormula:
    label: Label
    formula: Formula

    def __str__(self):
        return f"{self.label}: {show_formula(self.formula)}"


Item = Union[RelAtom, LabelledFormula]


def item_sort_key(item: Item):
    return (0 if isinstance(item, RelAtom) else 1, str(item))


def sorted_items(items: Iterable[Item]) -> list:
    return sorted(items, key=item_sort_key)


@dataclass(frozen=True)
class Sequent:
    left: frozenset = field(default_factory=frozenset)
    right: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.left, frozenset):
            object.__setattr__(self, "left", frozenset(self.left))
        if not isinstance(self.right, frozenset):
            object.__setattr__(self, "right", frozenset(self.right))

    def __str__(self):
        lhs = ", ".join(str(i) for i in sorted_items(self.left))
        rhs = ", ".join(str(i) for i in sorted_items(self.right))
        return f"{lhs} |- {rhs}".strip()

    def items(self) -> Iterator[Item]:
        yield from self.left
        yield from self.right

    def with_left(self, add=(), remove=()) -> "Sequent":
        return Sequent((self.left - frozenset(remove)) | frozenset(add), self.right)

    def with_right(self, add=(), remove=()) -> "Sequent":
        return Sequent(self.left, (self.right - frozenset(remove)) | frozenset(add))

    def issubset(self, other: "Sequent") -> bool:
        return self.left <= other.left and self.right <= other.right


# --------------------------------------------------------------------------
# Printing with minimal parentheses (the parser's grammar inverts this)

def show_formula(f: Formula, level: int = 0) -> str:
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Box):
        return f"[{show_program(f.prog)}]{show_formula(f.body, 4)}"
    if isinstance(f, And):
        prec, text = 3, f"{show_formula(f.left, 3)} & {show_formula(f.right, 4)}"
    elif isinstance(f, Or):
        prec, text = 2, f"{show_formula(f.left, 2)} | {show_formula(f.right, 3)}"
    elif isinstance(f, Implies):
        prec, text = 1, f"{show_formula(f.left, 2)} -> {show_formula(f.right, 1)}"
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if level > prec else text


def show_program(p: Program, level: int = 0) -> str:
    if isinstance(p, AtomicProg):
        return p.name
    if isinstance(p, Test):
        return f"{show_formula(p.cond)}?"
    if isinstance(p, Star):
        return f"{show_program(p.body, 3)}*"
    if isinstance(p, Choice):
        prec, text = 1, f"{show_program(p.left, 1)} + {show_program(p.right, 2)}"
    elif isinstance(p, Seq):
        prec, text = 2, f"{show_program(p.first, 2)};{show_program(p.second, 3)}"
    else:
        raise TypeError(f"not a program: {p!r}")
    return f"({text})" if level > prec else text


# --------------------------------------------------------------------------
# Labels

class LabelFactory:
    """Per-session source of fresh labels ``_0, _1, ...``."""

    def __init__(self, start: int = 0):
        self.counter = start

    def fresh(self, avoid: Iterable[Label] = ()) -> Label:
        avoid = set(avoid)
        while True:
            name = f"_{self.counter}"
            self.counter += 1
            if name not in avoid:
                return name


def _items_of(obj) -> Iterable[Item]:
    if isinstance(obj, Sequent):
        return obj.items()
    if isinstance(obj, (RelAtom, LabelledFormula)):
        return (obj,)
    return obj


def labels_of(obj) -> set:
    """Labels occurring in an item, an item collection or a sequent."""
    out = set()
    for item in _items_of(obj):
        if isinstance(item, RelAtom):
            out.add(item.src)
            out.add(item.dst)
        else:
            out.add(item.label)
    return out


def starred_labels_of(items: Iterable[Item]) -> set:
    return {
        i.label for i in items
        if isinstance(i, LabelledFormula) and isinstance(i.formula, Box)
        and isinstance(i.formula.prog, Star)
    }


def subst_label(obj, src: Label, dst: Label):
    """Replace every occurrence of label ``src`` by ``dst``."""
    if isinstance(obj, RelAtom):
        return RelAtom(dst if obj.src == src else obj.src, obj.prog,
                       dst if obj.dst == src else obj.dst)
    if isinstance(obj, LabelledFormula):
        return obj if obj.label != src else LabelledFormula(dst, obj.formula)
    if isinstance(obj, Sequent):
        return Sequent(frozenset(subst_label(i, src, dst) for i in obj.left),
                       frozenset(subst_label(i, src, dst) for i in obj.right))
    return frozenset(subst_label(i, src, dst) for i in obj)


def rename_labels(obj, mapping: dict):
    """Apply a simultaneous label renaming (labels not in ``mapping`` stay)."""
    def one(i):
        if isinstance(i, RelAtom):
            return RelAtom(mapping.get(i.src, i.src), i.prog, mapping.get(i.dst, i.dst))
        return LabelledFormula(mapping.get(i.label, i.label), i.formula)

    if isinstance(obj, (RelAtom, LabelledFormula)):
        return one(obj)
    if isinstance(obj, Sequent):
        return Sequent(frozenset(map(one, obj.left)), frozenset(map(one, obj.right)))
    return frozenset(map(one, obj))


def box_prefix(prog: Program, items: Iterable[Item]) -> frozenset:
    return frozenset(
        i if isinstance(i, RelAtom) else LabelledFormula(i.label, Box(prog, i.formula))
        for i in items
    )


# --------------------------------------------------------------------------
# Classification and measures

def classify(f: Formula) -> str:
    if isinstance(f, (Bottom, Atom)):
        return "atomic"
    if isinstance(f, Box):
        if isinstance(f.prog, AtomicProg):
            return "basic"
        if isinstance(f.prog, Star):
            return "iterated"
    return "composite"


def is_test_free(obj) -> bool:
    if isinstance(obj, (Bottom, Atom, AtomicProg)):
        return True
    if isinstance(obj, Test):
        return False
    if isinstance(obj, (And, Or, Implies)):
        return is_test_free(obj.left) and is_test_free(obj.right)
    if isinstance(obj, Box):
        return is_test_free(obj.prog) and is_test_free(obj.body)
    if isinstance(obj, Seq):
        return is_test_free(obj.first) and is_test_free(obj.second)
    if isinstance(obj, Choice):
        return is_test_free(obj.left) and is_test_free(obj.right)
    if isinstance(obj, Star):
        return is_test_free(obj.body)
    if isinstance(obj, LabelledFormula):
        return is_test_free(obj.formula)
    if isinstance(obj, RelAtom):
        return True
    return all(is_test_free(i) for i in _items_of(obj))


def nullable(p: Program) -> bool:
    """Whether the empty word is in the language of a test-free program."""
    if isinstance(p, Star):
        return True
    if isinstance(p, Seq):
        return nullable(p.first) and nullable(p.second)
    if isinstance(p, Choice):
        return nullable(p.left) or nullable(p.right)
    return False


def has_nullable_star(obj) -> bool:
    """Whether some ``alpha*`` inside ``obj`` has a nullable body, as in ``a**``."""
    if isinstance(obj, Star):
        return nullable(obj.body) or has_nullable_star(obj.body)
    if isinstance(obj, (Bottom, Atom, AtomicProg, RelAtom)):
        return False
    if isinstance(obj, Test):
        return has_nullable_star(obj.cond)
    if isinstance(obj, (And, Or, Implies, Choice)):
        return has_nullable_star(obj.left) or has_nullable_star(obj.right)
    if isinstance(obj, Seq):
        return has_nullable_star(obj.first) or has_nullable_star(obj.second)
    if isinstance(obj, Box):
        return has_nullable_star(obj.prog) or has_nullable_star(obj.body)
    if isinstance(obj, LabelledFormula):
        return has_nullable_star(obj.formula)
    return any(has_nullable_star(i) for i in _items_of(obj))


def has_star(p: Program) -> bool:
    if isinstance(p, Star):
        return True
    if isinstance(p, Seq):
        return has_star(p.first) or has_star(p.second)
    if isinstance(p, Choice):
        return has_star(p.left) or has_star(p.right)
    if isinstance(p, Test):
        return _formula_has_star(p.cond)
    return False


def _formula_has_star(f: Formula) -> bool:
    if isinstance(f, (And, Or, Implies)):
        return _formula_has_star(f.left) or _formula_has_star(f.right)
    if isinstance(f, Box):
        return has_star(f.prog) or _formula_has_star(f.body)
    return False


def size(obj) -> int:
    """Number of AST nodes, counting formulas and programs alike."""
    if isinstance(obj, (Bottom, Atom, AtomicProg)):
        return 1
    if isinstance(obj, (And, Or, Implies, Choice)):
        return 1 + size(obj.left) + size(obj.right)
    if isinstance(obj, Seq):
        return 1 + size(obj.first) + size(obj.second)
    if isinstance(obj, Box):
        return 1 + size(obj.prog) + size(obj.body)
    if isinstance(obj, Star):
        return 1 + size(obj.body)
    if isinstance(obj, Test):
        return 1 + size(obj.cond)
    raise TypeError(obj)


def names_in(obj, props: set | None = None, progs: set | None = None):
    """Collect atomic proposition and program names occurring in ``obj``."""
    props = set() if props is None else props
    progs = set() if progs is None else progs

    def walk(o):
        if isinstance(o, Atom):
            props.add(o.name)
        elif isinstance(o, AtomicProg):
            progs.add(o.name)
        elif isinstance(o, (And, Or, Implies, Choice)):
            walk(o.left)
            walk(o.right)
        elif isinstance(o, Seq):
            walk(o.first)
            walk(o.second)
        elif isinstance(o, Box):
            walk(o.prog)
            walk(o.body)
        elif isinstance(o, Star):
            walk(o.body)
        elif isinstance(o, Test):
            walk(o.cond)
        elif isinstance(o, LabelledFormula):
            walk(o.formula)
        elif isinstance(o, RelAtom):
            progs.add(o.prog)
        elif isinstance(o, Bottom):
            pass
        else:
            for i in _items_of(o):
                walk(i)

    walk(obj)
    return props, progs


def fl_closure(f: Formula) -> frozenset:
    """Fischer-Ladner closure of ``f``, restricted to box modalities."""
    seen = set()
    todo = [f]
    while todo:
        g = todo.pop()
        if g in seen:
            continue
        seen.add(g)
        if isinstance(g, (And, Or, Implies)):
            todo += [g.left, g.right]
        elif isinstance(g, Box):
            p, body = g.prog, g.body
            todo.append(body)
            if isinstance(p, Seq):
                todo.append(Box(p.first, Box(p.second, body)))
            elif isinstance(p, Choice):
                todo += [Box(p.left, body), Box(p.right, body)]
            elif isinstance(p, Star):
                todo.append(Box(p.body, g))
            elif isinstance(p, Test):
                todo.append(p.cond)
    return frozenset(seen)


# --------------------------------------------------------------------------
# Convenience constructors

def iff(a: Formula, b: Formula) -> Formula:
    """Biconditional, encoded as a conjunction of two implications."""
    return And(Implies(a, b), Implies(b, a))


def boxes(progs: Iterable[Program], body: Formula) -> Formula:
    for p in reversed(list(progs)):
        body = Box(p, body)
    return body
