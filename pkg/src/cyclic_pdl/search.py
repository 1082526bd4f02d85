"""Automated proof search for test-free, acyclic sequents.

The prover repeatedly builds capped unwindings: each open leaf is saturated
by the logical rules (consequent iterations are unfolded at most once per
trace), closed by an axiom where possible, and otherwise trimmed with the
validity-preserving weakenings until it is normal.  Normal leaves either
back-link to an earlier sequent that is equal up to renaming of labels,
yield a countermodel when their consequent is atomic, or seed a new round.

``expand_search_tree`` is the unrestricted, fair expander used for
countermodel templates of arbitrary sequents, cut off at a finite depth.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .bounds import (  # noqa: F401  (re-exported)
    TestNotSupported, combinations_for, in_lang, lang_truncated, path_max, star_max,
    unfold_len,
)
from .kernel import CyclicPreProof, ProofBuilder, check_pre_proof
from .semantics import KripkeModel, satisfies_sequent
from .syntax import (
    And, Atom, AtomicProg, Box, Choice, Implies, LabelFactory, LabelledFormula, Or,
    RelAtom, Seq, Sequent, Star, Test, classify, is_test_free, item_sort_key, labels_of,
    rename_labels, sorted_items, starred_labels_of,
)
from .traces import check_gtc


class NotTestFree(ValueError):
    pass


class NotAcyclic(ValueError):
    pass


class StepBudgetExceeded(RuntimeError):
    pass


@dataclass
class SearchBudget:
    max_steps: int = 20_000     # rule applications per unwinding
    max_iters: int = 200        # unwinding rounds per search
    max_history: int = 2_000    # back-link candidates kept


# --------------------------------------------------------------------------
# Normal sequents, reachability, weakenings

def _is_basic_without_successor(item, gamma) -> bool:
    f = item.formula
    if classify(f) != "basic":
        return False
    return not any(isinstance(r, RelAtom) and r.src == item.label and r.prog == f.prog.name
                   for r in gamma)


def is_normal(s: Sequent) -> bool:
    if s.left & s.right:
        return False
    for item in s.right:
        if not isinstance(item, LabelledFormula):
            return False
        if classify(item.formula) not in ("atomic", "iterated"):
            return False
    for item in s.left:
        if isinstance(item, RelAtom) or classify(item.formula) == "atomic":
            continue
        if not _is_basic_without_successor(item, s.left):
            return False
    return True


def _successors(gamma) -> dict:
    succ = {}
    for r in gamma:
        if isinstance(r, RelAtom):
            succ.setdefault(r.src, set()).add(r.dst)
    return succ


def _reachable_from(succ: dict, x) -> set:
    """Labels reachable from ``x`` by a non-empty path."""
    seen = set()
    todo = list(succ.get(x, ()))
    while todo:
        u = todo.pop()
        if u not in seen:
            seen.add(u)
            todo.extend(succ.get(u, ()))
    return seen


def reaches(gamma, x, y) -> bool:
    return y in _reachable_from(_successors(gamma), x)


def is_acyclic(s: Sequent) -> bool:
    succ = _successors(s.left)
    return not any(x in _reachable_from(succ, x) for x in succ)


def _drop_right_relatoms(s):
    return [i for i in s.right if isinstance(i, RelAtom) and i not in s.left]


def _drop_right_atoms(s):
    starred = starred_labels_of(s.right)
    return [i for i in s.right if isinstance(i, LabelledFormula)
            and classify(i.formula) == "atomic" and i.label not in starred]


def _drop_left_formulas(s):
    labs = labels_of(s.right)
    return [i for i in s.left if isinstance(i, LabelledFormula) and i.label not in labs]


def _drop_left_relatoms(s):
    labs = labels_of(s.right)
    if any(isinstance(i, LabelledFormula) and i.label not in labs for i in s.left):
        return []
    for r in sorted_items(i for i in s.left if isinstance(i, RelAtom)):
        if r.src in labs:
            continue
        succ = _successors(s.left - {r})
        if not any(r.src in _reachable_from(succ, z) for z in labs):
            return [r]
    return []


_WEAKENINGS = (
    ("WR", _drop_right_relatoms),
    ("WR", _drop_right_atoms),
    ("WL", _drop_left_formulas),
    ("WL", _drop_left_relatoms),
)


def apply_valid_weakenings(s: Sequent):
    """Weaken a normal sequent to a fixpoint; returns ``(sequent, steps)``.

    ``steps`` lists the ``(rule, item)`` weakenings applied, in order.
    """
    steps = []
    changed = True
    while changed:
        changed = False
        for rule, pick in _WEAKENINGS:
            while True:
                found = pick(s)
                if not found:
                    break
                item = min(found, key=item_sort_key)
                s = s.with_left(remove=[item]) if rule == "WL" else s.with_right(remove=[item])
                steps.append((rule, item))
                changed = True
    return s, steps


# --------------------------------------------------------------------------
# Unwindings

_RIGHT_RULE = {And: "AndR", Or: "OrR", Implies: "ImpR"}
_LEFT_RULE = {And: "AndL", Or: "OrL", Implies: "ImpL"}
_BOX_RIGHT = {AtomicProg: "BoxR", Seq: "SeqR", Choice: "ChoiceR", Star: "StarR", Test: "TestR"}
_BOX_LEFT = {AtomicProg: "BoxL", Seq: "SeqL", Choice: "ChoiceL", Star: "StarL", Test: "TestL"}


def _rule_for(item, side: str):
    if not isinstance(item, LabelledFormula):
        return None
    f = item.formula
    if isinstance(f, Box):
        return (_BOX_RIGHT if side == "R" else _BOX_LEFT)[type(f.prog)]
    return (_RIGHT_RULE if side == "R" else _LEFT_RULE).get(type(f))


def _shift_tags(rule: str, tags: frozenset, index: int) -> frozenset:
    """Depths of already-progressed trace values in the principal's successor."""
    if rule == "BoxR":
        return frozenset(d - 1 for d in tags if d >= 1)
    if rule == "SeqR":
        return frozenset(d + 1 for d in tags)
    if rule == "ChoiceR":
        return tags
    if rule == "StarR":
        if index == 0:
            return frozenset(d - 1 for d in tags if d >= 1)
        return frozenset(d + 1 for d in tags) | {1}
    return frozenset()


def _frozen(item, tags: dict) -> bool:
    return classify(item.formula) == "iterated" and 0 in tags.get(item, ())


@dataclass
class UnwindingRecord:
    """What a single unwinding round produced, kept for invariant checks."""

    origin: Sequent
    leaves: tuple = ()
    steps: int = 0
    exceeded: bool = False


def unwinding_violations(record: UnwindingRecord) -> list:
    """Bounding invariants a finished unwinding round must satisfy, as messages.

    Leaves must have ``labs(left) <= labs(right)``, at most ``star_max(origin)``
    non-atomic consequent formulas, and ``star_max`` no larger than the origin's.
    """
    out = []
    if record.exceeded:
        return [f"unwinding of {record.origin} exceeded its step budget"]
    bound = star_max(record.origin)
    for leaf in record.leaves:
        if not labels_of(leaf.left) <= labels_of(leaf.right):
            out.append(f"leaf {leaf} of {record.origin}: antecedent labels not in consequent")
        wide = sum(classify(i.formula) != "atomic" for i in leaf.right
                   if isinstance(i, LabelledFormula))
        if wide > bound:
            out.append(f"leaf {leaf} of {record.origin}: {wide} non-atomic formulas > {bound}")
        if star_max(leaf) > bound:
            out.append(f"leaf {leaf} of {record.origin}: star_max grew past {bound}")
    return out


class _Stop(Exception):
    def __init__(self, value):
        super().__init__()
        self.value = value


class _Unwinder:
    def __init__(self, builder: ProofBuilder, factory: LabelFactory, max_steps: int):
        self.b = builder
        self.factory = factory
        self.max_steps = max_steps
        self.steps = 0

    def _tick(self, n: int = 1):
        self.steps += n
        if self.steps > self.max_steps:
            raise StepBudgetExceeded(f"unwinding exceeded {self.max_steps} steps")

    def run(self, nid: int, on_leaf=None) -> list:
        """Unwind the open node ``nid`` breadth first; returns its open leaves.

        ``on_leaf`` is called on each capped leaf as soon as it appears; a
        true result stops the unwinding early and is raised as ``_Stop``.
        """
        if not is_acyclic(self.b.sequent(nid)):
            raise NotAcyclic(f"unwinding reached a cyclic sequent: {self.b.sequent(nid)}")
        leaves = []
        work = deque([(nid, {}, frozenset())])
        while work:
            nid, tags, done = work.popleft()
            s = self.b.sequent(nid)
            if self.b.close_axiom(nid):
                self._tick()
                continue
            nxt = self._right(nid, s, tags, done) or self._left(nid, s, tags, done) \
                or self._box_left(nid, s, tags, done)
            if nxt is None:
                leaf = self._cap(nid, s)
                leaves.append(leaf)
                found = on_leaf(leaf) if on_leaf else None
                if found:
                    raise _Stop(found)
                continue
            self._tick()
            work.extend(nxt)
        return leaves

    def _right(self, nid, s, tags, done):
        cands = [i for i in s.right if _rule_for(i, "R") and not _frozen(i, tags)]
        if not cands:
            return None
        item = min(cands, key=item_sort_key)
        rule = _rule_for(item, "R")
        if rule == "TestR":
            raise NotTestFree("test programs unsupported by search")
        params = {}
        if rule == "BoxR":
            params = {"fresh": self.factory.fresh(labels_of(s))}
        prems = self.b.step(nid, rule, item, params)
        out = []
        for k, pid in enumerate(prems):
            p = self.b.sequent(pid)
            # BoxR is the only rule adding relational atoms and its label is
            # fresh, so this keeps every sequent of the unwinding acyclic.
            if rule == "BoxR" and reaches(p.left, params["fresh"], item.label):
                raise NotAcyclic(f"unwinding reached a cyclic sequent: {p}")
            new_tags = {i: tags[i] for i in p.right if i in tags and i != item}
            succ = _shift_tags(rule, tags.get(item, frozenset()), k)
            for i in p.right - s.right:
                new_tags[i] = new_tags.get(i, frozenset()) | succ
            out.append((pid, new_tags, done))
        return out

    def _left(self, nid, s, tags, done):
        cands = [i for i in s.left if _rule_for(i, "L") not in (None, "BoxL")]
        if not cands:
            return None
        item = min(cands, key=item_sort_key)
        rule = _rule_for(item, "L")
        if rule == "TestL":
            raise NotTestFree("test programs unsupported by search")
        prems = self.b.step(nid, rule, item)
        done = done | {item}
        return [self._after_left(pid, s, tags, done) for pid in prems]

    def _after_left(self, pid, s, tags, done):
        # Formulas decomposed earlier on this branch are weakened away so
        # that nested iterations on the left cannot be unfolded forever.
        p = self.b.sequent(pid)
        for again in sorted_items((p.left - s.left) & done):
            (pid,) = self.b.step(pid, "WL", again)
            self._tick()
        p = self.b.sequent(pid)
        new_tags = {i: tags[i] for i in p.right if i in tags}
        return pid, new_tags, done

    def _box_left(self, nid, s, tags, done):
        succ = _successors(s.left)
        basics = [i for i in s.left if _rule_for(i, "L") == "BoxL"
                  and any(r.src == i.label and r.prog == i.formula.prog.name
                          for r in s.left if isinstance(r, RelAtom))]
        if not basics:
            return None
        order = _topological_rank(succ, labels_of(s))
        item = min(basics, key=lambda i: (order[i.label], item_sort_key(i)))
        targets = sorted(r.dst for r in s.left if isinstance(r, RelAtom)
                         and r.src == item.label and r.prog == item.formula.prog.name)
        for k, y in enumerate(targets):
            last = k == len(targets) - 1
            (nid,) = self.b.step(nid, "BoxL", item, {"successor": y}, keep=not last)
            if not last:
                self._tick()
        return [self._after_left(nid, s, tags, done | {item})]

    def _cap(self, nid, s):
        _target, steps = apply_valid_weakenings(s)
        for rule, item in steps:
            (nid,) = self.b.step(nid, rule, item)
            self._tick()
        return nid


def _topological_rank(succ: dict, labels) -> dict:
    """Rank labels so that every label precedes the labels it reaches."""
    indeg = {x: 0 for x in labels}
    for x, ys in succ.items():
        for y in ys:
            indeg[y] = indeg.get(y, 0) + 1
    rank = {}
    ready = sorted(x for x, d in indeg.items() if d == 0)
    while ready:
        x = ready.pop(0)
        rank[x] = len(rank)
        for y in sorted(succ.get(x, ())):
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
        ready.sort()
    for x in sorted(labels):
        rank.setdefault(x, len(rank))
    return rank


@dataclass
class Unwinding:
    proof: CyclicPreProof
    origin: Sequent
    root: int
    leaves: tuple

    def leaf_sequents(self) -> list:
        return [self.proof.nodes[n].sequent for n in self.leaves]


def _check_input(s: Sequent):
    if not is_test_free(s):
        raise NotTestFree("test programs unsupported by search")
    if not is_acyclic(s):
        raise NotAcyclic("the antecedent contains a cycle of relational atoms")


def build_capped_unwinding(s: Sequent, max_steps: int = 20_000,
                           factory: LabelFactory | None = None) -> Unwinding:
    _check_input(s)
    b = ProofBuilder()
    root = b.open(s)
    leaves = _Unwinder(b, factory or LabelFactory(), max_steps).run(root)
    return Unwinding(b.build(root), s, root, tuple(leaves))


# --------------------------------------------------------------------------
# Back-links

def _label_signature(s: Sequent, x) -> tuple:
    left = sorted(str(i.formula) for i in s.left if isinstance(i, LabelledFormula) and i.label == x)
    right = sorted(str(i.formula) for i in s.right
                   if isinstance(i, LabelledFormula) and i.label == x)
    out = sorted(r.prog for r in s.left | s.right if isinstance(r, RelAtom) and r.src == x)
    inc = sorted(r.prog for r in s.left | s.right if isinstance(r, RelAtom) and r.dst == x)
    return tuple(left), tuple(right), tuple(out), tuple(inc)


def find_renaming(src: Sequent, dst: Sequent) -> dict | None:
    """An injective label renaming taking ``src`` to ``dst``, if one exists."""
    if len(src.left) != len(dst.left) or len(src.right) != len(dst.right):
        return None
    la, lb = sorted(labels_of(src)), sorted(labels_of(dst))
    if len(la) != len(lb):
        return None
    by_sig = {}
    for y in lb:
        by_sig.setdefault(_label_signature(dst, y), []).append(y)
    cands = {x: by_sig.get(_label_signature(src, x), []) for x in la}
    if any(not c for c in cands.values()):
        return None
    order = sorted(la, key=lambda x: (len(cands[x]), x))
    atoms = [r for r in src.left | src.right if isinstance(r, RelAtom)]
    dst_atoms = {r for r in dst.left | dst.right if isinstance(r, RelAtom)}
    mapping, used = {}, set()

    def consistent():
        return all(RelAtom(mapping[r.src], r.prog, mapping[r.dst]) in dst_atoms
                   for r in atoms if r.src in mapping and r.dst in mapping)

    def go(k):
        if k == len(order):
            return rename_labels(src, mapping) == dst
        x = order[k]
        for y in cands[x]:
            if y in used:
                continue
            mapping[x] = y
            used.add(y)
            if consistent() and go(k + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    return dict(mapping) if go(0) else None


def backlink_match(leaf: Sequent, history) -> tuple | None:
    """First ``(node id, renaming)`` in ``history`` matching ``leaf`` up to labels."""
    for nid, s in history:
        m = find_renaming(leaf, s)
        if m is not None:
            return nid, m
    return None


def _subst_chain(b: ProofBuilder, nid: int, mapping: dict, factory: LabelFactory) -> int:
    """Rename the labels of leaf ``nid`` by ``mapping`` using Subst steps."""
    todo = {x: y for x, y in mapping.items() if x != y}
    while todo:
        current = labels_of(b.sequent(nid))
        ready = sorted(x for x, y in todo.items() if y not in current)
        if ready:
            x = ready[0]
            (nid,) = b.step(nid, "Subst", params={"from": todo.pop(x), "to": x})
            continue
        x = min(todo)
        tmp = factory.fresh(current | set(todo.values()))
        (nid,) = b.step(nid, "Subst", params={"from": tmp, "to": x})
        todo[tmp] = todo.pop(x)
    return nid


# --------------------------------------------------------------------------
# Templates and countermodels

@dataclass(frozen=True)
class Template:
    gamma: frozenset
    delta: frozenset

    def __post_init__(self):
        if self.gamma & self.delta:
            raise ValueError("template sides must be disjoint")


def template_to_model(t: Template):
    """The Kripke model read off a template, with the identity valuation."""
    labels = sorted(labels_of(t.gamma) | labels_of(t.delta))
    props, progs = {}, {}
    for i in t.gamma:
        if isinstance(i, RelAtom):
            progs.setdefault(i.prog, set()).add((i.src, i.dst))
        elif isinstance(i.formula, Atom):
            props.setdefault(i.formula.name, set()).add(i.label)
    model = KripkeModel(
        tuple(labels) or ("_",),
        {k: frozenset(v) for k, v in props.items()},
        {k: frozenset(v) for k, v in progs.items()},
    )
    return model, {x: x for x in labels}


# --------------------------------------------------------------------------
# The prover

@dataclass
class SearchStats:
    rounds: int = 0
    nodes: int = 0
    unwindings: list = field(default_factory=list)


@dataclass
class Proof:
    proof: CyclicPreProof
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class Countermodel:
    model: KripkeModel
    valuation: dict
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class Unknown:
    reason: str
    stats: SearchStats = field(default_factory=SearchStats)


def _path_template(b: ProofBuilder, leaf: int) -> Template | None:
    gamma, delta = set(), set()
    for n in b.path_to(leaf):
        gamma |= b.nodes[n].sequent.left
        delta |= b.nodes[n].sequent.right
    if gamma & delta:
        return None
    return Template(frozenset(gamma), frozenset(delta))


def _atomic_leaf(s: Sequent) -> bool:
    return all(classify(i.formula) == "atomic" for i in s.right if isinstance(i, LabelledFormula))


def _search(goal: Sequent, budget: SearchBudget, ancestors_only: bool):
    b = ProofBuilder()
    factory = LabelFactory()
    root = b.open(goal)
    stats = SearchStats()
    history = []
    queue = deque([root])
    failed = []

    def countermodel(leaf):
        # Leaves whose consequent is atomic cannot be continued; read a
        # model off the items accumulated along their branch.
        if not _atomic_leaf(b.sequent(leaf)):
            return None
        t = _path_template(b, leaf)
        if t is not None:
            model, val = template_to_model(t)
            if not satisfies_sequent(model, val, goal):
                return Countermodel(model, val, stats)
        failed.append(leaf)
        return None

    while queue:
        leaf = queue.popleft()
        s = b.sequent(leaf)
        if leaf != root:
            if _atomic_leaf(s):
                continue
            on_path = b.path_to(leaf)
            if ancestors_only:
                cands = [(n, q) for n, q in history if n in set(on_path)]
            else:
                ranked = {n: k for k, n in enumerate(on_path)}
                cands = sorted(history, key=lambda e: (e[0] not in ranked, ranked.get(e[0], 0)))
            hit = backlink_match(s, cands)
            if hit is not None:
                companion, mapping = hit
                bud = _subst_chain(b, leaf, mapping, factory)
                b.bud(bud, companion)
                continue
        if stats.rounds >= budget.max_iters:
            return Unknown(f"budget: more than {budget.max_iters} unwinding rounds", stats)
        if len(history) >= budget.max_history:
            return Unknown(f"budget: history exceeded {budget.max_history} entries", stats)
        stats.rounds += 1
        history.append((leaf, s))
        record = UnwindingRecord(s)
        stats.unwindings.append(record)
        unwinder = _Unwinder(b, factory, budget.max_steps)
        try:
            leaves = unwinder.run(leaf, on_leaf=countermodel)
        except StepBudgetExceeded as e:
            record.exceeded = True
            record.steps = unwinder.steps
            stats.nodes = len(b.nodes)
            return Unknown(f"budget: {e}", stats)
        except _Stop as stop:
            record.steps = unwinder.steps
            stats.nodes = len(b.nodes)
            return stop.value
        record.steps = unwinder.steps
        record.leaves = tuple(b.sequent(n) for n in leaves)
        queue.extend(leaves)
    stats.nodes = len(b.nodes)
    if failed:
        return Unknown("countermodel verification failed", stats)
    proof = b.build(root)
    errors = check_pre_proof(proof)
    if errors:
        return Unknown(f"kernel rejected the proof: {errors[0]}", stats)
    verdict = check_gtc(proof)
    if not verdict.accepted:
        return Unknown(f"GTC failed: {verdict.describe()}", stats)
    return Proof(proof, stats)


def prove_test_free(goal: Sequent, budget: SearchBudget | None = None):
    """Search for a cyclic proof or a countermodel of a test-free, acyclic sequent.

    Returns :class:`Proof`, :class:`Countermodel` or :class:`Unknown`.
    """
    _check_input(goal)
    budget = budget or SearchBudget()
    out = _search(goal, budget, ancestors_only=False)
    if isinstance(out, Unknown) and out.reason.startswith("GTC failed"):
        out = _search(goal, budget, ancestors_only=True)
    return out


# --------------------------------------------------------------------------
# Fair search trees

def _dovetail():
    for n in itertools.count(1):
        yield from range(n)


def _expand(b: ProofBuilder, nid: int, sigma, factory: LabelFactory):
    s = b.sequent(nid)
    if sigma in s.right:
        rule = _rule_for(sigma, "R")
        if rule == "BoxR":
            b.step(nid, "BoxR", sigma, {"fresh": factory.fresh(labels_of(s))})
        else:
            b.step(nid, rule, sigma, keep=True)
        return
    rule = _rule_for(sigma, "L")
    if rule == "BoxL":
        targets = sorted(r.dst for r in s.left if isinstance(r, RelAtom)
                         and r.src == sigma.label and r.prog == sigma.formula.prog.name)
        for y in targets:
            (nid,) = b.step(nid, "BoxL", sigma, {"successor": y}, keep=True)
        return
    b.step(nid, rule, sigma, keep=True)


def expand_search_tree(s: Sequent, schedule=None, depth: int = 10):
    """Expand ``depth`` schedule steps of the search tree for ``s``.

    ``schedule`` is an iterable of labelled formulas; by default formulas
    are visited round-robin in order of first appearance.  Returns the open
    derivation and the templates of its open leaves.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    b = ProofBuilder()
    root = b.open(s)
    factory = LabelFactory()
    seen = []

    def note_new():
        for leaf in b.open_leaves(root):
            q = b.sequent(leaf)
            for i in sorted_items(q.left | q.right):
                if _rule_for(i, "L") and i not in seen:
                    seen.append(i)

    def close_all():
        for leaf in b.open_leaves(root):
            b.close_axiom(leaf)

    fixed = iter(schedule) if schedule is not None else None
    order = _dovetail()
    for _ in range(depth):
        close_all()
        if fixed is not None:
            sigma = next(fixed, None)
            if sigma is None:
                break
        else:
            note_new()
            k = next(order)
            sigma = seen[k] if k < len(seen) else None
        if sigma is None or not _rule_for(sigma, "L"):
            continue
        for leaf in b.open_leaves(root):
            q = b.sequent(leaf)
            if sigma in q.left or sigma in q.right:
                _expand(b, leaf, sigma, factory)
    close_all()
    proof = b.build(root)
    templates = [Template(proof.nodes[n].sequent.left, proof.nodes[n].sequent.right)
                 for n in proof.open_leaves()]
    return proof, templates


__all__ = [
    "NotTestFree", "NotAcyclic", "StepBudgetExceeded", "SearchBudget", "is_normal", "reaches",
    "is_acyclic", "apply_valid_weakenings", "Unwinding", "UnwindingRecord", "unwinding_violations",
    "build_capped_unwinding", "find_renaming", "backlink_match", "Template",
    "template_to_model", "SearchStats", "Proof", "Countermodel", "Unknown", "prove_test_free",
    "expand_search_tree", "unfold_len", "path_max", "lang_truncated", "combinations_for",
    "star_max", "TestNotSupported",
]
