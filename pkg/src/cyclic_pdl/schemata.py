"""Derivation schemata: generalised necessitation, the PDL axioms and the
translation of Hilbert-style proofs into cyclic proofs.

Axioms are numbered 1 (distribution over implication), 2 (distribution over
conjunction), 3 (choice), 4 (composition), 5 (test) and 6 (induction); the
mix axiom ``phi & [a][a*]phi <-> [a*]phi`` is available as number 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import CyclicPreProof, ProofBuilder, apply_rule, edges
from .parser import parse_formula, parse_program
from .syntax import (
    And, Atom, AtomicProg, Bottom, Box, Choice, Implies, LabelFactory, LabelledFormula, Or,
    Seq, Sequent, Star, Test, box_prefix, iff, item_sort_key, labels_of,
)
from .traces import TraceValue, trace_pairs, values_of_item

AXIOM_IDS = (1, 2, 3, 4, 5, 6, 7)
AXIOM_NAMES = {
    1: "distribution over implication",
    2: "distribution over conjunction",
    3: "choice",
    4: "composition",
    5: "test",
    6: "induction",
    7: "mix",
}


class MultiLabelGamma(ValueError):
    pass


class BadParams(ValueError):
    pass


class IllFormedHilbertProof(ValueError):
    pass


@dataclass
class OpenDerivation:
    """A derivation whose ``Open`` leaves are listed left to right."""

    proof: CyclicPreProof
    leaves: tuple

    def leaf_sequents(self) -> list:
        return [self.proof.nodes[n].sequent for n in self.leaves]


def _seq(left=(), right=()) -> Sequent:
    return Sequent(frozenset(left), frozenset(right))


# --------------------------------------------------------------------------
# A small finite prover: propositional rules eagerly, program rules with
# bounded backtracking.  Enough for tautologies and axioms 3, 4, 5 and 7.

_PROP_RIGHT = {And: "AndR", Or: "OrR", Implies: "ImpR"}
_PROP_LEFT = {And: "AndL", Or: "OrL", Implies: "ImpL"}
_PROG_RIGHT = {Seq: "SeqR", Choice: "ChoiceR", Test: "TestR", Star: "StarR"}
_PROG_LEFT = {Seq: "SeqL", Choice: "ChoiceL", Test: "TestL", Star: "StarL"}


def _closable(s: Sequent) -> bool:
    return bool(s.left & s.right) or any(
        isinstance(i, LabelledFormula) and isinstance(i.formula, Bottom) for i in s.left)


def _plan(s: Sequent, fuel: int, memo: dict):
    key = (s, fuel)
    if key in memo:
        return memo[key]
    memo[key] = None
    memo[key] = _plan_inner(s, fuel, memo)
    return memo[key]


def _apply(s, rule, item):
    return apply_rule(s, rule, item)


def _plan_inner(s: Sequent, fuel: int, memo: dict):
    if _closable(s):
        return ("close",)
    props = [(i, _PROP_RIGHT[type(i.formula)]) for i in s.right
             if isinstance(i, LabelledFormula) and type(i.formula) in _PROP_RIGHT]
    props += [(i, _PROP_LEFT[type(i.formula)]) for i in s.left
              if isinstance(i, LabelledFormula) and type(i.formula) in _PROP_LEFT]
    if props:
        item, rule = min(props, key=lambda p: (item_sort_key(p[0]), p[1]))
        subs = [_plan(p, fuel, memo) for p in _apply(s, rule, item)]
        return None if any(x is None for x in subs) else (rule, item, subs)
    if fuel <= 0:
        return None
    cands = []
    for side, table in (("R", _PROG_RIGHT), ("L", _PROG_LEFT)):
        for i in (s.right if side == "R" else s.left):
            if isinstance(i, LabelledFormula) and isinstance(i.formula, Box) \
                    and type(i.formula.prog) in table:
                cands.append((item_sort_key(i), side, i, table[type(i.formula.prog)]))
    for _k, _side, item, rule in sorted(cands, key=lambda c: (c[0], c[1])):
        subs = [_plan(p, fuel - 1, memo) for p in _apply(s, rule, item)]
        if all(x is not None for x in subs):
            return (rule, item, subs)
    return None


def _replay(b: ProofBuilder, nid: int, plan):
    if plan[0] == "close":
        closed = b.close_axiom(nid)
        assert closed
        return
    rule, item, subs = plan
    for pid, sub in zip(b.step(nid, rule, item), subs):
        _replay(b, pid, sub)


def close_finite(b: ProofBuilder, nid: int, fuel: int = 2) -> bool:
    """Close the open leaf ``nid`` by a finite derivation, if one is found."""
    plan = _plan(b.sequent(nid), fuel, {})
    if plan is None:
        return False
    _replay(b, nid, plan)
    return True


def finite_prove(s: Sequent, fuel: int = 2) -> CyclicPreProof | None:
    b = ProofBuilder()
    root = b.open(s)
    return b.build(root) if close_finite(b, root, fuel) else None


# --------------------------------------------------------------------------
# Necessitation

def _chain(b: ProofBuilder, nid: int, rule: str, principals, keep=frozenset()) -> int:
    for item in sorted(principals, key=item_sort_key):
        (nid,) = b.step(nid, rule, item, keep=item in keep)
    return nid


def _weaken(b: ProofBuilder, nid: int, left=(), right=()) -> int:
    s = b.sequent(nid)
    return b.weaken_to(nid, _seq(s.left - set(left), s.right - set(right)))


def _nec(b: ProofBuilder, nid: int, prog, gamma: frozenset, phi, x: str,
         factory: LabelFactory) -> list:
    """Grow ``[prog]gamma |- x:[prog]phi`` at ``nid``; returns its open leaves."""
    target = _seq(gamma, [LabelledFormula(x, phi)])
    if isinstance(prog, AtomicProg):
        y = factory.fresh({x})
        (nid,) = b.step(nid, "Subst", params={"from": y, "to": x})
        (nid,) = b.step(nid, "BoxR", LabelledFormula(y, Box(prog, phi)), {"fresh": x})
        for psi in sorted(gamma, key=item_sort_key):
            (nid,) = b.step(nid, "BoxL", LabelledFormula(y, Box(prog, psi.formula)),
                            {"successor": x})
        nid = b.weaken_to(nid, target)
        return [nid]
    if isinstance(prog, Seq):
        (nid,) = b.step(nid, "SeqR", LabelledFormula(x, Box(prog, phi)))
        nid = _chain(b, nid, "SeqL", box_prefix(prog, gamma))
        leaves = []
        for mid in _nec(b, nid, prog.first, box_prefix(prog.second, gamma),
                        Box(prog.second, phi), x, factory):
            leaves += _nec(b, mid, prog.second, gamma, phi, x, factory)
        return leaves
    if isinstance(prog, Choice):
        nid = _chain(b, nid, "ChoiceL", box_prefix(prog, gamma))
        left, right = b.step(nid, "ChoiceR", LabelledFormula(x, Box(prog, phi)))
        ga, gb = box_prefix(prog.left, gamma), box_prefix(prog.right, gamma)
        left = _weaken(b, left, gb - ga)
        right = _weaken(b, right, ga - gb)
        return (_nec(b, left, prog.left, gamma, phi, x, factory)
                + _nec(b, right, prog.right, gamma, phi, x, factory))
    if isinstance(prog, Test):
        (nid,) = b.step(nid, "TestR", LabelledFormula(x, Box(prog, phi)))
        for item in sorted(box_prefix(prog, gamma), key=item_sort_key):
            side, nid = b.step(nid, "TestL", item)
            closed = b.close_axiom(side)
            assert closed
        nid = b.weaken_to(nid, target)
        return [nid]
    if isinstance(prog, Star):
        conclusion = nid
        unfolded = box_prefix(prog.body, box_prefix(prog, gamma))
        keep = gamma | unfolded
        nid = _chain(b, nid, "StarL", box_prefix(prog, gamma), keep=keep)
        assert b.sequent(nid).left == keep
        left, right = b.step(nid, "StarR", LabelledFormula(x, Box(prog, phi)))
        left = _weaken(b, left, unfolded - gamma)
        right = _weaken(b, right, gamma - unfolded)
        for leaf in _nec(b, right, prog.body, box_prefix(prog, gamma), Box(prog, phi), x,
                         factory):
            b.bud(leaf, conclusion)
        return [left]
    raise TypeError(f"not a program: {prog!r}")


def _check_gamma(gamma, x: str) -> frozenset:
    gamma = frozenset(gamma)
    for g in gamma:
        if not isinstance(g, LabelledFormula):
            raise MultiLabelGamma(f"{g} is not a labelled formula")
    if not labels_of(gamma) <= {x}:
        raise MultiLabelGamma(f"labels {sorted(labels_of(gamma))} are not all {x}")
    return gamma


def build_necessitation(prog, gamma, phi, x: str = "x",
                        factory: LabelFactory | None = None) -> OpenDerivation:
    """Open derivation of ``[prog]gamma |- x:[prog]phi`` with leaves ``gamma |- x:phi``."""
    gamma = _check_gamma(gamma, x)
    b = ProofBuilder()
    root = b.open(_seq(box_prefix(prog, gamma), [LabelledFormula(x, Box(prog, phi))]))
    leaves = _nec(b, root, prog, gamma, phi, x, factory or LabelFactory())
    return OpenDerivation(b.build(root), tuple(leaves))


def necessitation_into(b: ProofBuilder, nid: int, prog, gamma, phi, x: str = "x",
                       factory: LabelFactory | None = None) -> list:
    """Like :func:`build_necessitation` but grown at open node ``nid`` of ``b``."""
    gamma = _check_gamma(gamma, x)
    expected = _seq(box_prefix(prog, gamma), [LabelledFormula(x, Box(prog, phi))])
    if b.sequent(nid) != expected:
        raise BadParams(f"node {nid} does not conclude {expected}")
    return _nec(b, nid, prog, gamma, phi, x, factory or LabelFactory())


def check_covering_traces(d: OpenDerivation, prog, phi, x: str = "x") -> bool:
    """Condition (i): each trace value of ``x:phi`` is reached along every path to a leaf.

    Explores pairs (node, set of trace values reachable from ``[prog]tau``)
    over the cycle graph, so paths through cycles are covered too.
    """
    proof = d.proof
    succ = {}
    for src, i, dst, _bud in edges(proof):
        succ.setdefault(src, []).append((dst, trace_pairs(proof, src, i).pairs))
    leaves = set(d.leaves)
    for tau in values_of_item(LabelledFormula(x, phi)):
        start = TraceValue(x, (prog,) + tau.spine, tau.focus, tau.formula)
        todo = [(proof.root, frozenset([start]))]
        seen = set(todo)
        while todo:
            node, vals = todo.pop()
            if node in leaves and tau not in vals:
                return False
            for dst, pairs in succ.get(node, ()):
                nxt = (dst, frozenset(b for a, b, _p in pairs if a in vals))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return True


# --------------------------------------------------------------------------
# Axioms

_DEFAULTS = {"alpha": "a", "beta": "b", "phi": "p", "psi": "q"}


def _coerce(params: dict) -> dict:
    out = {}
    for key, default in _DEFAULTS.items():
        val = params.get(key, default)
        try:
            if key in ("alpha", "beta"):
                val = parse_program(val) if isinstance(val, str) else val
                if isinstance(val, (Atom, And, Or, Implies, Box, Bottom)):
                    raise BadParams(f"{key} must be a program")
            else:
                val = parse_formula(val) if isinstance(val, str) else val
                if isinstance(val, (AtomicProg, Seq, Choice, Test, Star)):
                    raise BadParams(f"{key} must be a formula")
        except BadParams:
            raise
        except Exception as e:
            raise BadParams(f"bad parameter {key}: {e}") from e
        out[key] = val
    unknown = set(params) - set(_DEFAULTS)
    if unknown:
        raise BadParams(f"unknown parameters {sorted(unknown)}")
    return out


def axiom_formula(n: int, **params):
    """The instance of axiom ``n`` for the given (or default) parameters."""
    if n not in AXIOM_IDS:
        raise BadParams(f"no axiom {n}; expected one of {AXIOM_IDS}")
    p = _coerce(params)
    a, b, phi, psi = p["alpha"], p["beta"], p["phi"], p["psi"]
    if n == 1:
        return Implies(Box(a, Implies(phi, psi)), Implies(Box(a, phi), Box(a, psi)))
    if n == 2:
        return Implies(Box(a, And(phi, psi)), And(Box(a, phi), Box(a, psi)))
    if n == 3:
        return iff(Box(Choice(a, b), phi), And(Box(a, phi), Box(b, phi)))
    if n == 4:
        return iff(Box(Seq(a, b), phi), Box(a, Box(b, phi)))
    if n == 5:
        return iff(Box(Test(psi), phi), Implies(psi, phi))
    if n == 6:
        return Implies(And(phi, Box(Star(a), Implies(phi, Box(a, phi)))), Box(Star(a), phi))
    return iff(And(phi, Box(a, Box(Star(a), phi))), Box(Star(a), phi))


def derive_axiom(n: int, x: str = "x", **params) -> CyclicPreProof:
    """A closed cyclic proof of ``|- x:A`` for the instance ``A`` of axiom ``n``."""
    goal = axiom_formula(n, **params)
    p = _coerce(params)
    a, phi, psi = p["alpha"], p["phi"], p["psi"]
    b = ProofBuilder()
    factory = LabelFactory()
    root = b.open(_seq(right=[LabelledFormula(x, goal)]))
    lf = lambda f: LabelledFormula(x, f)  # noqa: E731
    if n == 1:
        (nid,) = b.step(root, "ImpR", lf(goal))
        (nid,) = b.step(nid, "ImpR", lf(goal.right))
        for leaf in necessitation_into(b, nid, a, {lf(Implies(phi, psi)), lf(phi)}, psi, x,
                                       factory):
            _must_close(b, leaf)
    elif n == 2:
        (nid,) = b.step(root, "ImpR", lf(goal))
        for k, (pid, target) in enumerate(zip(b.step(nid, "AndR", lf(goal.right)),
                                              (phi, psi))):
            for leaf in necessitation_into(b, pid, a, {lf(And(phi, psi))}, target, x, factory):
                _must_close(b, leaf)
    elif n == 6:
        _induction(b, root, goal, a, phi, x, factory)
    else:
        _must_close(b, root)
    return b.build(root)


def _must_close(b: ProofBuilder, nid: int):
    if not close_finite(b, nid):
        raise BadParams(f"could not close {b.sequent(nid)}")


def _induction(b, root, goal, a, phi, x, factory):
    lf = lambda f: LabelledFormula(x, f)  # noqa: E731
    hyp = Box(Star(a), Implies(phi, Box(a, phi)))
    (nid,) = b.step(root, "ImpR", lf(goal))
    (companion,) = b.step(nid, "AndL", lf(goal.left))
    base, step = b.step(companion, "StarR", lf(Box(Star(a), phi)))
    _must_close(b, base)
    (nid,) = b.step(step, "StarL", lf(hyp))
    done, nid = b.step(nid, "ImpL", lf(Implies(phi, Box(a, phi))))
    _must_close(b, done)
    if lf(phi) in b.sequent(nid).left and lf(phi) not in (lf(Box(a, phi)), lf(Box(a, hyp))):
        (nid,) = b.step(nid, "WL", lf(phi))
    gamma = {lf(phi), lf(hyp)}
    for leaf in necessitation_into(b, nid, a, gamma, Box(Star(a), phi), x, factory):
        b.bud(leaf, companion)


# --------------------------------------------------------------------------
# Hilbert proofs

@dataclass(frozen=True)
class AxiomInstance:
    """Axiom ``axiom`` (1..7) with parameters, or ``"taut"`` with ``formula``."""

    axiom: object
    params: dict = field(default_factory=dict)
    formula: object = None


@dataclass(frozen=True)
class ModusPonens:
    minor: int      # index of the step proving phi
    major: int      # index of the step proving phi -> psi


@dataclass(frozen=True)
class Necessitation:
    premise: int
    prog: object


@dataclass
class HilbertProof:
    steps: list

    def formulas(self) -> list:
        out = []
        for i, st in enumerate(self.steps):
            out.append(_step_formula(st, out, i))
        return out


def _earlier(k, i):
    if not isinstance(k, int) or not 0 <= k < i:
        raise IllFormedHilbertProof(f"step {i} refers to step {k}, which does not precede it")


def _step_formula(st, done: list, i: int):
    if isinstance(st, AxiomInstance):
        if st.axiom == "taut":
            f = parse_formula(st.formula) if isinstance(st.formula, str) else st.formula
            if f is None:
                raise IllFormedHilbertProof(f"step {i}: tautology without a formula")
            return f
        try:
            return axiom_formula(st.axiom, **st.params)
        except BadParams as e:
            raise IllFormedHilbertProof(f"step {i}: {e}") from e
    if isinstance(st, ModusPonens):
        _earlier(st.minor, i)
        _earlier(st.major, i)
        imp = done[st.major]
        if not isinstance(imp, Implies) or imp.left != done[st.minor]:
            raise IllFormedHilbertProof(f"step {i}: modus ponens does not match")
        return imp.right
    if isinstance(st, Necessitation):
        _earlier(st.premise, i)
        prog = parse_program(st.prog) if isinstance(st.prog, str) else st.prog
        return Box(prog, done[st.premise])
    raise IllFormedHilbertProof(f"step {i}: unknown step {st!r}")


def hilbert_to_cyclic(h: HilbertProof, x: str = "x") -> CyclicPreProof:
    """A cyclic proof of ``|- x:A`` for the last formula ``A`` of ``h``."""
    if not h.steps:
        raise IllFormedHilbertProof("empty Hilbert proof")
    formulas = h.formulas()
    proofs = []
    for i, (st, f) in enumerate(zip(h.steps, formulas)):
        lf = LabelledFormula(x, f)
        if isinstance(st, AxiomInstance) and st.axiom == "taut":
            d = finite_prove(_seq(right=[lf]), fuel=0)
            if d is None:
                raise IllFormedHilbertProof(f"step {i}: {f} is not a propositional tautology")
        elif isinstance(st, AxiomInstance):
            d = derive_axiom(st.axiom, x, **st.params)
        elif isinstance(st, ModusPonens):
            d = _modus_ponens(proofs[st.minor], proofs[st.major], formulas[st.minor], f, x)
        else:
            prog = parse_program(st.prog) if isinstance(st.prog, str) else st.prog
            b = ProofBuilder()
            root = b.open(_seq(right=[lf]))
            for leaf in necessitation_into(b, root, prog, (), formulas[st.premise], x):
                b.graft(leaf, proofs[st.premise])
            d = b.build(root)
        proofs.append(d)
    return proofs[-1]


def _modus_ponens(d_minor, d_major, phi, psi, x):
    lf = lambda f: LabelledFormula(x, f)  # noqa: E731
    cut = lf(And(phi, Implies(phi, psi)))
    b = ProofBuilder()
    root = b.open(_seq(right=[lf(psi)]))
    left, right = b.step(root, "Cut", params={"cut": cut},
                         premises=[_seq(right=[cut]), _seq([cut], [lf(psi)])])
    p1, p2 = b.step(left, "AndR", cut)
    b.graft(p1, d_minor)
    b.graft(p2, d_major)
    (nid,) = b.step(right, "AndL", cut)
    for leaf in b.step(nid, "ImpL", lf(Implies(phi, psi))):
        closed = b.close_axiom(leaf)
        assert closed
    return b.build(root)


def example_hilbert_proof() -> HilbertProof:
    """Five steps ending in ``[b*]([a]p -> [a]p)``."""
    return HilbertProof([
        AxiomInstance("taut", formula=parse_formula("p -> p")),
        Necessitation(0, parse_program("a")),
        AxiomInstance(1, {"alpha": "a", "phi": "p", "psi": "p"}),
        ModusPonens(1, 2),
        Necessitation(3, parse_program("b*")),
    ])
