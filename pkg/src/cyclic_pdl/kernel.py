"""Rule kernel: rule instances, premise computation, and checking of cyclic
pre-proofs.

Contexts are sets.  A premise written ``Γ, A`` stands for ``{A} ∪ Γ``, so a
principal item may or may not survive into a premise.  ``check_node``
accepts a premise exactly when some context Γ with
``conclusion \\ principals ⊆ Γ ⊆ conclusion`` makes the premise equal to
``new items ∪ Γ``.  ``apply_rule`` returns the canonical choice in which the
principal formula is consumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .syntax import (
    And, AtomicProg, Bottom, Box, Choice, Implies, LabelledFormula, Or, RelAtom,
    Seq, Sequent, Star, Test, labels_of, sorted_items, subst_label,
)

RULES = (
    "Ax", "Bot", "WL", "WR", "AndL", "AndR", "OrL", "OrR", "ImpL", "ImpR",
    "BoxL", "BoxR", "SeqL", "SeqR", "ChoiceL", "ChoiceR", "TestL", "TestR",
    "StarL", "StarR", "Subst", "Cut", "Bud",
)

ARITY = {r: 1 for r in RULES}
ARITY.update({r: 2 for r in ("AndR", "OrL", "ImpL", "ChoiceR", "TestL", "StarR", "Cut")})
ARITY.update({"Ax": 0, "Bot": 0, "Bud": 0, "Open": 0})

LEFT_RULES = {"WL", "AndL", "OrL", "ImpL", "BoxL", "SeqL", "ChoiceL", "TestL", "StarL"}
RIGHT_RULES = {"WR", "AndR", "OrR", "ImpR", "BoxR", "SeqR", "ChoiceR", "TestR", "StarR"}


class RuleError(Exception):
    def __init__(self, message: str, node: int | None = None, expected=None, found=None):
        self.node = node
        self.expected = expected
        self.found = found
        detail = message if node is None else f"node {node}: {message}"
        if expected is not None or found is not None:
            detail += f"\n  expected: {expected}\n  found:    {found}"
        super().__init__(detail)


class PrincipalMissing(RuleError):
    pass


class FreshnessViolated(RuleError):
    pass


class SideConditionFailed(RuleError):
    pass


@dataclass(frozen=True)
class ProofNode:
    id: int
    sequent: Sequent
    rule: str
    principal: object = None
    params: dict = field(default_factory=dict)
    premises: tuple = ()
    companion: int | None = None


@dataclass
class CyclicPreProof:
    nodes: dict
    root: int

    def __getitem__(self, nid: int) -> ProofNode:
        return self.nodes[nid]

    @property
    def companion(self) -> dict:
        return {n.id: n.companion for n in self.nodes.values() if n.rule == "Bud"}

    def parents(self) -> dict:
        out = {}
        for n in self.nodes.values():
            for p in n.premises:
                out.setdefault(p, []).append(n.id)
        return out

    def open_leaves(self) -> list:
        return [nid for nid in self.preorder() if self.nodes[nid].rule == "Open"]

    def preorder(self) -> list:
        out, stack, seen = [], [self.root], set()
        while stack:
            nid = stack.pop()
            if nid in seen or nid not in self.nodes:
                continue
            seen.add(nid)
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].premises))
        return out

    def path_to(self, nid: int) -> list:
        """Tree path from the root to ``nid`` (inclusive)."""
        parent = {}
        for n in self.nodes.values():
            for p in n.premises:
                parent[p] = n.id
        path = [nid]
        while path[-1] != self.root and path[-1] in parent:
            path.append(parent[path[-1]])
        return path[::-1]


# --------------------------------------------------------------------------
# Rule shapes

@dataclass
class _Shape:
    consumable: tuple   # (left items, right items) that may vanish
    canonical: tuple    # (left items, right items) removed by apply_rule
    new: list           # per premise: (left items, right items) added


def _need(cond: bool, rule: str, detail: str):
    if not cond:
        raise SideConditionFailed(f"{rule}: {detail}")


def _shape(s: Sequent, rule: str, principal, params: dict) -> _Shape:
    params = params or {}
    if rule in LEFT_RULES or rule in RIGHT_RULES:
        side = s.left if rule in LEFT_RULES else s.right
        if principal is None or principal not in side:
            where = "antecedent" if rule in LEFT_RULES else "consequent"
            raise PrincipalMissing(f"{rule}: principal {principal} not in {where}")
    if rule in ("WL", "WR"):
        gone = frozenset([principal])
        pair = (gone, frozenset()) if rule == "WL" else (frozenset(), gone)
        return _Shape(pair, pair, [(frozenset(), frozenset())])

    if rule in LEFT_RULES or rule in RIGHT_RULES:
        _need(isinstance(principal, LabelledFormula), rule, "principal must be a labelled formula")
        x, f = principal.label, principal.formula
    one = frozenset

    def L(*items):
        return (one(items), one())

    def R(*items):
        return (one(), one(items))

    def lf(formula):
        return LabelledFormula(x, formula)

    if rule == "AndL":
        _need(isinstance(f, And), rule, "principal is not a conjunction")
        return _Shape(L(principal), L(principal), [L(lf(f.left), lf(f.right))])
    if rule == "AndR":
        _need(isinstance(f, And), rule, "principal is not a conjunction")
        return _Shape(R(principal), R(principal), [R(lf(f.left)), R(lf(f.right))])
    if rule == "OrL":
        _need(isinstance(f, Or), rule, "principal is not a disjunction")
        return _Shape(L(principal), L(principal), [L(lf(f.left)), L(lf(f.right))])
    if rule == "OrR":
        _need(isinstance(f, Or), rule, "principal is not a disjunction")
        return _Shape(R(principal), R(principal), [R(lf(f.left), lf(f.right))])
    if rule == "ImpL":
        _need(isinstance(f, Implies), rule, "principal is not an implication")
        return _Shape(L(principal), L(principal), [R(lf(f.left)), L(lf(f.right))])
    if rule == "ImpR":
        _need(isinstance(f, Implies), rule, "principal is not an implication")
        return _Shape(R(principal), R(principal), [(one([lf(f.left)]), one([lf(f.right)]))])

    if rule in ("BoxL", "BoxR", "SeqL", "SeqR", "ChoiceL", "ChoiceR",
                "TestL", "TestR", "StarL", "StarR"):
        _need(isinstance(f, Box), rule, "principal is not a box formula")
        prog, body = f.prog, f.body
    if rule == "BoxL":
        _need(isinstance(prog, AtomicProg), rule, "modality is not atomic")
        y = params.get("successor")
        _need(isinstance(y, str), rule, "missing 'successor' parameter")
        atom = RelAtom(x, prog.name, y)
        if atom not in s.left:
            raise SideConditionFailed(f"BoxL: relational atom {atom} not in antecedent")
        return _Shape(L(principal, atom), L(principal), [L(LabelledFormula(y, body))])
    if rule == "BoxR":
        _need(isinstance(prog, AtomicProg), rule, "modality is not atomic")
        y = params.get("fresh")
        _need(isinstance(y, str), rule, "missing 'fresh' parameter")
        if y in labels_of(s):
            raise FreshnessViolated(f"BoxR: label {y} occurs in the conclusion")
        new = (one([RelAtom(x, prog.name, y)]), one([LabelledFormula(y, body)]))
        return _Shape(R(principal), R(principal), [new])
    if rule == "SeqL":
        _need(isinstance(prog, Seq), rule, "modality is not a composition")
        return _Shape(L(principal), L(principal), [L(lf(Box(prog.first, Box(prog.second, body))))])
    if rule == "SeqR":
        _need(isinstance(prog, Seq), rule, "modality is not a composition")
        return _Shape(R(principal), R(principal), [R(lf(Box(prog.first, Box(prog.second, body))))])
    if rule == "ChoiceL":
        _need(isinstance(prog, Choice), rule, "modality is not a choice")
        return _Shape(L(principal), L(principal),
                      [L(lf(Box(prog.left, body)), lf(Box(prog.right, body)))])
    if rule == "ChoiceR":
        _need(isinstance(prog, Choice), rule, "modality is not a choice")
        return _Shape(R(principal), R(principal),
                      [R(lf(Box(prog.left, body))), R(lf(Box(prog.right, body)))])
    if rule == "TestL":
        _need(isinstance(prog, Test), rule, "modality is not a test")
        return _Shape(L(principal), L(principal), [R(lf(prog.cond)), L(lf(body))])
    if rule == "TestR":
        _need(isinstance(prog, Test), rule, "modality is not a test")
        return _Shape(R(principal), R(principal), [(one([lf(prog.cond)]), one([lf(body)]))])
    if rule == "StarL":
        _need(isinstance(prog, Star), rule, "modality is not an iteration")
        return _Shape(L(principal), L(principal), [L(lf(body), lf(Box(prog.body, f)))])
    if rule == "StarR":
        _need(isinstance(prog, Star), rule, "modality is not an iteration")
        return _Shape(R(principal), R(principal), [R(lf(body)), R(lf(Box(prog.body, f)))])
    raise SideConditionFailed(f"no shape for rule {rule}")


def _check_axiom(s: Sequent, rule: str, principal):
    if rule == "Ax":
        if principal is None or principal not in s.left or principal not in s.right:
            raise PrincipalMissing(f"Ax: {principal} is not on both sides")
    elif rule == "Bot":
        ok = (isinstance(principal, LabelledFormula) and isinstance(principal.formula, Bottom)
              and principal in s.left)
        if not ok:
            raise PrincipalMissing(f"Bot: {principal} is not a falsum in the antecedent")


def apply_rule(s: Sequent, rule: str, principal=None, params: dict | None = None,
               keep: bool = False) -> list:
    """Premises of ``rule`` applied to ``s`` read bottom-up.

    The principal formula is consumed unless ``keep`` is set (relational
    atoms are never consumed).  ``Subst`` returns the premise obtained by
    renaming ``to`` back to ``from``; ``Cut`` keeps the full context on both
    premises.
    """
    params = params or {}
    if rule in ("Ax", "Bot"):
        _check_axiom(s, rule, principal)
        return []
    if rule in ("Bud", "Open"):
        return []
    if rule == "Subst":
        src, dst = params.get("from"), params.get("to")
        if not (isinstance(src, str) and isinstance(dst, str)):
            raise SideConditionFailed("Subst: needs 'from' and 'to' labels")
        if src != dst and src in labels_of(s):
            raise SideConditionFailed(f"Subst: label {src} still occurs in the conclusion")
        return [subst_label(s, dst, src)]
    if rule == "Cut":
        a = params.get("cut")
        if a is None:
            raise SideConditionFailed("Cut: needs a 'cut' item")
        return [Sequent(s.left, s.right | {a}), Sequent(s.left | {a}, s.right)]
    if rule not in RULES:
        raise SideConditionFailed(f"unknown rule {rule}")
    sh = _shape(s, rule, principal, params)
    left = s.left if keep else s.left - sh.canonical[0]
    right = s.right if keep else s.right - sh.canonical[1]
    return [Sequent(left | nl, right | nr) for nl, nr in sh.new]


def _premise_matches(c: Sequent, p: Sequent, consumable, new) -> bool:
    for cs, ps, k, n in ((c.left, p.left, consumable[0], new[0]),
                         (c.right, p.right, consumable[1], new[1])):
        if not (n <= ps and (ps - n) <= cs and (cs - k) <= ps):
            return False
    return True


def check_rule_instance(conclusion: Sequent, rule: str, principal, params: dict,
                        premises: list) -> None:
    """Raise a :class:`RuleError` unless the instance is a valid rule application."""
    params = params or {}
    arity = ARITY.get(rule)
    if arity is None:
        raise SideConditionFailed(f"unknown rule {rule}")
    if len(premises) != arity:
        raise SideConditionFailed(f"{rule} needs {arity} premise(s), got {len(premises)}")
    if rule in ("Ax", "Bot"):
        _check_axiom(conclusion, rule, principal)
        return
    if rule in ("Bud", "Open"):
        return
    if rule == "Subst":
        src, dst = params.get("from"), params.get("to")
        if not (isinstance(src, str) and isinstance(dst, str)):
            raise SideConditionFailed("Subst: needs 'from' and 'to' labels")
        got = subst_label(premises[0], src, dst)
        if got != conclusion:
            raise SideConditionFailed("Subst: premise does not rename to the conclusion",
                                      expected=conclusion, found=got)
        return
    if rule == "Cut":
        a = params.get("cut")
        if a is None:
            raise SideConditionFailed("Cut: needs a 'cut' item")
        p1, p2 = premises
        if a not in p1.right or a not in p2.left:
            raise SideConditionFailed(f"Cut: cut item {a} missing from a premise")
        for delta in {p1.right - {a}, p1.right}:
            for sigma in {p2.left - {a}, p2.left}:
                if p1.left | sigma == conclusion.left and delta | p2.right == conclusion.right:
                    return
        raise SideConditionFailed("Cut: premises do not combine to the conclusion",
                                  expected=apply_rule(conclusion, rule, principal, params),
                                  found=list(premises))
    sh = _shape(conclusion, rule, principal, params)
    for i, (prem, new) in enumerate(zip(premises, sh.new)):
        if not _premise_matches(conclusion, prem, sh.consumable, new):
            expected = apply_rule(conclusion, rule, principal, params)[i]
            raise SideConditionFailed(f"{rule}: premise {i} does not match", expected=expected,
                                      found=prem)
    if rule == "BoxR":
        y = params["fresh"]
        x, f = principal.label, principal.formula
        prem = premises[0]
        if RelAtom(x, f.prog.name, y) not in prem.left:
            raise SideConditionFailed("BoxR: premise lacks the new relational atom")


def check_node(proof: CyclicPreProof, nid: int) -> list:
    """Errors for one node (empty when the node is a valid rule instance)."""
    n = proof.nodes[nid]
    errors = []
    if n.rule == "Bud":
        if n.premises:
            errors.append(RuleError("a bud has no premises", nid))
        comp = proof.nodes.get(n.companion)
        if comp is None:
            errors.append(RuleError(f"companion {n.companion} does not exist", nid))
        elif comp.rule in ("Bud", "Open") or not comp.premises:
            errors.append(RuleError(f"companion {n.companion} is not an internal node", nid))
        elif comp.sequent != n.sequent:
            errors.append(RuleError("companion sequent mismatch", nid,
                                    expected=comp.sequent, found=n.sequent))
        return errors
    if n.companion is not None:
        errors.append(RuleError("only buds have companions", nid))
    try:
        prem = [proof.nodes[p].sequent for p in n.premises]
    except KeyError as e:
        return [RuleError(f"dangling premise id {e.args[0]}", nid)]
    try:
        check_rule_instance(n.sequent, n.rule, n.principal, n.params, prem)
    except RuleError as e:
        e.node = nid
        e.args = (f"node {nid}: {e.args[0]}",)
        errors.append(e)
    return errors


def check_pre_proof(proof: CyclicPreProof, allow_open: bool = False) -> list:
    """All local and structural errors of ``proof`` (empty list means ok).

    The trace condition is not checked here.
    """
    errors = []
    if proof.root not in proof.nodes:
        return [RuleError(f"no root: {proof.root} is not a node")]
    parent = {}
    for n in proof.nodes.values():
        for p in n.premises:
            if p not in proof.nodes:
                errors.append(RuleError(f"dangling premise id {p}", n.id))
            elif p in parent:
                errors.append(RuleError(f"node {p} has two parents", n.id))
            else:
                parent[p] = n.id
    if proof.root in parent:
        errors.append(RuleError("the root is a premise of another node", proof.root))
    reached = set()
    stack = [proof.root]
    while stack:
        nid = stack.pop()
        if nid in reached:
            errors.append(RuleError("premise edges form a cycle", nid))
            continue
        reached.add(nid)
        stack.extend(p for p in proof.nodes[nid].premises if p in proof.nodes)
    for nid in sorted(set(proof.nodes) - reached):
        errors.append(RuleError("unreachable from the root", nid))
    for nid in sorted(proof.nodes):
        if proof.nodes[nid].rule == "Open" and not allow_open:
            errors.append(RuleError("open leaf", nid))
        errors.extend(check_node(proof, nid))
    return errors


def edges(proof: CyclicPreProof):
    """Yield ``(parent, premise index, target, bud)`` for the cycle graph.

    ``target`` is the premise itself, or its companion when it is a bud.
    """
    for nid in proof.preorder():
        n = proof.nodes[nid]
        if n.rule == "Bud":
            continue
        for i, p in enumerate(n.premises):
            pn = proof.nodes[p]
            if pn.rule == "Bud":
                yield nid, i, pn.companion, p
            else:
                yield nid, i, p, None


def cycle_graph(proof: CyclicPreProof) -> nx.MultiDiGraph:
    """Derivation graph with every bud identified with its companion."""
    g = nx.MultiDiGraph()
    for nid in proof.preorder():
        if proof.nodes[nid].rule != "Bud":
            g.add_node(nid)
    for src, i, dst, bud in edges(proof):
        g.add_edge(src, dst, key=i, bud=bud)
    return g


# --------------------------------------------------------------------------
# Construction

class ProofBuilder:
    """Grow a derivation from its root upwards.

    Nodes start as ``Open`` leaves; ``step`` turns a leaf into a rule
    instance and returns the ids of its (new, open) premises.
    """

    def __init__(self):
        self.nodes = {}
        self.parent = {}
        self._next = 0

    def open(self, sequent: Sequent) -> int:
        nid = self._next
        self._next += 1
        self.nodes[nid] = ProofNode(nid, sequent, "Open")
        return nid

    def sequent(self, nid: int) -> Sequent:
        return self.nodes[nid].sequent

    def step(self, nid: int, rule: str, principal=None, params=None, premises=None,
             keep: bool = False) -> list:
        node = self.nodes[nid]
        assert node.rule == "Open", f"node {nid} is already closed"
        params = dict(params or {})
        if premises is None:
            premises = apply_rule(node.sequent, rule, principal, params, keep=keep)
        check_rule_instance(node.sequent, rule, principal, params, premises)
        ids = [self.open(p) for p in premises]
        for i in ids:
            self.parent[i] = nid
        self.nodes[nid] = ProofNode(nid, node.sequent, rule, principal, params, tuple(ids))
        return ids

    def path_to(self, nid: int) -> list:
        """Node ids from the first node without a parent down to ``nid``."""
        path = [nid]
        while path[-1] in self.parent:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def bud(self, nid: int, companion: int):
        node = self.nodes[nid]
        assert node.rule == "Open"
        self.nodes[nid] = ProofNode(nid, node.sequent, "Bud", companion=companion)

    def weaken_to(self, nid: int, target: Sequent) -> int:
        """Apply WL/WR steps until the leaf's sequent is ``target``."""
        s = self.nodes[nid].sequent
        if not target.issubset(s):
            raise SideConditionFailed(f"cannot weaken {s} to {target}")
        for item in sorted_items(s.left - target.left):
            (nid,) = self.step(nid, "WL", item)
        for item in sorted_items(s.right - target.right):
            (nid,) = self.step(nid, "WR", item)
        return nid

    def close_axiom(self, nid: int) -> bool:
        """Close a leaf with Ax or Bot after weakening, if possible."""
        s = self.nodes[nid].sequent
        bots = [i for i in s.left
                if isinstance(i, LabelledFormula) and isinstance(i.formula, Bottom)]
        if bots:
            b = min(bots, key=str)
            leaf = self.weaken_to(nid, Sequent(frozenset([b]), frozenset()))
            self.step(leaf, "Bot", b)
            return True
        shared = s.left & s.right
        if shared:
            a = min(shared, key=lambda i: (isinstance(i, LabelledFormula), str(i)))
            leaf = self.weaken_to(nid, Sequent(frozenset([a]), frozenset([a])))
            self.step(leaf, "Ax", a)
            return True
        return False

    def graft(self, nid: int, proof: CyclicPreProof):
        """Replace the open leaf ``nid`` by a copy of ``proof`` (same sequent)."""
        node = self.nodes[nid]
        assert node.rule == "Open"
        root = proof.nodes[proof.root]
        if root.sequent != node.sequent:
            raise SideConditionFailed("graft: sequents differ", expected=node.sequent,
                                      found=root.sequent)
        ids = {}
        for old in proof.preorder():
            ids[old] = nid if old == proof.root else self.open(proof.nodes[old].sequent)
        for old, new in ids.items():
            n = proof.nodes[old]
            for p in n.premises:
                self.parent[ids[p]] = new
            self.nodes[new] = ProofNode(
                new, n.sequent, n.rule, n.principal, dict(n.params),
                tuple(ids[p] for p in n.premises),
                None if n.companion is None else ids[n.companion],
            )
        return ids

    def open_leaves(self, root: int = 0) -> list:
        return [nid for nid in self.build(root).preorder() if self.nodes[nid].rule == "Open"]

    def build(self, root: int = 0) -> CyclicPreProof:
        return CyclicPreProof(dict(self.nodes), root)
