"""Concrete syntax for formulas, programs and sequents, and the JSON formats
for proofs and models.

Grammar (loosest binding first)::

    formula  := disj ('->' formula)?            right associative
    disj     := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := '[' program ']' unary | 'false' | NAME | '(' formula ')'
    program  := seqp ('+' seqp)*
    seqp     := post (';' post)*
    post     := prim '*'*
    prim     := formula '?' | NAME | '(' program ')'

    sequent  := items? '|-' items?
    item     := LABEL ':' formula | LABEL '-' NAME '->' LABEL
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .syntax import (
    BOTTOM, And, Atom, AtomicProg, Box, Choice, Implies, LabelledFormula, Or,
    RelAtom, Seq, Sequent, Star, Test, show_formula, show_program,
)

PROOF_SCHEMA = "g3pdl-proof/1"
MODEL_SCHEMA = "g3pdl-model/1"


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan, text: str = ""):
        self.span = span
        self.text = text
        super().__init__(f"{message} at {span.start}:{span.end}")

    def excerpt(self) -> str:
        if not self.text:
            return str(self)
        caret = " " * self.span.start + "^" * max(1, self.span.end - self.span.start)
        return f"{self.text}\n{caret}\n{self}"


class SchemaError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\|-)|(->)|([A-Za-z_][A-Za-z0-9_']*)|([\[\]()&|;+*?,:\-]))")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "name" or the punctuation itself, or "eof"
    text: str
    start: int
    end: int


def _lex(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceSpan(pos, pos + 1), text)
        if m.group(3):
            toks.append(_Tok("name", m.group(3), m.start(3), m.end(3)))
        else:
            sym = m.group(1) or m.group(2) or m.group(4)
            start = m.end() - len(sym)
            toks.append(_Tok(sym, sym, start, m.end()))
        pos = m.end()
    toks.append(_Tok("eof", "", n, n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0
        self._test_memo = {}

    # helpers
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str):
        t = self.peek()
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected {expected}, found {found}",
                         SourceSpan(t.start, max(t.end, t.start)), self.text)

    def expect(self, kind: str, what: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            self.error(what or repr(kind))
        self.i += 1
        return t

    def accept(self, kind: str) -> bool:
        if self.peek().kind == kind:
            self.i += 1
            return True
        return False

    # formulas
    def formula(self):
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.formula())
        return left

    def disj(self):
        f = self.conj()
        while self.accept("|"):
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self):
        t = self.peek()
        if t.kind == "[":
            self.i += 1
            prog = self.program()
            self.expect("]", "']'")
            return Box(prog, self.unary())
        if t.kind == "name":
            self.i += 1
            return BOTTOM if t.text == "false" else Atom(t.text)
        if t.kind == "(":
            self.i += 1
            f = self.formula()
            self.expect(")", "')'")
            return f
        self.error("a formula")

    # programs
    def program(self):
        p = self.seqp()
        while self.accept("+"):
            p = Choice(p, self.seqp())
        return p

    def seqp(self):
        p = self.post()
        while self.accept(";"):
            p = Seq(p, self.post())
        return p

    def post(self):
        p = self.prim()
        while self.accept("*"):
            p = Star(p)
        return p

    def _try_test(self):
        start = self.i
        if start in self._test_memo:
            res = self._test_memo[start]
            if res is not None:
                self.i = res[1]
                return res[0]
            return None
        res = None
        try:
            f = self.formula()
            if self.accept("?"):
                res = (Test(f), self.i)
        except ParseError:
            pass
        self._test_memo[start] = res
        if res is None:
            self.i = start
            return None
        self.i = res[1]
        return res[0]

    def prim(self):
        test = self._try_test()
        if test is not None:
            return test
        t = self.peek()
        if t.kind == "name" and t.text != "false":
            self.i += 1
            return AtomicProg(t.text)
        if t.kind == "(":
            self.i += 1
            p = self.program()
            self.expect(")", "')'")
            return p
        self.error("a program")

    # sequents
    def item(self):
        lab = self.expect("name", "a label")
        if lab.text == "false":
            self.i -= 1
            self.error("a label")
        if self.accept(":"):
            return LabelledFormula(lab.text, self.formula())
        if self.accept("-"):
            prog = self.expect("name", "an atomic program")
            self.expect("->", "'->'")
            dst = self.expect("name", "a label")
            return RelAtom(lab.text, prog.text, dst.text)
        self.error("':' or '-'")

    def items(self, stop: str):
        out = []
        if self.peek().kind == stop:
            return out
        out.append(self.item())
        while self.accept(","):
            out.append(self.item())
        return out

    def sequent(self):
        left = self.items("|-")
        self.expect("|-", "',' or '|-'")
        right = self.items("eof")
        return Sequent(frozenset(left), frozenset(right))

    def finish(self, value):
        if self.peek().kind != "eof":
            self.error("end of input")
        return value


def parse_formula(text: str):
    p = _Parser(text)
    return p.finish(p.formula())


def parse_program(text: str):
    p = _Parser(text)
    return p.finish(p.program())


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    return p.finish(p.sequent())


def parse_item(text: str):
    p = _Parser(text)
    return p.finish(p.item())


def render_formula(f) -> str:
    return show_formula(f)


def render_program(p) -> str:
    return show_program(p)


def render_sequent(s: Sequent) -> str:
    return str(s)


# --------------------------------------------------------------------------
# Proof documents

def _load(doc):
    if isinstance(doc, (str, bytes)):
        try:
            return json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not valid JSON: {e}") from None
    return doc


def _parse_params(rule: str, raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise SchemaError("params must be an object")
    out = {}
    for k, v in raw.items():
        if not isinstance(v, str):
            raise SchemaError(f"param {k!r} must be a string")
        out[k] = parse_item(v) if k == "cut" else v
    return out


def parse_proof(doc):
    """Build a :class:`~cyclic_pdl.kernel.CyclicPreProof` from its JSON form."""
    from .kernel import RULES, CyclicPreProof, ProofNode

    d = _load(doc)
    if not isinstance(d, dict):
        raise SchemaError("proof document must be an object")
    if d.get("schema") != PROOF_SCHEMA:
        raise SchemaError(f"schema must be {PROOF_SCHEMA!r}")
    raw_nodes = d.get("nodes")
    if not isinstance(raw_nodes, list):
        raise SchemaError("nodes must be an array")
    if not raw_nodes:
        raise SchemaError("no root: empty node list")
    nodes = {}
    for raw in raw_nodes:
        if not isinstance(raw, dict):
            raise SchemaError("node must be an object")
        try:
            nid = raw["id"]
            rule = raw["rule"]
            text = raw["sequent"]
        except KeyError as e:
            raise SchemaError(f"node missing field {e.args[0]!r}") from None
        if not isinstance(nid, int) or isinstance(nid, bool):
            raise SchemaError("node id must be an integer")
        if nid in nodes:
            raise SchemaError(f"duplicate node id {nid}")
        if rule not in RULES:
            raise SchemaError(f"node {nid}: unknown rule {rule!r}")
        try:
            seq = parse_sequent(text)
            principal = raw.get("principal")
            principal = parse_item(principal) if principal is not None else None
            params = _parse_params(rule, raw.get("params") or {})
        except ParseError as e:
            raise SchemaError(f"node {nid}: {e}") from None
        premises = raw.get("premises") or []
        if not all(isinstance(p, int) for p in premises):
            raise SchemaError(f"node {nid}: premises must be integers")
        companion = raw.get("companion")
        if rule == "Bud" and not isinstance(companion, int):
            raise SchemaError(f"node {nid}: Bud needs an integer companion")
        if rule != "Bud" and companion is not None:
            raise SchemaError(f"node {nid}: only Bud nodes have a companion")
        nodes[nid] = ProofNode(nid, seq, rule, principal, params, tuple(premises), companion)
    root = d.get("root")
    if root not in nodes:
        raise SchemaError("no root: root id missing or absent from nodes")
    for n in nodes.values():
        for p in n.premises:
            if p not in nodes:
                raise SchemaError(f"node {n.id}: dangling premise id {p}")
        if n.companion is not None and n.companion not in nodes:
            raise SchemaError(f"node {n.id}: companion id {n.companion} absent from tree")
    return CyclicPreProof(nodes, root)


def proof_to_dict(proof) -> dict:
    nodes = []
    for nid in sorted(proof.nodes):
        n = proof.nodes[nid]
        entry = {
            "id": n.id,
            "sequent": str(n.sequent),
            "rule": n.rule,
            "principal": None if n.principal is None else str(n.principal),
            "params": {k: str(v) for k, v in sorted(n.params.items())},
            "premises": list(n.premises),
        }
        if n.rule == "Bud":
            entry["companion"] = n.companion
        nodes.append(entry)
    return {"schema": PROOF_SCHEMA, "root": proof.root, "nodes": nodes}


def render_proof(proof) -> str:
    return json.dumps(proof_to_dict(proof), indent=2)


# --------------------------------------------------------------------------
# Model documents

def parse_model(doc):
    """Build a :class:`~cyclic_pdl.semantics.KripkeModel` from its JSON form."""
    from .semantics import KripkeModel

    d = _load(doc)
    if not isinstance(d, dict):
        raise SchemaError("model document must be an object")
    if d.get("schema", MODEL_SCHEMA) != MODEL_SCHEMA:
        raise SchemaError(f"schema must be {MODEL_SCHEMA!r}")
    states = d.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise SchemaError("states must be an array of strings")
    if not states:
        raise SchemaError("at least one state required")
    known = set(states)
    props = {}
    for name, members in (d.get("props") or {}).items():
        if not isinstance(members, list):
            raise SchemaError(f"prop {name!r}: expected a state list")
        for s in members:
            if s not in known:
                raise SchemaError(f"prop {name!r}: unknown state {s!r}")
        props[name] = frozenset(members)
    progs = {}
    for name, edges in (d.get("progs") or {}).items():
        if not isinstance(edges, list):
            raise SchemaError(f"prog {name!r}: expected an edge list")
        rel = set()
        for e in edges:
            if not (isinstance(e, list) and len(e) == 2):
                raise SchemaError(f"prog {name!r}: edges are [source, target] pairs")
            for s in e:
                if s not in known:
                    raise SchemaError(f"prog {name!r}: unknown state {s!r}")
            rel.add((e[0], e[1]))
        progs[name] = frozenset(rel)
    return KripkeModel(tuple(states), props, progs)


def parse_valuation(doc) -> dict:
    """The optional ``valuation`` entry of a model document."""
    d = _load(doc)
    val = d.get("valuation") or {}
    states = set(d.get("states") or [])
    for lab, s in val.items():
        if s not in states:
            raise SchemaError(f"valuation of {lab!r}: unknown state {s!r}")
    return dict(val)


def model_to_dict(model, valuation: dict | None = None) -> dict:
    out = {
        "schema": MODEL_SCHEMA,
        "states": list(model.states),
        "props": {k: sorted(v) for k, v in sorted(model.props.items())},
        "progs": {k: sorted([list(e) for e in v]) for k, v in sorted(model.progs.items())},
    }
    if valuation is not None:
        out["valuation"] = dict(sorted(valuation.items()))
    return out


def render_model(model, valuation: dict | None = None) -> str:
    return json.dumps(model_to_dict(model, valuation), indent=2)
