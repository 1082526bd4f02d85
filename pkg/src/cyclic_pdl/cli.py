"""Command-line interface: ``pdl parse|check|prove|modelcheck|axioms``.

Exit codes: 0 success, 1 negative verdict, 2 usage or I/O error, 3 unknown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .kernel import check_pre_proof
from .parser import (
    ParseError, SchemaError, model_to_dict, parse_formula, parse_model, parse_proof,
    parse_sequent, parse_valuation, proof_to_dict, render_formula, render_model, render_proof,
    render_sequent,
)
from .schemata import AXIOM_NAMES, BadParams, axiom_formula, derive_axiom
from .search import (
    Countermodel, NotAcyclic, NotTestFree, Proof, SearchBudget, prove_test_free,
)
from .semantics import satisfies_sequent
from .syntax import LabelledFormula, Sequent
from .traces import check_gtc

OK, NEGATIVE, USAGE, UNKNOWN = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, message: str, code: int = USAGE):
        super().__init__(message)
        self.code = code


def _color(text: str, code: str) -> str:
    if os.environ.get("PDL_COLOR", "0") == "1":
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _emit(args, verdict: str, code: int, text: str, **fields) -> int:
    if args.json:
        print(json.dumps({"verdict": verdict, "exit": code, **fields}, indent=2))
    else:
        print(text)
    return code


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _Fail(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
    except OSError as e:
        raise _Fail(f"cannot write {path}: {e.strerror}") from None


def _goal(text: str, as_sequent: bool) -> Sequent:
    if as_sequent:
        return parse_sequent(text)
    return Sequent(frozenset(), frozenset([LabelledFormula("x", parse_formula(text))]))


# --------------------------------------------------------------------------
# Commands

def cmd_parse(args) -> int:
    if args.sequent:
        out = render_sequent(parse_sequent(args.text))
    else:
        out = render_formula(parse_formula(args.text))
    return _emit(args, "ok", OK, out, canonical=out)


def cmd_check(args) -> int:
    try:
        proof = parse_proof(_read(args.file))
    except SchemaError as e:
        raise _Fail(f"{args.file}: {e}") from None
    errors = check_pre_proof(proof)
    if errors:
        text = "\n".join(["invalid pre-proof:"] + [f"  {e}" for e in errors])
        return _emit(args, "invalid", NEGATIVE, _color(text, "31"),
                     errors=[str(e) for e in errors])
    verdict = check_gtc(proof)
    if verdict.accepted:
        return _emit(args, "valid", OK, "valid cyclic proof")
    if verdict.status == "Rejected":
        text = f"GTC violated\n  {verdict.describe()}"
        return _emit(args, "rejected", NEGATIVE, _color(text, "31"),
                     stem=list(verdict.stem), loop=list(verdict.loop))
    return _emit(args, "unknown", UNKNOWN, "GTC check inconclusive")


def cmd_prove(args) -> int:
    goal = _goal(args.goal, args.sequent)
    budget = SearchBudget(args.max_steps, args.max_iters, args.max_history)
    try:
        out = prove_test_free(goal, budget)
    except NotTestFree:
        raise _Fail("test programs unsupported by search") from None
    except NotAcyclic:
        raise _Fail("cyclic antecedents unsupported by search") from None
    stats = {"rounds": out.stats.rounds, "nodes": out.stats.nodes}
    if isinstance(out, Proof):
        if args.emit_proof:
            _write(args.emit_proof, render_proof(out.proof))
        return _emit(args, "proof", OK,
                     f"proved {goal} ({len(out.proof.nodes)} nodes)"
                     + (f"; proof written to {args.emit_proof}" if args.emit_proof else ""),
                     stats=stats, proof=proof_to_dict(out.proof))
    if isinstance(out, Countermodel):
        if args.emit_model:
            _write(args.emit_model, render_model(out.model, out.valuation))
        text = f"countermodel for {goal}:\n{render_model(out.model, out.valuation)}"
        return _emit(args, "countermodel", NEGATIVE, _color(text, "33"), stats=stats,
                     model=model_to_dict(out.model, out.valuation))
    return _emit(args, "unknown", UNKNOWN, f"unknown: {out.reason}", stats=stats,
                 reason=out.reason)


def _valuation(pairs, doc: str) -> dict:
    val = parse_valuation(doc)
    for p in pairs or ():
        lab, sep, state = p.partition("=")
        if not sep or not lab or not state:
            raise _Fail(f"bad --val {p!r}; expected label=state")
        val[lab.strip()] = state.strip()
    return val


def cmd_modelcheck(args) -> int:
    doc = _read(args.model)
    try:
        model = parse_model(doc)
        val = _valuation(args.val, doc)
    except SchemaError as e:
        raise _Fail(f"{args.model}: {e}") from None
    seq = parse_sequent(args.sequent)
    unknown = set(val.values()) - set(model.states)
    if unknown:
        raise _Fail(f"valuation names unknown states {sorted(unknown)}")
    try:
        ok = satisfies_sequent(model, val, seq)
    except ValueError as e:
        raise _Fail(str(e)) from None
    if ok:
        return _emit(args, "satisfied", OK, f"satisfied: {seq}")
    return _emit(args, "falsified", NEGATIVE, _color(f"falsified: {seq}", "33"))


def cmd_axioms(args) -> int:
    ids = [args.axiom] if args.axiom is not None else [1, 2, 3, 4, 5, 6]
    params = {k: v for k, v in (("alpha", args.alpha), ("beta", args.beta), ("phi", args.phi),
                                ("psi", args.psi)) if v is not None}
    written = []
    for n in ids:
        try:
            f = axiom_formula(n, **params)
            proof = derive_axiom(n, **params)
        except (BadParams, ParseError) as e:
            raise _Fail(f"axiom {n}: {e}") from None
        ok = not check_pre_proof(proof) and check_gtc(proof).accepted
        if not ok:
            raise _Fail(f"axiom {n}: derived proof failed validation", NEGATIVE)
        path = None
        if args.emit:
            path = str(Path(args.emit) / f"axiom{n}.proof.json")
            _write(path, render_proof(proof))
        written.append({"axiom": n, "name": AXIOM_NAMES[n], "formula": render_formula(f), "file": path,
                        "nodes": len(proof.nodes)})
    lines = [f"axiom {w['axiom']} ({w['name']}): {w['formula']}  [{w['nodes']} nodes, ok]"
             + (f" -> {w['file']}" if w["file"] else "") for w in written]
    return _emit(args, "ok", OK, "\n".join(lines), axioms=written)


# --------------------------------------------------------------------------
# Entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdl", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="echo a formula or sequent canonically")
    p.add_argument("text")
    p.add_argument("--sequent", action="store_true", help="parse a sequent, not a formula")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", parents=[common], help="validate a cyclic proof file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prove", parents=[common], help="search for a proof or countermodel")
    p.add_argument("goal")
    p.add_argument("--sequent", action="store_true", help="goal is a sequent")
    p.add_argument("--max-steps", type=int, default=SearchBudget.max_steps)
    p.add_argument("--max-iters", type=int, default=SearchBudget.max_iters)
    p.add_argument("--max-history", type=int, default=SearchBudget.max_history)
    p.add_argument("--emit-proof", metavar="FILE")
    p.add_argument("--emit-model", metavar="FILE")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("modelcheck", parents=[common], help="evaluate a sequent in a model")
    p.add_argument("model")
    p.add_argument("--sequent", required=True)
    p.add_argument("--val", action="append", metavar="LABEL=STATE")
    p.set_defaults(func=cmd_modelcheck)

    p = sub.add_parser("axioms", parents=[common], help="derive the PDL axioms")
    p.add_argument("--emit", metavar="DIR")
    p.add_argument("--axiom", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--phi")
    p.add_argument("--psi")
    p.set_defaults(func=cmd_axioms)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.func(args)
    except ParseError as e:
        return _fail(args, f"syntax error: {e}\n{e.excerpt().rsplit(chr(10), 1)[0]}", USAGE)
    except _Fail as e:
        return _fail(args, str(e), e.code)


def _fail(args, message: str, code: int) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"verdict": "error", "exit": code, "error": message}, indent=2))
    else:
        print(_color(message, "31"), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
