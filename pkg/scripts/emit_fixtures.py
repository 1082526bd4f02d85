"""Write the axiom proofs, the bundled fixtures and a few prover outputs to a directory.

Every file written is re-read and re-checked before the script exits.

    python3 scripts/emit_fixtures.py out/
"""

from __future__ import annotations

import argparse
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import cyclic_pdl
from cyclic_pdl.kernel import check_pre_proof
from cyclic_pdl.parser import parse_formula, parse_proof, render_model, render_proof
from cyclic_pdl.schemata import AXIOM_IDS, derive_axiom, example_hilbert_proof, hilbert_to_cyclic
from cyclic_pdl.search import Countermodel, Proof, prove_test_free
from cyclic_pdl.syntax import LabelledFormula, Sequent
from cyclic_pdl.traces import check_gtc


@dataclass
class EmitConfig:
    out: Path
    goals: list = field(default_factory=lambda: [
        "[a*]p -> [a*;a*]p", "[a*]p -> [a][a*]p", "p -> [a]p", "[a*]p -> [b]p",
    ])


def _check(path: Path) -> str:
    proof = parse_proof(path.read_text())
    errors = check_pre_proof(proof)
    if errors:
        return f"invalid ({errors[0]})"
    return check_gtc(proof).status


def emit(cfg: EmitConfig) -> list:
    cfg.out.mkdir(parents=True, exist_ok=True)
    lines = []
    for src in sorted((Path(cyclic_pdl.__file__).parent / "fixtures").glob("*.json")):
        dst = cfg.out / src.name
        shutil.copyfile(src, dst)
        lines.append(f"{dst}: {_check(dst)}")
    for n in AXIOM_IDS:
        dst = cfg.out / f"axiom{n}.proof.json"
        dst.write_text(render_proof(derive_axiom(n)) + "\n")
        lines.append(f"{dst}: {_check(dst)}")
    dst = cfg.out / "hilbert_example.proof.json"
    dst.write_text(render_proof(hilbert_to_cyclic(example_hilbert_proof())) + "\n")
    lines.append(f"{dst}: {_check(dst)}")
    for k, text in enumerate(cfg.goals):
        goal = Sequent(frozenset(), frozenset([LabelledFormula("x", parse_formula(text))]))
        out = prove_test_free(goal)
        if isinstance(out, Proof):
            dst = cfg.out / f"prover{k}.proof.json"
            dst.write_text(render_proof(out.proof) + "\n")
            lines.append(f"{dst}: {_check(dst)}  ({text})")
        elif isinstance(out, Countermodel):
            dst = cfg.out / f"prover{k}.model.json"
            dst.write_text(render_model(out.model, out.valuation) + "\n")
            lines.append(f"{dst}: countermodel  ({text})")
        else:
            lines.append(f"prover{k}: unknown  ({text}: {out.reason})")
    return lines


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    args = ap.parse_args(argv)
    for line in emit(EmitConfig(args.out)):
        print(line)


if __name__ == "__main__":
    main()
