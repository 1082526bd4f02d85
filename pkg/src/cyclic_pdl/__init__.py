"""Cyclic proofs for propositional dynamic logic in a labelled sequent calculus."""

from .kernel import CyclicPreProof, ProofNode, apply_rule, check_node, check_pre_proof, cycle_graph
from .parser import (
    parse_formula, parse_model, parse_program, parse_proof, parse_sequent, render_model,
    render_proof,
)
from .semantics import KripkeModel, interp_formula, interp_program, satisfies_sequent
from .traces import check_gtc, gtc_oracle, trace_values_of

__all__ = [
    "CyclicPreProof", "KripkeModel", "ProofNode", "apply_rule", "check_gtc", "check_node",
    "check_pre_proof", "cycle_graph", "gtc_oracle", "interp_formula", "interp_program",
    "parse_formula", "parse_model", "parse_program", "parse_proof", "parse_sequent",
    "render_model", "render_proof", "satisfies_sequent", "trace_values_of",
]
