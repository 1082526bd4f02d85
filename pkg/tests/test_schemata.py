import random

from hypothesis import given, settings, strategies as st
import pytest

from cyclic_pdl.generate import random_formula, random_program
from cyclic_pdl.kernel import check_pre_proof
from cyclic_pdl.parser import parse_formula, parse_item, parse_program
from cyclic_pdl.schemata import (
    AXIOM_IDS, AxiomInstance, BadParams, HilbertProof, IllFormedHilbertProof,
    ModusPonens, MultiLabelGamma, Necessitation, axiom_formula, build_necessitation,
    check_covering_traces, derive_axiom, example_hilbert_proof, finite_prove, hilbert_to_cyclic,
)
from cyclic_pdl.semantics import brute_force_countermodel, ModelWitness
from cyclic_pdl.syntax import Box, LabelledFormula, Sequent, box_prefix
from cyclic_pdl.traces import check_gtc

F = parse_formula
P = parse_program
I = parse_item


def valid_proof(proof, allow_open=False):
    return not check_pre_proof(proof, allow_open=allow_open) and check_gtc(proof).accepted


def root_formula(proof):
    (item,) = proof.nodes[proof.root].sequent.right
    assert not proof.nodes[proof.root].sequent.left
    return item.formula


# axioms ------------------------------------------------------------------------

@pytest.mark.parametrize("n", AXIOM_IDS)
def test_default_axioms_are_proved(n):
    d = derive_axiom(n)
    assert valid_proof(d)
    assert root_formula(d) == axiom_formula(n)


def test_axiom_formulas_match_the_schemata():
    assert axiom_formula(4) == F("([a;b]p -> [a][b]p) & ([a][b]p -> [a;b]p)")
    assert axiom_formula(5) == F("([q?]p -> (q -> p)) & ((q -> p) -> [q?]p)")
    assert axiom_formula(6, alpha="a", phi="p") == F("p & [a*](p -> [a]p) -> [a*]p")
    assert axiom_formula(3, alpha="a", beta="b", phi="r") == \
        F("([a+b]r -> [a]r & [b]r) & ([a]r & [b]r -> [a+b]r)")


def test_composition_axiom_is_finite():
    d = derive_axiom(4)
    assert not any(n.rule == "Bud" for n in d.nodes.values())
    assert check_gtc(d).accepted


def test_induction_axiom_buds_point_at_star_conclusion():
    d = derive_axiom(6, alpha="a", phi="p")
    comps = set(d.companion.values())
    assert comps
    for c in comps:
        assert d.nodes[c].rule == "StarR"
    assert valid_proof(d)


def test_test_axiom_uses_test_rules():
    d = derive_axiom(5)
    rules = {n.rule for n in d.nodes.values()}
    assert {"TestL", "TestR"} <= rules


@pytest.mark.parametrize("kwargs", [
    {"alpha": "p & q"},
    {"phi": "a*"},
    {"phi": "[a"},
    {"gamma": "p"},
])
def test_bad_params(kwargs):
    with pytest.raises(BadParams):
        derive_axiom(1, **kwargs)


def test_unknown_axiom_id():
    with pytest.raises(BadParams):
        axiom_formula(8)


@settings(max_examples=60)
@given(st.integers(0, 2**32), st.sampled_from(AXIOM_IDS))
def test_random_axiom_instances_are_proved(seed, n):
    rng = random.Random(seed)
    params = {
        "alpha": random_program(rng, rng.randint(1, 4), tests=True),
        "beta": random_program(rng, rng.randint(1, 4), tests=True),
        "phi": random_formula(rng, rng.randint(1, 6), tests=True),
        "psi": random_formula(rng, rng.randint(1, 6), tests=True),
    }
    d = derive_axiom(n, **params)
    assert valid_proof(d)
    assert root_formula(d) == axiom_formula(n, **params)


@pytest.mark.parametrize("n", AXIOM_IDS)
def test_axiom_instances_have_no_small_countermodel(n):
    g = Sequent(frozenset(), frozenset([LabelledFormula("x", axiom_formula(n))]))
    assert not isinstance(brute_force_countermodel(g, 2), ModelWitness)


# necessitation -------------------------------------------------------------------

def test_necessitation_atomic_case():
    d = build_necessitation(P("a"), {I("x: q")}, F("p"))
    assert d.leaf_sequents() == [Sequent(frozenset([I("x: q")]), frozenset([I("x: p")]))]
    root = d.proof.nodes[d.proof.root].sequent
    assert root == Sequent(frozenset([I("x: [a]q")]), frozenset([I("x: [a]p")]))
    rules = {n.rule for n in d.proof.nodes.values()}
    assert {"Subst", "BoxR", "BoxL"} <= rules


def test_necessitation_choice_duplicates_leaf():
    d = build_necessitation(P("b+c"), set(), F("p"))
    assert d.leaf_sequents() == [Sequent(frozenset(), frozenset([I("x: p")]))] * 2


def test_necessitation_star_links_back_to_conclusion():
    d = build_necessitation(P("a*"), {I("x: q")}, F("p"))
    assert set(d.proof.companion.values()) == {d.proof.root}
    assert len(d.leaves) == 1
    # the open leaf sits above the left premise of the StarR step
    (star,) = [n for n in d.proof.nodes.values() if n.rule == "StarR"]
    assert d.proof.preorder().index(star.premises[0]) < d.proof.preorder().index(d.leaves[0])
    assert d.leaves[0] not in _subtree(d.proof, star.premises[1])


def _subtree(proof, nid):
    out, stack = set(), [nid]
    while stack:
        n = stack.pop()
        if n not in out:
            out.add(n)
            stack.extend(proof.nodes[n].premises)
    return out


def test_necessitation_rejects_other_labels():
    with pytest.raises(MultiLabelGamma):
        build_necessitation(P("a"), {I("y: q")}, F("p"))
    with pytest.raises(MultiLabelGamma):
        build_necessitation(P("a"), {I("x -a-> y")}, F("p"))


@pytest.mark.parametrize("prog", ["a", "b+c", "a;b", "a*", "(a;b)*", "(a+b)*;c", "q?", "(q?;a)*",
                                  "a**"])
@pytest.mark.parametrize("gamma", [[], ["x: q"], ["x: q", "x: [b]r"]])
def test_necessitation_conditions(prog, gamma):
    alpha, phi = P(prog), F("p -> [a]p")
    g = {I(s) for s in gamma}
    d = build_necessitation(alpha, g, phi)
    assert not check_pre_proof(d.proof, allow_open=True)
    assert d.proof.nodes[d.proof.root].sequent == Sequent(
        box_prefix(alpha, g), frozenset([LabelledFormula("x", Box(alpha, phi))]))
    assert all(s == Sequent(frozenset(g), frozenset([LabelledFormula("x", phi)]))
               for s in d.leaf_sequents())
    assert check_covering_traces(d, alpha, phi)     # condition (i)
    assert check_gtc(d.proof).accepted              # condition (ii)


@settings(max_examples=60)
@given(st.integers(0, 2**32))
def test_random_necessitation_conditions(seed):
    rng = random.Random(seed)
    alpha = random_program(rng, rng.randint(1, 5), tests=True)
    phi = random_formula(rng, rng.randint(1, 5))
    g = {LabelledFormula("x", random_formula(rng, 3)) for _ in range(rng.randint(0, 2))}
    d = build_necessitation(alpha, g, phi)
    assert not check_pre_proof(d.proof, allow_open=True)
    assert check_covering_traces(d, alpha, phi)
    assert check_gtc(d.proof).accepted


def test_covering_check_detects_missing_trace():
    # against the wrong formula no trace reaches the leaves
    d = build_necessitation(P("a"), set(), F("[b*]p"))
    assert check_covering_traces(d, P("a"), F("[b*]p"))
    assert not check_covering_traces(d, P("a"), F("[b*]q"))


# propositional helper ------------------------------------------------------------

@pytest.mark.parametrize("text, provable", [
    ("p -> p", True),
    ("p | (p -> false)", True),
    ("(p -> q) -> (q -> r) -> p -> r", True),
    ("p -> q", False),
    ("[a]p -> [a]p", True),
])
def test_finite_prove(text, provable):
    s = Sequent(frozenset(), frozenset([LabelledFormula("x", F(text))]))
    d = finite_prove(s, fuel=0)
    assert (d is not None) == provable
    if d is not None:
        assert valid_proof(d)


# Hilbert translation -------------------------------------------------------------

def test_one_step_hilbert_proof():
    d = hilbert_to_cyclic(HilbertProof([AxiomInstance(3)]))
    assert valid_proof(d) and root_formula(d) == axiom_formula(3)


def test_modus_ponens_uses_cut():
    h = HilbertProof([
        AxiomInstance("taut", formula=F("p -> p")),
        AxiomInstance("taut", formula=F("(p -> p) -> (q -> q)")),
        ModusPonens(0, 1),
    ])
    d = hilbert_to_cyclic(h)
    assert valid_proof(d)
    assert root_formula(d) == F("q -> q")
    assert d.nodes[d.root].rule == "Cut"


def test_tautology_under_necessitation():
    h = HilbertProof([AxiomInstance("taut", formula=F("p -> p")), Necessitation(0, P("a"))])
    d = hilbert_to_cyclic(h)
    assert valid_proof(d) and root_formula(d) == F("[a](p -> p)")


def test_example_hilbert_proof():
    h = example_hilbert_proof()
    assert len(h.steps) == 5
    d = hilbert_to_cyclic(h)
    assert valid_proof(d)
    assert root_formula(d) == F("[b*]([a]p -> [a]p)") == h.formulas()[-1]


@pytest.mark.parametrize("steps", [
    [],
    [ModusPonens(0, 1)],
    [AxiomInstance("taut", formula=F("p")), ModusPonens(0, 0)],
    [AxiomInstance("taut", formula=F("p -> q"))],
    [AxiomInstance(9)],
    [Necessitation(3, P("a"))],
    ["step"],
])
def test_ill_formed_hilbert_proofs(steps):
    with pytest.raises(IllFormedHilbertProof):
        hilbert_to_cyclic(HilbertProof(steps))
