import json

import pytest

from cyclic_pdl.cli import main
from cyclic_pdl.kernel import check_pre_proof
from cyclic_pdl.parser import (
    parse_model, parse_proof, parse_sequent, parse_valuation, render_model,
)
from cyclic_pdl.semantics import KripkeModel, satisfies_sequent
from cyclic_pdl.traces import check_gtc


@pytest.fixture
def model_file(tmp_path):
    m = KripkeModel(("s1", "s2"), {"p": frozenset({"s2"})}, {"a": frozenset({("s1", "s2")})})
    path = tmp_path / "m.json"
    path.write_text(render_model(m, {"x": "s1"}))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# parse -------------------------------------------------------------------------

def test_parse_formula(capsys):
    code, out, _ = run(capsys, "parse", "[a*]p  ->  [ a* ; a* ]p")
    assert code == 0 and out.strip() == "[a*]p -> [a*;a*]p"


def test_parse_error_reports_span(capsys):
    code, _, err = run(capsys, "parse", "[a")
    assert code == 2
    assert "syntax error" in err and "^" in err


def test_parse_sequent(capsys):
    code, out, _ = run(capsys, "parse", "--sequent", "x: p |- x: p")
    assert code == 0 and "|-" in out


def test_parse_json(capsys):
    code, out, _ = run(capsys, "parse", "--json", "p&q")
    assert code == 0
    assert json.loads(out)["verdict"] == "ok"


def test_bad_subcommand(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


# check -------------------------------------------------------------------------

@pytest.mark.parametrize("name, code, text", [
    ("fig2.proof.json", 0, "valid cyclic proof"),
    ("fig3.proof.json", 0, "valid cyclic proof"),
    ("invalid_preproof.json", 1, "GTC violated"),
])
def test_check_fixtures(capsys, fixture_path, name, code, text):
    got, out, _ = run(capsys, "check", str(fixture_path(name)))
    assert got == code and text in out


def test_check_prints_lasso_as_json(capsys, fixture_path):
    code, out, _ = run(capsys, "check", "--json", str(fixture_path("invalid_preproof.json")))
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "rejected"
    assert doc["stem"] and doc["loop"]


def test_check_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_check_reports_rule_errors(capsys, tmp_path, fixture_path):
    doc = json.loads(fixture_path("fig2.proof.json").read_text())
    doc["nodes"][0]["rule"] = "WR"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check", str(path))
    assert code == 1 and "invalid pre-proof" in out


def test_check_schema_error(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    code, _, _ = run(capsys, "check", str(path))
    assert code == 2


# prove -------------------------------------------------------------------------

def test_prove_valid_goal_emits_checkable_proof(capsys, tmp_path):
    out_file = tmp_path / "p.json"
    code, out, _ = run(capsys, "prove", "[a*]p -> [a*;a*]p", "--emit-proof", str(out_file))
    assert code == 0 and "proved" in out
    proof = parse_proof(out_file.read_text())
    assert not check_pre_proof(proof) and check_gtc(proof).accepted
    assert run(capsys, "check", str(out_file))[0] == 0


def test_prove_invalid_goal_emits_countermodel(capsys, tmp_path):
    out_file = tmp_path / "m.json"
    code, out, _ = run(capsys, "prove", "p -> [a]p", "--emit-model", str(out_file))
    assert code == 1 and "countermodel" in out
    doc = out_file.read_text()
    m, val = parse_model(doc), parse_valuation(doc)
    assert not satisfies_sequent(m, val, parse_sequent("|- x: p -> [a]p"))
    code, _, _ = run(capsys, "modelcheck", str(out_file), "--sequent", "|- x: p -> [a]p")
    assert code == 1


def test_prove_rejects_tests(capsys):
    code, _, err = run(capsys, "prove", "[q?]p")
    assert code == 2 and "test programs unsupported by search" in err


def test_prove_rejects_cycles(capsys):
    code, _, err = run(capsys, "prove", "--sequent", "x -a-> x |- x: p")
    assert code == 2 and "cyclic" in err


def test_prove_unknown_on_budget(capsys):
    code, out, _ = run(capsys, "prove", "[a*]p -> [a*;a*]p", "--max-iters", "0")
    assert code == 3 and "unknown" in out


def test_prove_json(capsys):
    code, out, _ = run(capsys, "prove", "--json", "p -> [a]p")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "countermodel" and "model" in doc


# modelcheck --------------------------------------------------------------------

def test_modelcheck_satisfied(capsys, model_file):
    code, out, _ = run(capsys, "modelcheck", model_file, "--sequent", "|- x: [a]p")
    assert code == 0 and "satisfied" in out


def test_modelcheck_falsified(capsys, model_file):
    code, out, _ = run(capsys, "modelcheck", model_file, "--sequent", "|- x: false",
                       "--val", "x=s1")
    assert code == 1 and "falsified" in out


def test_modelcheck_val_overrides_file(capsys, model_file):
    assert run(capsys, "modelcheck", model_file, "--sequent", "|- x: p", "--val", "x=s2")[0] == 0


def test_modelcheck_missing_label(capsys, model_file):
    code, _, _ = run(capsys, "modelcheck", model_file, "--sequent", "|- y: p")
    assert code == 2


@pytest.mark.parametrize("val", ["x", "x=s9", "=s1"])
def test_modelcheck_bad_valuation(capsys, model_file, val):
    assert run(capsys, "modelcheck", model_file, "--sequent", "|- x: p", "--val", val)[0] == 2


# axioms ------------------------------------------------------------------------

def test_axioms_emit_all(capsys, tmp_path):
    code, out, _ = run(capsys, "axioms", "--emit", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.glob("axiom*.proof.json"))
    assert [f.name for f in files] == [f"axiom{n}.proof.json" for n in range(1, 7)]
    for f in files:
        assert run(capsys, "check", str(f))[0] == 0


def test_axioms_custom_instance(capsys, tmp_path):
    code, out, _ = run(capsys, "axioms", "--emit", str(tmp_path), "--axiom", "6",
                       "--alpha", "a+b", "--phi", "p")
    assert code == 0
    (f,) = tmp_path.glob("*.json")
    assert f.name == "axiom6.proof.json"
    assert run(capsys, "check", str(f))[0] == 0


def test_axioms_bad_id(capsys):
    assert run(capsys, "axioms", "--axiom", "9")[0] == 2


def test_axioms_bad_param(capsys):
    assert run(capsys, "axioms", "--axiom", "1", "--alpha", "[a")[0] == 2


def test_axioms_json(capsys):
    code, out, _ = run(capsys, "axioms", "--json", "--axiom", "4")
    doc = json.loads(out)
    assert code == 0 and doc["axioms"][0]["axiom"] == 4 and doc["axioms"][0]["file"] is None


def test_color_is_opt_in(capsys, monkeypatch):
    monkeypatch.setenv("PDL_COLOR", "1")
    _, _, err = run(capsys, "parse", "[a")
    assert "\x1b[31m" in err
    monkeypatch.setenv("PDL_COLOR", "0")
    _, _, err = run(capsys, "parse", "[a")
    assert "\x1b[" not in err
