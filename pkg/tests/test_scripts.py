import importlib.util
import sys
from pathlib import Path

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def load(name):
    spec = importlib.util.spec_from_file_location(name, SCRIPTS / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    sys.modules[name] = mod     # dataclasses look their module up here
    spec.loader.exec_module(mod)
    return mod


def test_run_corpus_small():
    mod = load("run_corpus")
    res = mod.run(mod.CorpusConfig(n=40, seed=3))
    assert sum(res["counts"].values()) == 40
    assert res["unsound"] == []
    assert res["violations_without_nullable_star"] == []


def test_emit_fixtures(tmp_path):
    mod = load("emit_fixtures")
    lines = mod.emit(mod.EmitConfig(tmp_path))
    assert any("invalid_preproof.json: Rejected" in ln for ln in lines)
    checked = [ln for ln in lines if ".proof.json" in ln and "invalid" not in ln]
    assert checked and all("Accepted" in ln for ln in checked)
    assert len(list(tmp_path.glob("axiom*.proof.json"))) == 7
