"""Run the prover over a seeded corpus of test-free acyclic sequents.

Reports outcome counts, the Unknown rate and any unwinding bound violations.

    python3 scripts/run_corpus.py --n 1000 --seed 0 --max-size 10
"""

from __future__ import annotations

import argparse
import collections
import json
import random
import time
from dataclasses import asdict, dataclass

from cyclic_pdl.generate import corpus_sequent
from cyclic_pdl.kernel import check_pre_proof
from cyclic_pdl.search import (
    Countermodel, Proof, SearchBudget, prove_test_free, unwinding_violations,
)
from cyclic_pdl.semantics import satisfies_sequent
from cyclic_pdl.syntax import has_nullable_star
from cyclic_pdl.traces import check_gtc


@dataclass
class CorpusConfig:
    n: int = 1000
    seed: int = 0
    max_size: int = 10
    max_iters: int = SearchBudget.max_iters
    verbose: bool = False


def run(cfg: CorpusConfig) -> dict:
    rng = random.Random(cfg.seed)
    budget = SearchBudget(max_iters=cfg.max_iters)
    counts = collections.Counter()
    unsound, unknown, violations = [], [], []
    start = time.perf_counter()
    for _ in range(cfg.n):
        s = corpus_sequent(rng, cfg.max_size)
        out = prove_test_free(s, budget)
        kind = type(out).__name__
        counts[kind] += 1
        if isinstance(out, Proof):
            ok = not check_pre_proof(out.proof) and check_gtc(out.proof).accepted
        elif isinstance(out, Countermodel):
            ok = not satisfies_sequent(out.model, out.valuation, s)
        else:
            ok = True
            unknown.append({"sequent": str(s), "reason": out.reason})
        if not ok:
            unsound.append(str(s))
        for record in out.stats.unwindings:
            for v in unwinding_violations(record):
                violations.append({"sequent": str(s), "nullable_star": has_nullable_star(s),
                                   "violation": v})
        if cfg.verbose:
            print(f"{kind:12} {s}")
    return {
        "config": asdict(cfg),
        "counts": dict(counts),
        "unknown_rate": counts["Unknown"] / cfg.n if cfg.n else 0.0,
        "unsound": unsound,
        "unknown": unknown,
        "violations": len(violations),
        "violating_sequents": sorted({v["sequent"] for v in violations}),
        "violations_without_nullable_star": [v for v in violations if not v["nullable_star"]],
        "seconds": round(time.perf_counter() - start, 2),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(CorpusConfig()).items():
        flag = "--" + name.replace("_", "-")
        if isinstance(default, bool):
            ap.add_argument(flag, action="store_true")
        else:
            ap.add_argument(flag, type=type(default), default=default)
    cfg = CorpusConfig(**vars(ap.parse_args(argv)))
    print(json.dumps(run(cfg), indent=2))


if __name__ == "__main__":
    main()
