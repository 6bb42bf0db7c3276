"""Refinement table over the bundled corpus.

    python3 scripts/run_corpus.py [--max-states N]
"""

import argparse
import time
from pathlib import Path

from sessrc import locks as L
from sessrc.compiler import compile_expr
from sessrc.explorer import TARGET, ExploreLimits
from sessrc.refinement import check_refinement, obs_equiv_tgt
from sessrc.syntax import parse_src, parse_tgt

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def row(name, report, secs):
    vs = " ".join(f"{c.verdict.value:<12}" for c in report.conditions)
    st = report.stats
    print(f"{name:<34} {vs} {st['target']['nodes']:>7} {st['source']['nodes']:>7} {secs:7.2f}s")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-states", type=int, default=100_000)
    args = ap.parse_args()
    limits = ExploreLimits(max_states=args.max_states)
    print(f"{'program':<34} {'cond1':<12} {'cond2':<12} {'cond3':<12} {'tgt':>7} {'src':>7}")
    for p in sorted((CORPUS / "compiler").glob("*.src")):
        e = parse_src(p.read_text())
        t0 = time.perf_counter()
        row(p.name, check_refinement(compile_expr(e), e, limits), time.perf_counter() - t0)
    for p in sorted((CORPUS / "locks").glob("*.tgt")):
        e = parse_tgt(p.read_text())
        t0 = time.perf_counter()
        clh, _ = L.translate_locks({}, e)
        r = check_refinement(clh, L.resolve_ticket(e), limits, tgt_lang=TARGET, src_lang=TARGET,
                             obs=obs_equiv_tgt)
        row(p.name, r, time.perf_counter() - t0)


if __name__ == "__main__":
    main()
