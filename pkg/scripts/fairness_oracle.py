"""Cross-check the SCC fairness detector against brute-force cycle enumeration
on random labelled graphs.

    python3 scripts/fairness_oracle.py [--graphs N] [--seed S]
"""

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from generators import random_graph  # noqa: E402
from oracles import has_fair_cycle  # noqa: E402
from sessrc.explorer import check_lasso, find_fair_lasso  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--graphs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    agree = fair = 0
    for _ in range(args.graphs):
        g = random_graph(rng, max_nodes=25, threads=rng.randint(1, 4))
        lasso = find_fair_lasso(g)
        ok = (lasso is not None) == has_fair_cycle(g) and (lasso is None or check_lasso(g, lasso))
        agree += ok
        fair += lasso is not None
    print(f"{agree}/{args.graphs} agree, {fair} with a fair cycle")
    return 0 if agree == args.graphs else 1


if __name__ == "__main__":
    sys.exit(main())
