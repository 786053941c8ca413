#!/usr/bin/env python3
"""Run the quantifier eliminator on the documented rank-1 toy and on a batch
of randomly generated inconsistent theories, printing the step traces and
the tower bounds.

    python scripts/ha_demo.py [--cases N] [--seed S]
"""

import argparse
import random
import sys

from proofkit import hilbertack as ha
from proofkit import propcalc as pc
from proofkit import syntax as sx


def show_run(name, theory, seq):
    print(f"== {name}")
    for f in seq.formulas:
        print("   ", sx.render(f, "infix-pretty"))
    res = ha.ha_run(theory, seq)
    for i, t in enumerate(res.trace, 1):
        print(
            f"  step {i}: {t.mode:<9} |in|={t.size_in} |out|={t.size_out} "
            f"(multiset {t.size_out_multiset})  ->  "
            f"(rho={t.profile_out.rho}, lam={t.profile_out.lam}, kap={t.profile_out.kappa})"
        )
    refutable = isinstance(
        pc.ground_refute(list(res.final.formulas), want_cert=False), pc.Refutation
    )
    bv = res.bound_value if res.bound_value is not None else "symbolic"
    print(
        f"  final: {len(res.final.formulas)} formulas, ground-refutable={refutable}; "
        f"bound {res.bound} = {bv}, observed max {res.observed_max}"
    )
    print()


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--cases", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    theory, seq = ha.demo_rank1()
    show_run("documented rank-1 toy", theory, seq)
    rng = random.Random(args.seed)
    for i in range(args.cases):
        th, sq = ha.generate_inconsistent_case(rng, 1 + (i % 2))
        show_run(f"generated case {i + 1} (rank {1 + (i % 2)})", th, sq)
    return 0


if __name__ == "__main__":
    sys.exit(main())
