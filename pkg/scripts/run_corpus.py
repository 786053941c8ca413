#!/usr/bin/env python3
"""Check the full proof corpus and print the per-script table, then
cross-validate every interpretable statement against the bit-string
interpreter.

    python scripts/run_corpus.py [--oracle N] [--budget N]
"""

import argparse
import sys

from proofkit import stringarith as sa


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--oracle", type=int, default=50, help="oracle samples per theorem")
    ap.add_argument("--budget", type=int, default=100_000)
    args = ap.parse_args()

    bundle = sa.load_theory()
    report = sa.check_corpus(
        bundle, budget=args.budget, oracle_samples=args.oracle, seed=0
    )
    print(f"{'label':<8} {'verdict':<8} {'instances':>9} {'time':>9}  oracle")
    for e in report.entries:
        print(
            f"{e.label:<8} {'pass' if e.ok else 'FAIL':<8} {e.instance_count:>9} "
            f"{e.elapsed:>8.3f}s  {e.oracle or '-'}"
            + ("" if e.ok else f"  {e.message}")
        )
    print(
        f"\n{len(report.entries)} scripts in {report.elapsed:.2f}s: "
        + ("all pass" if report.ok else "FAILURES")
    )
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
