"""Check every reference claim and print one status line per claim.

Usage: python3 scripts/reproduce_claims.py [--tol REL]
"""

import argparse
import sys

from pseudosym import claims as K
from pseudosym import classifier as C


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=C.DEFAULT_TOL.rel)
    args = parser.parse_args()
    results = K.run_all(C.Tolerance(rel=args.tol, abs_floor=C.DEFAULT_TOL.abs_floor))
    for c in results:
        print(f"{c.status:<9} {c.name}")
        if c.status != K.PASS and c.detail:
            print(f"          {c.detail}")
    counts = {st: sum(c.status == st for c in results) for st in (K.PASS, K.DISPUTED, K.FAIL)}
    print(", ".join(f"{v} {k}" for k, v in counts.items()))
    return 1 if counts[K.FAIL] else 0


if __name__ == "__main__":
    sys.exit(main())
