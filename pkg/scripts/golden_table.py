"""Compare the printed component table of a catalog metric with the engine.

Usage: python3 scripts/golden_table.py [NAME]   (default melvin_type:ln(1+r))
"""

import sys

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym.metric import default_grid


def main() -> None:
    name = sys.argv[1] if len(sys.argv) > 1 else "melvin_type:ln(1+r)"
    entry = catalog.lookup(name)
    s = C.sample(entry.metric, default_grid(entry.metric))
    for r in catalog.golden_check(entry, s.grid, s.__getitem__):
        print(f"{r.status:<9} {r.entry.label():<16} max rel error {r.max_rel_error:.1e}  {r.detail}")


if __name__ == "__main__":
    main()
