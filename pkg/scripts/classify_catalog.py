"""Classify every catalog metric on its default grid and print a summary table.

Usage: python3 scripts/classify_catalog.py
"""

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym.metric import default_grid
from pseudosym.report import build_report

ENTRIES = (
    ("minkowski", catalog.minkowski_cylindrical),
    ("melvin", catalog.melvin),
    ("warped ln(1+r)", lambda: catalog.melvin_type("ln(1+r)")),
    ("warped pseudosymmetric", catalog.pseudosymmetric_example),
    ("warped conformally flat", catalog.conformally_flat_example),
    ("base ln(2+r^2)", lambda: catalog.base_3metric("ln(2+r^2)")),
)
KEYS = ("pseudosymmetric", "roter", "ein_level", "qe_rank", "chaki")


def main() -> None:
    print(f"{'metric':<30}" + "".join(f"{k:>17}" for k in KEYS))
    for name, make in ENTRIES:
        entry = make()
        report, _ = build_report(entry.metric, default_grid(entry.metric), C.DEFAULT_TOL, entry)
        summ = report.summary
        print(f"{name:<30}" + "".join(f"{str(summ.get(k, '-')):>17}" for k in KEYS))


if __name__ == "__main__":
    main()
