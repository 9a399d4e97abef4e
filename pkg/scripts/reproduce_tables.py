"""Fit every embedded record and write the Table 4 / Table 5 comparisons.

    python scripts/reproduce_tables.py [outdir]
"""

import sys
from pathlib import Path

from qdb import data
from qdb.cli import main


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    codes = []
    for table in ("t4", "t5"):
        codes.append(main(["reproduce", table, "-o", str(outdir / f"{table}.txt")]))
        main(["reproduce", table, "--format", "json", "-o", str(outdir / f"{table}.json")])
    all_rows = outdir / "all_records.json"
    data.export_results(data.embedded_experiments(), all_rows, "json")
    codes.append(main(["fit", "-i", str(all_rows), "--format", "csv", "-o", str(outdir / "fits.csv")]))
    codes.append(main(["fit", "-i", str(all_rows), "-o", str(outdir / "fits.txt")]))
    for name in ("t4.txt", "t5.txt", "fits.txt"):
        print(f"== {name}")
        print((outdir / name).read_text())
    return max(codes)


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "results")))
