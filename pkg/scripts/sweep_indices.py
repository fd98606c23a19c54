"""SD/MAD over topology x penetration x MPS, averaged over seeds.

Thin wrapper around ``mixed-platoon sweep`` that prints the table after
writing ``sweep.csv``.

    python scripts/sweep_indices.py [--out out/sweep] [--workers 4]
"""
import argparse
import csv
from pathlib import Path

from mixed_platoon import cli

parser = argparse.ArgumentParser()
parser.add_argument("--out", default="out/sweep")
parser.add_argument("--workers", type=int, default=1)
args = parser.parse_args()

code = cli.main(["sweep", "--out", args.out, "--set", f"workers={args.workers}"])
if code:
    raise SystemExit(code)
with open(Path(args.out) / "sweep.csv") as fh:
    rows = list(csv.DictReader(fh))
print(f"{'M':>2} {'p':>4}  " + "  ".join(f"{t:>14}" for t in ("CACC sd/mad", "MPF sd/mad", "MSL sd/mad")))
cells = {(r["topology"], r["M"], r["p"]): r for r in rows}
for m in sorted({r["M"] for r in rows}, key=int):
    for p in sorted({r["p"] for r in rows}, key=float):
        line = "  ".join(
            f"{float(cells[t, m, p]['sd_mean']):6.2f}/{float(cells[t, m, p]['mad_mean']):7.1f}"
            for t in ("CACC", "MPF", "MSL") if (t, m, p) in cells
        )
        print(f"{m:>2} {p:>4}  {line}")
