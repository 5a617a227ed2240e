"""Colon-cancer reproduction: ingest the public files, then run both bias modes.

    python scripts/run_colon.py I2000.txt tissues.txt --out-dir results/colon [--config run.ini]

Prints the comparison table (measured rows plus the published reference
rows) and leaves report.json / report.csv / dataset.csv in the output directory.
"""

import argparse
import sys
import time
from pathlib import Path

from gaselect.cli import main

p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
p.add_argument("matrix", help="genes-by-samples expression matrix")
p.add_argument("labels", help="signed sample labels (negative = tumor)")
p.add_argument("--out-dir", default="results/colon")
p.add_argument("--config")
p.add_argument("--seed", default="42")
p.add_argument("--jobs", default="1")
args = p.parse_args()

out = Path(args.out_dir)
canon = out / "dataset.csv"
code = main(["ingest", args.matrix, args.labels, "--orientation", "genes-by-samples", "-o", str(canon)])
if code:
    sys.exit(code)
extra = ["--config", args.config] if args.config else []
start = time.perf_counter()
code = main(["evaluate", str(canon), "--bias-mode", "both", "--seed", args.seed,
             "--jobs", args.jobs, "--out-dir", str(out)] + extra)
print(f"elapsed {time.perf_counter() - start:.0f}s", file=sys.stderr)
sys.exit(code)
