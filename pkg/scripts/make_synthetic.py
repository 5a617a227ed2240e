"""Write a synthetic dataset, either as canonical CSV or in the public colon file layout.

    python scripts/make_synthetic.py separable out.csv --genes 100 --seed 0
    python scripts/make_synthetic.py colon-like out.csv
    python scripts/make_synthetic.py colon-like outdir --colon-layout   # I2000.txt + tissues.txt
"""

import argparse
from pathlib import Path

from gaselect.dataset import TUMOR, write_canonical
from gaselect.synthetic import make_colon_like, make_separable

p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
p.add_argument("kind", choices=["separable", "colon-like"])
p.add_argument("output")
p.add_argument("--genes", type=int)
p.add_argument("--seed", type=int, default=0)
p.add_argument("--colon-layout", action="store_true",
               help="write genes-by-samples I2000.txt and signed tissues.txt into OUTPUT/")
args = p.parse_args()

if args.kind == "separable":
    ds = make_separable(n_genes=args.genes or 100, seed=args.seed)
else:
    ds = make_colon_like(n_genes=args.genes or 2000, seed=args.seed)

if args.colon_layout:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = (" ".join(f"{v:.6g}" for v in gene) for gene in ds.values.T)
    (out / "I2000.txt").write_text("\n".join(rows) + "\n")
    signs = ("-" if y == TUMOR else "" for y in ds.labels)
    (out / "tissues.txt").write_text("\n".join(f"{s}{i + 1}" for i, s in enumerate(signs)) + "\n")
else:
    write_canonical(ds, args.output)
print(f"{ds.n_samples} samples x {ds.n_genes} genes -> {args.output}")
