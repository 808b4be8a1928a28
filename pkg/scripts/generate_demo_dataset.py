#!/usr/bin/env python3
"""Write a synthetic two-motif demo dataset (manifest + extxyz + features)
that the CLI and HTTP service can be pointed at directly.

Usage:
    python3 scripts/generate_demo_dataset.py --out demo_data [--per-motif 25]
"""

import argparse
from pathlib import Path

import numpy as np

from mdtransit.ingest import save_dataset
from mdtransit.synth import two_motif_dataset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--per-motif", type=int, default=25)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    ds = two_motif_dataset(rng, per_motif=args.per_motif)
    manifest = save_dataset(ds, args.out)
    print(f"wrote {ds.n_transitions} transitions to {manifest}")
    print(f"try:  mdtransit analyze --manifest {manifest} --out export_demo")
    print(f"      mdtransit serve --manifest {manifest}")


if __name__ == "__main__":
    main()
