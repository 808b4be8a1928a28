#!/usr/bin/env python3
"""Time the descriptor -> whitening -> distance -> reduction pipeline at a
chosen scale (defaults match the workstation-scale target: m=3000 transitions,
n=147 atoms, k=55 features).

Usage:
    python3 scripts/benchmark_pipeline.py [--m 3000] [--n 147] [--k 55]
"""

import argparse
import time

import numpy as np
from scipy.spatial.distance import cdist

from mdtransit.cluster import reduce_ensemble
from mdtransit.descriptors import (
    DistanceMatrix,
    FeatureDelta,
    coulombic_aggregate,
    distance_matrix,
    fit_whitening,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=3000)
    ap.add_argument("--n", type=int, default=147)
    ap.add_argument("--k", type=int, default=55)
    ap.add_argument("--reduction-cutoff", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    m, n, k = args.m, args.n, args.k
    positions = rng.normal(scale=5.0, size=(m, n, 3))
    deltas = rng.normal(size=(m, n, k))

    t0 = time.perf_counter()
    descs = [
        coulombic_aggregate(
            FeatureDelta((f"s{i}", f"f{i}"), deltas[i]), positions[i]
        )
        for i in range(m)
    ]
    t1 = time.perf_counter()
    transform = fit_whitening(descs)
    dm = distance_matrix(descs, transform)
    t2 = time.perf_counter()
    res = reduce_ensemble(dm, args.reduction_cutoff)
    t3 = time.perf_counter()

    print(f"m={m} n={n} k={k}")
    print(f"descriptors      {t1 - t0:8.2f} s")
    print(f"distance matrix  {t2 - t1:8.2f} s")
    print(f"reduction        {t3 - t2:8.2f} s "
          f"(cutoff {args.reduction_cutoff}, kept {len(res.kept)}/{m})")
    print(f"total            {t3 - t0:8.2f} s")


if __name__ == "__main__":
    main()
