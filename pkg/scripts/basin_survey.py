#!/usr/bin/env python3
"""Sample basins of attraction on a small grid of driving parameters and
print the attractor shares per point."""

import argparse
from collections import Counter

import numpy as np

from magswim import dynamics
from magswim.swimmer import bundled_swimmer, decompose


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--swimmer", default="swimmer_a")
    ap.add_argument("--ma", type=float, nargs="+", default=[0.015])
    ap.add_argument("--cospsi", type=float, nargs="+", default=[0.01])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t-end", type=float, default=5000.0)
    args = ap.parse_args()

    dec = decompose(bundled_swimmer(args.swimmer))
    for ma in args.ma:
        for cp in args.cospsi:
            psi = float(np.arccos(np.clip(cp, -1.0, 1.0)))
            samples = dynamics.basin_sample(
                dec, ma, psi, args.samples, args.seed, t_end=args.t_end
            )
            counts = Counter(s.attractor_id for s in samples)
            share = {
                k: f"{100.0 * v / args.samples:.1f}%"
                for k, v in sorted(counts.items())
            }
            print(f"Ma={ma:g} cos_psi={cp:g}: {share}")


if __name__ == "__main__":
    main()
