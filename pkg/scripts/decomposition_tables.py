#!/usr/bin/env python3
"""Print the decomposition table (singular values, chart coefficients,
theta0) and the drive/magnetisation optima for every bundled swimmer."""

import argparse

from magswim import optimize
from magswim.swimmer import bundled_names, bundled_swimmer, decompose


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--swimmers", nargs="*", default=None)
    args = ap.parse_args()
    names = args.swimmers or bundled_names()

    cols = ("sigma1", "sigma2", "c01", "c02", "c11", "c12", "theta0")
    print(f"{'swimmer':<22}" + "".join(f"{c:>12}" for c in cols))
    for name in names:
        dec = decompose(bundled_swimmer(name))
        vals = [getattr(dec, c) for c in cols]
        print(f"{name:<22}" + "".join(f"{v:12.4f}" for v in vals))

    print()
    print(f"{'swimmer':<22}{'v_ax* (shape)':>14}{'Ma*':>10}{'cos psi*':>10}{'hopf':>6}")
    for name in names:
        s = bundled_swimmer(name)
        out = optimize.optimal_magnetisation(s.M12, s.M22)
        print(
            f"{name:<22}{out.v_ax_star:14.6e}{out.Ma_star:10.4f}"
            f"{out.cos_psi_star:10.4f}{str(out.hopf):>6}"
        )
        print(f"{'':<22}  m* = [{', '.join(f'{x:+.5f}' for x in out.m_star)}]")


if __name__ == "__main__":
    main()
