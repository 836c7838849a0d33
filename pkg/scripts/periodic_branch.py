#!/usr/bin/env python3
"""Continue a constant-period branch of periodic orbits from a Hopf point
of the second bundled swimmer and report closure, Floquet data, and the
stable orbits found in the all-unstable (0/4) regime."""

import argparse

from magswim import periodic, regimes
from magswim.swimmer import bundled_swimmer, decompose


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--swimmer", default="swimmer_b")
    ap.add_argument("--ma", type=float, default=None, help="Hopf Ma to start near")
    ap.add_argument("--cospsi", type=float, default=None)
    ap.add_argument("--direction", type=int, default=1, choices=(1, -1))
    ap.add_argument("--max-steps", type=int, default=400)
    ap.add_argument("--resolution", type=int, default=400)
    args = ap.parse_args()

    dec = decompose(bundled_swimmer(args.swimmer))
    pts = periodic.hopf_points_of(dec, resolution=args.resolution)
    if args.ma is not None and args.cospsi is not None:
        start = min(
            pts, key=lambda p: (p.Ma - args.ma) ** 2 + (p.cos_psi - args.cospsi) ** 2
        )
    else:
        start = max(pts, key=lambda p: p.lambda_im * (abs(p.cos_psi) > 0.7))
    print(
        f"start Hopf: Ma={start.Ma:.5f} cos_psi={start.cos_psi:+.5f} "
        f"lambda_I={start.lambda_im:.5f} T={6.283185307179586 / start.lambda_im:.3f}"
    )

    branch = periodic.branch_from_hopf(
        dec, start, direction=args.direction, max_steps=args.max_steps,
        step=1e-2, max_step=6e-2, tol=1e-9,
    )
    orbits = branch.orbits
    stable04 = [
        o
        for o in orbits
        if o.stable and regimes.regime_of(dec, o.Ma, o.cos_psi) == "0/4"
    ]
    print(
        f"{len(orbits)} orbits, termination={branch.termination}, "
        f"max closure={max(o.closure for o in orbits):.2e}, "
        f"max |trivial - 1|={max(abs(o.trivial_multiplier - 1) for o in orbits):.2e}"
    )
    print(f"{len(stable04)} stable orbits inside 0/4")
    for o in stable04[:5]:
        print(
            f"  Ma={o.Ma:.4f} cos_psi={o.cos_psi:+.4f} "
            f"max|mu|={max(abs(m) for m in o.floquet):.3f}"
        )


if __name__ == "__main__":
    main()
