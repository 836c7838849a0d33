#!/usr/bin/env python3
"""Run the quasi-static handling strategies on the bistable working point
of the first bundled swimmer and print the branch-switch event logs."""

import argparse

import numpy as np

from magswim import atlas, dynamics, stability
from magswim.swimmer import bundled_swimmer, decompose


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--swimmer", default="swimmer_a")
    ap.add_argument("--ma", type=float, default=0.015)
    ap.add_argument("--cospsi", type=float, default=0.01)
    args = ap.parse_args()

    dec = decompose(bundled_swimmer(args.swimmer))
    eqs = [
        stability.classify(dec, e)
        for e in atlas.solve_equilibria(dec, args.ma, args.cospsi)
    ]
    stable = sorted((e for e in eqs if e.index == 3), key=lambda e: abs(e.v_ax))
    print(f"stable branches at (Ma={args.ma}, cos_psi={args.cospsi}):")
    for e in stable:
        print(f"  v_ax={e.v_ax:+.4e} theta={e.theta:+.4f} phi={e.phi:+.4f}")
    lower = stable[0]

    print("\nfold strategy (ramp cos psi past the fold and back):")
    sched = dynamics.fold_switch_schedule(
        dec, args.ma, args.cospsi, lower.theta, lower.phi, direction=+1
    )
    res = dynamics.run_schedule(dec, sched, dynamics.equilibrium_quat(lower))
    for ev in res.events:
        print(f"  t={ev.t:8.1f} {ev.kind:<10} Ma={ev.Ma:.4f} cp={ev.cos_psi:+.4f}")

    print("\ntwo-parameter loop (7 steps through the low-Ma regime):")
    loop = dynamics.two_parameter_loop(dec, args.ma, args.cospsi)
    for step in loop.steps:
        print(f"  step {step.step}: Ma={step.Ma:.4f} cp={step.cos_psi:+.4f} "
              f"v_ax={step.v_ax:+.4e} — {step.description}")
    print(f"switched={loop.switched}")


if __name__ == "__main__":
    main()
