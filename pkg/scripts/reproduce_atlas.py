#!/usr/bin/env python3
"""Generate the equilibrium chart, bifurcation curves, and regime diagram
for the bundled swimmers via the command-line interface."""

import argparse
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/atlas", help="output root")
    ap.add_argument(
        "--swimmers", nargs="+", default=["swimmer_a", "swimmer_b"]
    )
    ap.add_argument("--resolution", type=int, default=400)
    args = ap.parse_args()

    for name in args.swimmers:
        for cmd in (
            [
                "atlas", "--swimmer", name, "--theta-n", "400",
                "--phi-n", "400", "--resolution", str(args.resolution),
                "--out", f"{args.out}/{name}/atlas",
            ],
            [
                "regimes", "--swimmer", name, "--nx", "300", "--ny", "300",
                "--out", f"{args.out}/{name}/regimes",
            ],
        ):
            print("+ magswim", " ".join(cmd), flush=True)
            rc = subprocess.run([sys.executable, "-m", "magswim.cli", *cmd]).returncode
            if rc != 0:
                sys.exit(rc)


if __name__ == "__main__":
    main()
