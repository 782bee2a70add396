#!/usr/bin/env python3
"""Run the full experiment battery at acceptance scale.

Writes one subdirectory per experiment under --out.  The 2-d linear run is
the slow part (a 1024^2 grid); skip it with --skip-2d.
"""

import argparse
import sys

from viscowave.cli import main as viscowave


def run(name, *flags):
    argv = [name, *map(str, flags)]
    print(f"== viscowave {' '.join(argv)}")
    code = viscowave(argv)
    if code not in (0, 3):  # blow-up (3) is a result for the sweep battery
        sys.exit(f"experiment {name} failed with exit code {code}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/full")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--skip-2d", action="store_true")
    args = ap.parse_args()
    out = args.out.rstrip("/")

    run("linear-decay", "--n", 1, "--N", 4096, "--L", 200, "--T", 500, "--dt", 0.05,
        "--sample-dt", 1, "--k", 1, "--out", f"{out}/linear-decay-1d")
    if not args.skip_2d:
        run("linear-decay", "--n", 2, "--N", 1024, "--L", 100, "--T", 200, "--dt", 0.05,
            "--sample-dt", 2, "--k", "", "--out", f"{out}/linear-decay-2d")
    run("profile", "--n", 1, "--N", 2048, "--L", 200, "--T", 400, "--dt", 0.05,
        "--sample-dt", 4, "--out", f"{out}/profile")
    run("nonlinear-decay", "--n", 1, "--p", 4, "--amp", 0.01, "--N", 4096, "--L", 200,
        "--T", 500, "--dt", 0.05, "--sample-dt", 1, "--snapshot-times", "100,250,400",
        "--out", f"{out}/nonlinear-decay")
    run("fujita-sweep", "--n", 1, "--p-list", "1.5,2,2.5,3,3.5,4", "--amp", 2,
        "--N", 2048, "--L", 100, "--T", 50, "--dt", 0.05, "--sample-dt", 0.25,
        "--jobs", args.jobs, "--out", f"{out}/fujita-sweep")
    run("blowup-functional", "--n", 1, "--p", 4, "--amp", 0.01, "--N", 4096, "--L", 320,
        "--dt", 0.05, "--sample-dt", 4, "--R-list", "10,20,40", "--out", f"{out}/blowup-functional")
    run("lemma-oracles", "--n", 1, "--out", f"{out}/lemma-oracles")
    print("done; artifacts under", out)


if __name__ == "__main__":
    main()
