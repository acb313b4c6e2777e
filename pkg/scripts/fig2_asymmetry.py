"""Asymmetry 𝒜(ā) at a fixed lab time for several chirps."""
import argparse

import numpy as np

from rigidpacket.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fig2/asymmetry.csv")
    ap.add_argument("--alphas", default="20,30,40")
    ap.add_argument("--abar-min", type=float, default=1e-12)
    ap.add_argument("--abar-max", type=float, default=1e-1)
    ap.add_argument("--points", type=int, default=12)
    ap.add_argument("--time", default="1fs")
    args = ap.parse_args()
    abars = ",".join(f"{a:.6g}" for a in np.geomspace(args.abar_min, args.abar_max, args.points))
    raise SystemExit(main(["asymmetry", "--alphas", args.alphas, "--abars", abars,
                           "--time", args.time, "--out", args.out]))
