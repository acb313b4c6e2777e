"""Rest-frame width δū against Rindler time η for a few packet sizes."""
import argparse
from pathlib import Path

from rigidpacket.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/fig2b")
    ap.add_argument("--alpha", default="40")
    ap.add_argument("--abars", default="1e-6,1e-4,1e-2")
    ap.add_argument("--eta", default=",".join(str(e) for e in range(0, 15)))
    ap.add_argument("--normalization", default="fixed", choices=("fixed", "slice"))
    args = ap.parse_args()
    status = 0
    for abar in args.abars.split(","):
        out = Path(args.out_dir) / f"width_abar{abar}.csv"
        code = main(["variance", "--alpha", args.alpha, "--abar", abar, "--eta", args.eta,
                     "--normalization", args.normalization, "--out", str(out)])
        print(f"abar={abar}: exit {code}")
        status = max(status, code)
    raise SystemExit(status)
