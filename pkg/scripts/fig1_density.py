"""Density grids for the fringe figure: lab frame and rest frame, small and large ā."""
import argparse
from pathlib import Path

from rigidpacket.cli import main


def jobs(res):
    for abar in ("0.005", "2"):
        yield f"lab_abar{abar}", ["--frame", "lab", "--window", "0,80,0,60", "--res", f"{res},{res}",
                                  "--abar", abar]
        yield f"rest_abar{abar}", ["--frame", "rindler", "--selector", "rest", "--window", "0.05,60,0,10",
                                   "--res", f"{res},{res}", "--abar", abar]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/fig1")
    ap.add_argument("--res", type=int, default=200)
    ap.add_argument("--alpha", default="30")
    ap.add_argument("--threads", default=None)
    args = ap.parse_args()
    out = Path(args.out_dir)
    status = 0
    for name, argv in jobs(args.res):
        extra = ["--threads", args.threads] if args.threads else []
        code = main(["density", "--alpha", args.alpha, *argv, "--out", str(out / f"{name}.csv"), *extra])
        print(f"{name}: exit {code}")
        status = max(status, code)
    raise SystemExit(status)
