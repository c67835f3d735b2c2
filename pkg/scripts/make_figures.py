"""Write the CSV series behind Figures 1-5 into an output directory.

    python scripts/make_figures.py --out out

Figure 5 needs Models 1, 3, 4 and 7; it reuses ``out/model_*/result.json``
when present and runs the missing models otherwise.
"""

import argparse
import sys

from robust_shrink import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--figures", type=int, nargs="*", default=[1, 2, 3, 4, 5])
    args = ap.parse_args(argv)
    codes = [cli.main(["figure", str(f), "--out", args.out, "--seed", str(args.seed)]) for f in args.figures]
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
