"""Run every shipped experiment config and print one verdict line per run.

Usage: python3 scripts/run_all.py [--out DIR] [--threads N]
"""

import argparse
import sys
from pathlib import Path

from robinlab.cli import main as robinlab_main

CONFIGS = Path(__file__).parent / "configs"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out", help="parent directory for the per-config reports")
    parser.add_argument("--threads", type=int, help="cap BLAS/LAPACK threads")
    args = parser.parse_args(argv)
    worst = 0
    for cfg in sorted(CONFIGS.glob("*.json")):
        extra = [] if args.threads is None else ["--threads", str(args.threads)]
        print(f"== {cfg.stem}")
        code = robinlab_main(["run", str(cfg), "--out", str(Path(args.out) / cfg.stem), *extra])
        print(f"-> exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
