"""Regenerate the three LOP figures (CSV + SVG) into an output directory.

    python scripts/reproduce_figures.py --out results --trials 1000000 --workers 4
"""

import argparse
import sys
from pathlib import Path

from locoutage.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    common = ["--trials", str(args.trials), "--seed", str(args.seed), "--workers", str(args.workers)]
    for fig in ("fig3", "fig4", "fig5"):
        code = cli_main(["figure", fig, "--out", str(args.out / fig), *common])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
