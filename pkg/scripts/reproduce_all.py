"""Regenerate every bundled example report into a directory of envelopes."""

import argparse
import sys
from pathlib import Path

from secrecy_forge.cli import EXAMPLE_IDS, run


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reports",
                        help="directory for the JSON envelopes")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for example in EXAMPLE_IDS:
        target = out_dir / f"{example}.json"
        code = run(["reproduce", example, "--seed", str(args.seed),
                    "--out", str(target)])
        print(f"{example:8s} exit {code}  {target}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
