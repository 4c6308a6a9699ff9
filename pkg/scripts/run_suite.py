"""Run a fixture suite (bundled by default) and print a one-line summary per fixture."""
import argparse
import json
import sys

from switchlab.fixtures import dump_fixture, load_suite, random_suite
from switchlab.runner import run_suite


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--suite", help="suite JSON (default: bundled)")
    p.add_argument("--random", type=int, metavar="SEED", help="generate a fresh random suite instead")
    p.add_argument("--per-kind", type=int, default=3)
    p.add_argument("--save", help="write the generated suite to this path")
    p.add_argument("--workers", type=int)
    args = p.parse_args()

    if args.random is not None:
        raw = random_suite(args.random, args.per_kind)
        fixtures = [dict(f) for f in raw]
        if args.save:
            with open(args.save, "w") as fh:
                json.dump({"fixtures": [dump_fixture(f) for f in raw]}, fh, indent=1)
    else:
        fixtures = load_suite(args.suite)
    reports = run_suite(fixtures, workers=args.workers)
    for r in reports:
        print(f"{r['verdict']:4}  {r['identity']:12} {r['metadata'].get('fixture', ''):18} residual={r['residual']}")
    bad = sum(r["verdict"] != "pass" for r in reports)
    print(f"{len(reports) - bad}/{len(reports)} passed")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
