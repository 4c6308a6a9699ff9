"""Convergence table for a point mass started walk embedding uniform[-a, a]."""
import argparse
import sys
import time
from fractions import Fraction

from switchlab.scaling import cauchy_trend, convergence_table, dirac_spec, table_csv, uniform_spec


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--half-width", default="1")
    p.add_argument("--T", default="1")
    p.add_argument("--Ns", default="4,16,64,256")
    p.add_argument("--csv", help="write the table here as CSV")
    args = p.parse_args()

    a = Fraction(args.half_width)
    Ns = [int(v) for v in args.Ns.split(",")]
    t0 = time.perf_counter()
    rows = convergence_table(dirac_spec(0), uniform_spec(-a, a), Fraction(args.T), 0, Ns)
    print(f"{'N':>5} {'value':>12} {'residual':>9} {'delta':>10} {'W1 hat':>8} {'W1 emb':>8} {'sites':>6}")
    for r in rows:
        delta = "" if r.delta is None else f"{float(r.delta):.6f}"
        print(f"{r.N:5d} {float(r.value_lhs):12.6f} {str(r.residual):>9} {delta:>10} "
              f"{float(r.w1_target):8.5f} {float(r.w1_embedded):8.5f} {r.barrier_sites:6d}")
    print(f"cauchy trend: {cauchy_trend(rows)}  ({time.perf_counter() - t0:.1f}s)")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(table_csv(rows))
    return 0 if all(r.residual == 0 for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
