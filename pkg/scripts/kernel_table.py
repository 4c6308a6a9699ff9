"""Print canonical and synthetic potential kernel values near the origin."""
import argparse
import math

from switchlab.kernel import kernel_canonical, kernel_synthetic


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, default=2, choices=(2, 3))
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--synthetic-radius", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-2, help="accepted extrapolation error")
    args = p.parse_args()

    can = kernel_canonical(args.d, args.radius, tol=args.tol)
    syn = kernel_synthetic(args.d, args.synthetic_radius)
    origin = (0,) * args.d
    print(f"d={args.d}: canonical (extrapolated) vs synthetic R={args.synthetic_radius} minus its value at 0")
    pts = sorted({tuple(sorted(abs(c) for c in z)[::-1]) for z in can.table}, key=lambda z: (sum(z), z))
    for z in pts:
        if not can.covers(z):
            continue
        diff = float(syn.value(z) - syn.value(origin))
        print(f"{str(z):12} {can.value(z):.6f}  (err {can.errors.get(z, 0):.1e})  synthetic {diff:.6f}")
    if args.d == 2 and can.covers((1, 1)):
        print(f"4/pi = {4 / math.pi:.6f}")


if __name__ == "__main__":
    main()
