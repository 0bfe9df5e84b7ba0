#!/usr/bin/env python3
"""Tabulate lambda* brackets and extremal amplitudes over an (n, s) grid.

Usage:
    python3 scripts/lambda_star_table.py --n-values 2,3,4,5,6 \
        --s-values 0.3,0.5,0.7 --modes 128 --out lambda_star.csv
"""

import argparse

from fracgelfand import branchsolve, spectral


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-values", default="2,3,4,5,6")
    ap.add_argument("--s-values", default="0.3,0.5,0.7")
    ap.add_argument("--modes", type=int, default=128)
    ap.add_argument("--out", default="lambda_star.csv")
    args = ap.parse_args(argv)

    n_values = [int(v) for v in args.n_values.split(",")]
    s_values = [float(v) for v in args.s_values.split(",")]
    f = branchsolve.exponential()

    rows = []
    for n in n_values:
        for s in s_values:
            basis = spectral.build_basis(n, s, args.modes)
            lo, hi, br = branchsolve.estimate_lambda_star(basis, f)
            amp = branchsolve.amplitude(branchsolve.extremal_solution(br).u)
            rows.append((n, s, lo, hi, amp))
            print(f"n={n} s={s}: lambda* in [{lo:.6f}, {hi:.6f}], u*(0)={amp:.6f}")

    with open(args.out, "w") as fh:
        fh.write("n,s,lambda_star_lo,lambda_star_hi,extremal_u0\n")
        for n, s, lo, hi, amp in rows:
            fh.write(f"{n},{s:.17g},{lo:.17g},{hi:.17g},{amp:.17g}\n")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
