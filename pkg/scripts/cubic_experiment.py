"""Build cubic witnesses from the record sequence and run the small-height scan."""
import argparse

from extremal_lab.cubic import cubic_experiment, cubic_nonexistence_scan, cubic_uniform_scan
from extremal_lab.precision import ZetaContext
from extremal_lab.roy import best_approx_polys, extract_roy_sequence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zeta", default="fib:1,2")
    ap.add_argument("--h-max", type=float, default=1e120)
    ap.add_argument("--generations", type=int, default=6)
    ap.add_argument("--scan-h", type=int, default=60)
    ap.add_argument("--eps", type=float, default=0.5)
    args = ap.parse_args()

    ctx = ZetaContext.from_spec(args.zeta, bits=2048)
    h = int(args.h_max)
    seq = extract_roy_sequence(ctx, h)
    ws = cubic_experiment(ctx, seq, best_approx_polys(ctx, h),
                          min(args.generations, len(seq) - 2))
    print(f"{'k':>3} {'j':>2} {'log10 H':>9} {'poly exp':>9} {'root exp':>9}")
    for w in ws:
        print(f"{w.k:>3} {w.j:>2} {len(str(w.S.height)) - 1:>9} "
              f"{w.exponent_poly:9.4f} {w.exponent_root:9.4f}")

    scan = cubic_nonexistence_scan(ctx, args.scan_h, args.eps)
    print(f"\nscan H<={args.scan_h}, eps={args.eps}: {len(scan)} cubics")
    for P, e in scan:
        print(f"  H={P.height:>3}  exp={e:.4f}  {list(P.coeffs)}")
    for X in sorted({20, 40, args.scan_h}):
        print(f"uniform X={X}: {len(cubic_uniform_scan(ctx, X, args.eps))} cubics")


if __name__ == "__main__":
    main()
