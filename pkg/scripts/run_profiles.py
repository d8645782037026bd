"""Compute minima profiles for n = 1..4 and print the exponent estimates.

    python3 scripts/run_profiles.py --n 2 3 --q 60 150
"""
import argparse
import logging

from extremal_lab.graphlab import segment
from extremal_lab.suites import Lab, LabConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zeta", default="fib:1,2")
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--q", type=float, nargs="+", default=None,
                    help="profile ranges; defaults to the lab's per-n range")
    ap.add_argument("-v", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.v else logging.WARNING)

    lab = Lab(LabConfig(zeta_spec=args.zeta))
    for n in args.n:
        for q in args.q or [lab.q_max(n)]:
            rep = lab.report(n, q)
            print(f"n={n} q<={q:g}")
            for j in range(n + 1):
                print(f"  j={j + 1}  w={rep.w[j]:.5f}  w_hat={rep.w_hat[j]:.5f}"
                      f"  lam={rep.lam[j]:.5f}  lam_hat={rep.lam_hat[j]:.5f}")
            if n == 3:
                seg = segment(lab.profile(3, "dual", q=q))
                print("  joint near-zeros:", ", ".join(f"{x:.2f}" for x in seg.q))


if __name__ == "__main__":
    main()
