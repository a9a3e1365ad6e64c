"""Size and power of the friction constancy test on simulated tick data.

Constant friction should be rejected about 5% of the time at level 0.05;
a one-period cosine in the friction should almost always be rejected.
"""

import argparse

from lpe.mc import rejection_rates, run_uz_study, uz_default_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--amp", type=float, default=0.1, help="cosine amplitude for the power run")
    ap.add_argument("--h", type=int, nargs="+", default=[43, 53, 63])
    args = ap.parse_args()
    for label, amp in (("constant", 0.0), (f"cosine amp={args.amp}", args.amp)):
        rep = run_uz_study(uz_default_config(args.paths, args.seed, amp, args.h))
        rates = rejection_rates(rep)
        print(label)
        for h in args.h:
            s2 = rep.get("UZ-LPE", h, "sigma2")
            eta = rep.get("UZ-LPE", h, "eta")
            print(f"  h={h:>4}  reject={rates[h]:.3f}  sigma2 bias={s2.bias:+.4f} (sd {s2.sd:.4f})"
                  f"  eta bias={eta.bias:+.4f} (sd {eta.sd:.4f})")


if __name__ == "__main__":
    main()
