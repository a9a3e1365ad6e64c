"""One simulated tick series: friction, corrected and plain realized variance
over a range of block sizes."""

import argparse

from lpe.paths import ParamPathSpec
from lpe.simulate import UzSimSpec, simulate_uncertainty_zones
from lpe.uz import (count_alt_cont, eta_bias_sd, eta_hat, realized_variance, uz_constancy_test,
                    uz_lpe)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--tick", type=float, default=0.03)
    ap.add_argument("--eta", type=float, default=0.155)
    args = ap.parse_args()
    spec = UzSimSpec(args.tick, ParamPathSpec.constant([args.eta]), ParamPathSpec.constant([1.0]),
                     seed=args.seed)
    ticks = simulate_uncertainty_zones(spec)
    counts = count_alt_cont(ticks)
    g = eta_hat(counts)
    fb = eta_bias_sd(g, counts)
    print(f"changes={ticks.n_changes} eta_hat={g:.4f} bias={fb.bias:+.5f} sd={fb.sd:.4f}")
    print(f"plain RV={realized_variance(ticks):.4f}")
    for h in range(43, 64, 4):
        res = uz_lpe(ticks, args.tick, h, 1.0)
        test = uz_constancy_test(ticks, h, res)
        print(f"h={h}  sigma2={res.theta_hat[0]:.4f}  eta={res.theta_hat[1]:.4f}  "
              f"chisq={test.stat:.1f} df={test.df} p={test.pvalue:.3f}")


if __name__ == "__main__":
    main()
