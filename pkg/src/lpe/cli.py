"""Command-line interface: ``lpe simulate|estimate|mc|bias-table``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as lio
from .bias_table import DEFAULT_BETAS, DEFAULT_HS, MIN_H, MIN_REPS, generate_table
from .core import default_block_size
from .ma1 import ConvergenceError
from .ma1_lpe import lpe_ma1
from .mc import (StudyError, rejection_rates, run_ma1_study, run_uz_study, table1_config,
                 table2_config, uz_default_config)
from .paths import ParamPathSpec
from .simple import lpe_poisson, lpe_scaled_rv
from .simulate import (Ma1SimSpec, NoisyDiffusionSpec, UzSimSpec, simulate_noisy_diffusion,
                       simulate_poisson_counts, simulate_tv_ma1, simulate_uncertainty_zones)
from .uz import uz_constancy_test, uz_lpe


def _int_at_least(lo: int):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {s!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}, got {v}")
        return v
    return parse


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def _path(nu, amp, osc, positive=None) -> ParamPathSpec:
    nu, amp, osc = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (nu, amp, osc))
    if not np.any(amp):
        return ParamPathSpec.constant(nu, positive=positive)
    return ParamPathSpec.cosine(nu, amp, np.broadcast_to(osc, nu.shape).copy(), positive=positive)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    if args.model == "ma1":
        spec = Ma1SimSpec(args.n, args.T, _path(args.nu, args.amp, args.osc,
                                                positive=[False, False, True]), args.seed)
        lio.write_observations(args.out, simulate_tv_ma1(spec))
    elif args.model == "noisy-diffusion":
        spec = NoisyDiffusionSpec(args.n, args.T,
                                  _path([args.sigma2], [args.sigma2_amp], [args.osc[0]]),
                                  _path([args.v], [args.v_amp], [args.osc[0]]), args.seed)
        lio.write_observations(args.out, simulate_noisy_diffusion(spec))
    elif args.model == "poisson":
        alpha = args.alpha if args.alpha is not None else args.n / args.T
        series = simulate_poisson_counts(_path([args.rate], [args.rate_amp], [args.osc[0]]),
                                         args.n, args.T, alpha, args.seed)
        lio.write_observations(args.out, series)
    else:
        probs = args.jump_probs if args.jump_probs else [1.0 / args.m] * args.m
        if len(probs) != args.m:
            raise ValueError(f"--jump-probs needs {args.m} values")
        spec = UzSimSpec(args.tick, _path([args.eta], [args.eta_amp], [args.osc[0]]),
                         _path([args.sigma2], [args.sigma2_amp], [args.osc[0]]),
                         tuple(probs), x0=args.x0, T=args.T,
                         euler_substeps=args.substeps, seed=args.seed)
        lio.write_ticks(args.out, simulate_uncertainty_zones(spec))
    return 0


# ---------------------------------------------------------------------------
# estimate


def _print_result(res, out) -> None:
    se = res.standard_errors()
    print(f"blocks={res.partition.n_blocks} h={res.partition.h} n={res.n_obs} T={res.horizon!r}",
          file=out)
    for k, name in enumerate(res.names):
        line = f"{name}={float(res.theta_hat[k])!r}"
        if se is not None:
            line += f" se={float(se[k])!r}"
        print(line, file=out)


def cmd_estimate(args) -> int:
    out = sys.stdout
    if args.method == "lpe-uz":
        if args.tick is None:
            raise ValueError("lpe-uz needs --tick")
        ticks = lio.read_ticks(args.inp, args.tick)
        h = args.h or default_block_size(ticks.n_changes)
        res = uz_lpe(ticks, args.tick, h, args.T)
        _print_result(res, out)
        test = uz_constancy_test(ticks, h, res)
        print(f"chisq={float(test.stat)!r} df={test.df} pvalue={float(test.pvalue)!r}", file=out)
        return 0
    series = lio.read_observations(args.inp, args.T)
    h = args.h or default_block_size(len(series))
    if h > len(series):
        raise ValueError(f"block size {h} exceeds the {len(series)} observations")
    if args.method == "lpe-ma1":
        res = lpe_ma1(series, h, bias_correct=args.bias_correct, mu=args.mu)
    elif args.method == "rv":
        res = lpe_scaled_rv(series, h)
    else:
        res = lpe_poisson(series, h, args.alpha)
    _print_result(res, out)
    return 0


# ---------------------------------------------------------------------------
# mc and bias-table


def cmd_mc(args) -> int:
    if args.study == "uz":
        hs = tuple(args.h) if args.h else (43, 53, 63)
        report = run_uz_study(uz_default_config(args.paths, args.seed, args.eta_amp, hs),
                              threads=args.threads)
        for h, rate in rejection_rates(report).items():
            print(f"h={h} rejection_rate={rate!r}", file=sys.stderr)
    else:
        make = table1_config if args.study == "table1" else table2_config
        kw = {"n": args.n}
        if args.h:
            kw["hs"] = tuple(args.h)
        report = run_ma1_study(make(args.paths, args.seed, **kw), threads=args.threads)
    for label, paths in report.failures.items():
        print(f"warning: {label} failed on paths {paths}", file=sys.stderr)
    lio.write_text(args.out, report.to_csv())
    return 0


def cmd_bias_table(args) -> int:
    table = generate_table(args.reps, args.seed, mean_known=args.zero_mean,
                           betas=args.betas or DEFAULT_BETAS, hs=args.h or DEFAULT_HS)
    lio.write_text(args.out, table.to_csv())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpe", description="Local parametric estimation tools.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a series and write it as CSV")
    sim.add_argument("model", choices=("ma1", "noisy-diffusion", "uz", "poisson"))
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--n", type=_int_at_least(1), default=10_000)
    sim.add_argument("--T", type=_positive_float, default=1.0)
    sim.add_argument("--osc", type=float, nargs="+", default=[1.0],
                     help="oscillations over [0, T] for cosine paths")
    g = sim.add_argument_group("ma1")
    g.add_argument("--nu", type=float, nargs=3, default=[0.0, 0.5, 1.0],
                   metavar=("MU", "BETA", "KAPPA"))
    g.add_argument("--amp", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    g = sim.add_argument_group("noisy-diffusion and uz")
    g.add_argument("--sigma2", type=_positive_float, default=1.0)
    g.add_argument("--sigma2-amp", type=float, default=0.0)
    g.add_argument("--v", type=float, default=1.0)
    g.add_argument("--v-amp", type=float, default=0.0)
    g = sim.add_argument_group("uz")
    g.add_argument("--tick", type=_positive_float, default=0.03)
    g.add_argument("--eta", type=float, default=0.155)
    g.add_argument("--eta-amp", type=float, default=0.0)
    g.add_argument("--m", type=_int_at_least(1), default=1, help="largest jump in ticks")
    g.add_argument("--jump-probs", type=float, nargs="+")
    g.add_argument("--x0", type=float, default=0.0)
    g.add_argument("--substeps", type=_int_at_least(1), default=200)
    g = sim.add_argument_group("poisson")
    g.add_argument("--rate", type=_positive_float, default=3.0)
    g.add_argument("--rate-amp", type=float, default=0.0)
    g.add_argument("--alpha", type=_positive_float, help="default n / T")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run a block estimator on a CSV file")
    est.add_argument("method", choices=("lpe-ma1", "lpe-uz", "rv", "poisson"))
    est.add_argument("--in", dest="inp", required=True)
    est.add_argument("--h", type=_int_at_least(2), help="block size (default n^0.4999)")
    est.add_argument("--bias-correct", action="store_true")
    est.add_argument("--mu", type=float, help="hold the MA(1) mean fixed")
    est.add_argument("--T", type=_positive_float, help="horizon (default: sum of dt / last time)")
    est.add_argument("--tick", type=_positive_float, help="tick size for lpe-uz")
    est.add_argument("--alpha", type=_positive_float, help="intensity scale for poisson")
    est.set_defaults(func=cmd_estimate)

    mc = sub.add_parser("mc", help="Monte Carlo study, written as CSV")
    mc.add_argument("study", choices=("table1", "table2", "uz"))
    mc.add_argument("--paths", type=_int_at_least(1), required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--out", required=True)
    mc.add_argument("--threads", type=_int_at_least(1), default=1)
    mc.add_argument("--n", type=_int_at_least(500), default=10_000)
    mc.add_argument("--h", type=_int_at_least(2), nargs="+")
    mc.add_argument("--eta-amp", type=float, default=0.0)
    mc.set_defaults(func=cmd_mc)

    bt = sub.add_parser("bias-table", help="tabulate the MA(1) MLE bias")
    bt.add_argument("--reps", type=_int_at_least(MIN_REPS), required=True)
    bt.add_argument("--seed", type=int, required=True)
    bt.add_argument("--out", required=True)
    bt.add_argument("--h", type=_int_at_least(MIN_H), nargs="+")
    bt.add_argument("--betas", type=float, nargs="+")
    bt.add_argument("--zero-mean", action="store_true", help="fit with the mean held at 0")
    bt.set_defaults(func=cmd_bias_table)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, StudyError, ConvergenceError, OSError, ArithmeticError,
            np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
