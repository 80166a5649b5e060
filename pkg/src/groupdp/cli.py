"""Command-line surface: account, calibrate, compare and sweep.

Exit codes: 0 ok, 2 usage error, 3 calibration infeasible, 4 I/O failure,
5 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from .accountant import (
    DEFAULT_ALPHA_GRID,
    AccountingQuery,
    RgpGuarantee,
    GpGuarantee,
    account_mechanism,
    best_gp,
    compose,
    rgp_to_gp,
)
from .baseline import effective_group_size
from .calibration import (
    ACCOUNTANTS,
    CalibrationInfeasible,
    achieved_guarantee,
    calibrate,
    round_tau,
)
from .mechanisms import MechanismSpec, make_mechanism, noise_value
from .numerics import NumericalFailure
from .sweep import parse_sweep_spec, run_sweep, write_sweep_csv

_NOISE_FLAGS = {"gaussian": "sigma", "laplace": "b", "skellam": "mu", "rr": "p"}


def _add_mechanism_flags(parser: argparse.ArgumentParser, with_noise: bool) -> None:
    parser.add_argument("--mech", required=True, choices=sorted(_NOISE_FLAGS),
                        help="mechanism family")
    if with_noise:
        parser.add_argument("--sigma", type=float, help="gaussian noise multiplier")
        parser.add_argument("--b", type=float, help="laplace scale multiplier")
        parser.add_argument("--mu", type=float, help="skellam variance parameter")
        parser.add_argument("--p", type=float, help="randomized-response truth probability")
    parser.add_argument("--sens-c", type=int, default=1, dest="sens_c",
                        help="skellam integer sensitivity (default 1)")


def _add_query_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, required=True, help="sampling rate in (0,1)")
    parser.add_argument("--T", type=int, default=1, help="number of composed iterations")
    parser.add_argument("--m", type=int, required=True, help="group size")


def _add_order_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float,
                        help="fixed Renyi order (default: optimize over 2..100)")
    parser.add_argument("--delta", type=float,
                        help="GP delta; required when optimizing over orders")


def _mechanism_from_args(args) -> MechanismSpec:
    flag = _NOISE_FLAGS[args.mech]
    value = getattr(args, flag)
    if value is None:
        raise ValueError(f"--mech {args.mech} requires --{flag}")
    for other in set(_NOISE_FLAGS.values()) - {flag}:
        if getattr(args, other) is not None:
            raise ValueError(f"--{other} does not apply to --mech {args.mech}")
    return make_mechanism(args.mech, value, args.sens_c)


def _fmt(x: float) -> str:
    return format(x, ".10g")


def cmd_account(args) -> int:
    mechanism = _mechanism_from_args(args)
    query = AccountingQuery(
        mechanism=mechanism, q=args.q, iterations=args.T, m=args.m,
        delta=args.delta if args.delta is not None else 1e-5,
    )
    print(f"mechanism: {args.mech} ({_NOISE_FLAGS[args.mech]}={_fmt(noise_value(mechanism))})")
    print(f"query: q={_fmt(args.q)} T={args.T} m={args.m}")
    if args.alpha is not None:
        tau = compose(account_mechanism(query, args.alpha).tau, args.T)
        print(f"rgp: m={args.m} alpha={_fmt(args.alpha)} tau={_fmt(tau)}")
        if args.delta is not None:
            gp = rgp_to_gp(RgpGuarantee(args.m, args.alpha, tau), args.delta)
            print(f"gp: m={args.m} epsilon={_fmt(gp.epsilon)} delta={_fmt(gp.delta)}")
        return 0
    if args.delta is None:
        raise ValueError("provide --alpha for a fixed order or --delta to optimize over orders")
    gp, alpha = best_gp(query)
    tau = compose(account_mechanism(query, alpha).tau, args.T)
    print(f"rgp: m={args.m} alpha={_fmt(alpha)} tau={_fmt(tau)}")
    print(f"gp: m={args.m} epsilon={_fmt(gp.epsilon)} delta={_fmt(gp.delta)}")
    print(f"chosen alpha: {_fmt(alpha)} (grid {DEFAULT_ALPHA_GRID[0]}..{DEFAULT_ALPHA_GRID[-1]})")
    return 0


def cmd_calibrate(args) -> int:
    if (args.target_tau is None) == (args.target_eps is None):
        raise ValueError("provide exactly one of --target-tau (with --alpha) or --target-eps (with --delta)")
    if args.target_tau is not None:
        if args.alpha is None:
            raise ValueError("--target-tau needs --alpha")
        target: RgpGuarantee | GpGuarantee = RgpGuarantee(args.m, args.alpha, args.target_tau)
    else:
        if args.delta is None:
            raise ValueError("--target-eps needs --delta")
        target = GpGuarantee(args.m, args.target_eps, args.delta)
    accountant = "lower" if args.accountant == "lower_bound" else args.accountant
    noise = calibrate(
        args.mech, target, q=args.q, iterations=args.T,
        accountant=accountant, sensitivity_c=args.sens_c,
    )
    mechanism = make_mechanism(args.mech, noise, args.sens_c)
    metric, alpha_used = achieved_guarantee(
        mechanism, target, q=args.q, iterations=args.T, accountant=accountant
    )
    kind = "tau" if isinstance(target, RgpGuarantee) else "epsilon"
    wanted = target.tau if isinstance(target, RgpGuarantee) else target.epsilon
    print(f"calibrated {_NOISE_FLAGS[args.mech]} = {_fmt(noise)}")
    print(f"verification ({args.accountant}): {kind}={_fmt(metric)} at alpha={_fmt(alpha_used)} "
          f"(target {kind}={_fmt(wanted)})")
    return 0


def cmd_compare(args) -> int:
    mechanism = _mechanism_from_args(args)
    if args.alpha is None and args.delta is None:
        raise ValueError("provide --alpha for a fixed order or --delta to optimize over orders")
    print("# three-way accounting report")
    print("# baseline rdp source: tight subsampled-Gaussian formula for gaussian; "
          "m=1 subsampled bound for laplace/skellam/rr")
    print(f"mechanism: {args.mech} ({_NOISE_FLAGS[args.mech]}={_fmt(noise_value(mechanism))}) "
          f"q={_fmt(args.q)} T={args.T} m={args.m}")
    for name, internal in (("ours", "ours"), ("baseline", "baseline"), ("lower_bound", "lower")):
        eff_m = effective_group_size(args.m) if name == "baseline" else args.m
        if args.alpha is not None:
            tau = compose(round_tau(internal, mechanism, args.m, args.alpha, args.q), args.T)
            alpha_used = args.alpha
        else:
            target = GpGuarantee(args.m, 1.0, args.delta)  # epsilon field unused here
            eps, alpha_used = achieved_guarantee(
                mechanism, target, q=args.q, iterations=args.T, accountant=internal
            )
            tau = compose(round_tau(internal, mechanism, args.m, alpha_used, args.q), args.T)
        line = (f"{name:12s} effective_m={eff_m:<5d} alpha={_fmt(alpha_used):<6s} "
                f"tau={_fmt(tau)}")
        if args.delta is not None:
            eps = rgp_to_gp(RgpGuarantee(args.m, alpha_used, tau), args.delta).epsilon
            line += f" epsilon={_fmt(eps)}"
        print(line)
    return 0


def cmd_sweep(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = parse_sweep_spec(fh.read())
    out_path = args.out or spec.out
    if out_path is None:
        raise ValueError("no output path: set 'out' in the spec file or pass --out")
    rows = run_sweep(spec, workers=args.workers)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        write_sweep_csv(spec, rows, fh)
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupdp",
        description="Renyi group-privacy accounting and noise calibration for subsampled mechanisms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_account = sub.add_parser("account", help="report the guarantee of a fixed mechanism")
    _add_mechanism_flags(p_account, with_noise=True)
    _add_query_flags(p_account)
    _add_order_flags(p_account)
    p_account.set_defaults(func=cmd_account)

    p_cal = sub.add_parser("calibrate", help="search the noise meeting a target guarantee")
    _add_mechanism_flags(p_cal, with_noise=False)
    _add_query_flags(p_cal)
    _add_order_flags(p_cal)
    p_cal.add_argument("--target-tau", type=float, dest="target_tau",
                       help="divergence target (with --alpha)")
    p_cal.add_argument("--target-eps", type=float, dest="target_eps",
                       help="epsilon target (with --delta)")
    p_cal.add_argument("--accountant", default="ours",
                       choices=sorted(set(ACCOUNTANTS) | {"lower_bound"}),
                       help="which bound to invert")
    p_cal.set_defaults(func=cmd_calibrate)

    p_cmp = sub.add_parser("compare", help="single-point three-way report")
    _add_mechanism_flags(p_cmp, with_noise=True)
    _add_query_flags(p_cmp)
    _add_order_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="run a sweep spec file and write CSV")
    p_sweep.add_argument("--spec", required=True, help="path to the sweep spec file")
    p_sweep.add_argument("--out", help="output CSV path (overrides the spec's 'out')")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes (default 1)")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CalibrationInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
