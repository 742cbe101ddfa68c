"""Command-line entry point: ``ppm-jscc {bounds,simulate,verify-appendix}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .bounds import (
    appendix_chain_check,
    db_to_linear,
    gaussian_bound,
    gaussian_optimized,
    uniform_bound,
    uniform_optimized,
)
from .experiment import (
    ExperimentConfig,
    Scheme,
    default_output_dir,
    emit_report,
    parse_beta_policy,
    run_point,
)

log = logging.getLogger("ppm_jscc")


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def read_config_file(path) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file supplying defaults for the subcommand")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="ppm-jscc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common], help="evaluate the distortion upper bounds")
    b.add_argument("--source", choices=["uniform", "gaussian"], required=True)
    b.add_argument("--enr-db", type=_float_list, required=True)
    group = b.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float)
    group.add_argument("--theorem-beta", action="store_true")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo sweep over ENR")
    s.add_argument("--scheme", choices=[m.value for m in Scheme], required=True)
    s.add_argument("--enr-db", type=_float_list, required=True)
    s.add_argument("--beta-policy", default="theorem",
                   help="fixed:<v> | theorem | grid[:lo,hi,points]")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="CSV path (default: $PPM_JSCC_OUTPUT_DIR/<scheme>.csv)")
    s.add_argument("--plot", action="store_true", help="also write an SVG next to the CSV")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--bootstrap", action="store_true",
                   help="log a 2000-resample bootstrap CI alongside the normal one")
    s.add_argument("--pulse-limit", type=float, default=None,
                   help="Gaussian source: largest allowed pulse extent |x|*delta + delta/(2 beta)")
    s.add_argument("--reconstruction", choices=["midpoint", "centroid"], default="midpoint")

    v = sub.add_parser("verify-appendix", parents=[common], help="numerical checks of the bound derivation")
    v.add_argument("--enr", type=_float_list, required=True)
    v.add_argument("--beta", type=_float_list, required=True)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from --config (explicit flags still win)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    values = read_config_file(known.config)
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    explicit = {a.dest for a in sub._actions if any(opt in argv for opt in a.option_strings)}
    converters = {a.dest: a for a in sub._actions}
    for key, raw in values.items():
        if key not in converters:
            raise SystemExit(f"unknown config key {key!r} for {args.command}")
        if key in explicit:
            continue
        action = converters[key]
        if isinstance(action, (argparse._StoreTrueAction,)):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        setattr(args, key, value)
    return args


def cmd_bounds(args) -> int:
    print("enr_db,beta,d_s,pl_dl,total,asymptotic_total")
    for db in args.enr_db:
        enr = float(db_to_linear(db))
        if args.beta is None:
            opt = uniform_optimized(enr) if args.source == "uniform" else gaussian_optimized(enr)
            beta = opt.beta_star
        else:
            beta = args.beta
        rep = uniform_bound(enr, beta) if args.source == "uniform" else gaussian_bound(enr, beta)
        print(",".join(repr(float(v)) for v in (db, beta, rep.d_s, rep.pl_dl, rep.total,
                                                rep.asymptotic_total)))
    return 0


def cmd_simulate(args) -> int:
    extra = {}
    if args.pulse_limit is not None:
        extra["pulse_limit"] = args.pulse_limit
    out = Path(args.out) if args.out else default_output_dir() / f"{args.scheme}.csv"
    config = ExperimentConfig(
        scheme=Scheme(args.scheme),
        enr_grid_db=args.enr_db,
        beta_policy=parse_beta_policy(args.beta_policy),
        trials=args.trials,
        master_seed=args.seed,
        output_path=str(out),
        workers=args.workers,
        bootstrap=args.bootstrap,
        reconstruction=args.reconstruction,
        **extra,
    )
    results = []
    for i, db in enumerate(config.enr_grid_db):
        r = run_point(config, i)
        results.append(r)
        msg = "enr_db=%g beta=%.6g mse=%.4g ci95=%.3g sdr_db=%.3f overflow=%d"
        log.info(msg, db, r.beta, r.mse, r.mse_ci95, r.sdr_db, r.overflow_count)
        if r.mse_ci95_bootstrap is not None:
            log.info("  bootstrap ci95=%.3g", r.mse_ci95_bootstrap)
    for path in emit_report(results, out, plot=args.plot):
        print(path)
    return 0


def cmd_verify_appendix(args) -> int:
    print("enr,beta,ds_rel_error,large_error_ratio,q_sandwich,passed")
    failed = 0
    for enr in args.enr:
        for beta in args.beta:
            v = appendix_chain_check(enr, beta)
            ratio = 2 * (v.d_l1 + v.d_l2) / v.pl_dl if v.pl_dl > 0 else math.inf
            print(f"{enr!r},{beta!r},{v.ds_rel_error!r},{ratio!r},{v.q_sandwich_ok},{v.passed}")
            failed += not v.passed
    return 1 if failed else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    handler = {"bounds": cmd_bounds, "simulate": cmd_simulate,
               "verify-appendix": cmd_verify_appendix}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
