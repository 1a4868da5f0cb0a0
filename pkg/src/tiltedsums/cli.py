"""Command-line front end.

Subcommands: tilt, edgeworth, ratio, tv, check, sweep.  Results go to
standard output or files; logging goes to standard error.  Exit codes:
0 success, 1 any sweep row failed, 2 configuration error.
"""

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import checks as checks_mod
from .config import ConfigError, parse_config_file
from .conditional import RatioContext, normalized_exact_density
from .edgeworth import build_model, edgeworth_density
from .errors import TiltedSumsError
from .sweep import emit_report, fit_scaling, run_sweep
from .tilting import solve_tilt
from .tv import tv_joint_mc, tv_scheffe, tv_sum_mc

logger = logging.getLogger("tiltedsums")

THREADS_ENV = "TILTEDSUMS_THREADS"


def _vector_arg(text):
    return np.array([float(p) for p in text.split(";")])


def _grid_arg(text):
    lo, hi, pts = text.split(":")
    return float(lo), float(hi), int(pts)


def _default_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_common(parser, need_config=True):
    parser.add_argument("--config", required=need_config, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or 1)")
    parser.add_argument("--out", default=None, help="output file or directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="tiltedsums",
                                     description="tilted measures, Edgeworth expansions, and "
                                                 "conditional TV distances for independent sums")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tilt", help="solve the tilting equation and print the result")
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="number of members (default: largest sweep n)")
    p.add_argument("--a", type=_vector_arg, default=None, help="target mean, ';' between components")

    p = sub.add_parser("edgeworth", help="CSV of exact vs Edgeworth normalized sum densities (d = 1)")
    _add_common(p)
    p.add_argument("--count", type=int, default=64, help="number of summands")
    p.add_argument("--a", type=_vector_arg, default=None, help="tilt the members to this mean")
    p.add_argument("--theta", type=_vector_arg, default=None, help="explicit tilt parameter")
    p.add_argument("--grid", type=_grid_arg, default=(-6.0, 6.0, 241), help="lo:hi:points")

    p = sub.add_parser("ratio", help="CSV of exact vs Edgeworth density ratio over a t grid (d = 1)")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=_vector_arg, required=True)
    p.add_argument("--t-grid", type=_grid_arg, default=(-3.0, 3.0, 61),
                   help="grid in normalized t_tilde units, lo:hi:points")

    p = sub.add_parser("tv", help="one total-variation estimate as a CSV row")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=_vector_arg, required=True)
    p.add_argument("--method", choices=("scheffe", "sum_mc", "joint_mc"), default="scheffe")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("check", help="run the assumption battery and print the report")
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="number of members (default: largest sweep n)")
    p.add_argument("--beta", type=float, default=0.5, help="cf separation threshold")
    p.add_argument("--box", default=None, help="theta box lo:hi (d = 1); default derives from the sweep")

    p = sub.add_parser("sweep", help="run the configured sweep and write results.csv / scaling.csv")
    _add_common(p)
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds per row (voids byte reproducibility)")

    return parser


def _load(args):
    cfg = parse_config_file(args.config)
    return cfg.with_overrides(seed=args.seed, out=args.out)


def _members_for(cfg, n):
    count = n if n is not None else max(cfg.n_values)
    return cfg.family.build(count)


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_tilt(args):
    cfg = _load(args)
    members = _members_for(cfg, args.n)
    a = args.a if args.a is not None else np.array(cfg.a_values[0])
    sol = solve_tilt(members, a)
    theta = ";".join(f"{v:.17g}" for v in sol.theta)
    sys.stdout.write(
        f"theta={theta} residual_norm={sol.residual_norm:.6e} "
        f"iterations={sol.iterations} converged={sol.converged}\n"
    )
    return 0 if sol.converged else 1


def cmd_edgeworth(args):
    cfg = _load(args)
    members = _members_for(cfg, args.count)
    if members[0].dim != 1:
        raise ConfigError("the edgeworth subcommand handles one-dimensional members")
    if args.theta is not None:
        theta = args.theta
    elif args.a is not None:
        theta = solve_tilt(members, args.a).theta
    else:
        theta = np.zeros(1)
    model1 = build_model(members, theta, order=1)
    model0 = build_model(members, theta, order=0)
    exact = normalized_exact_density(members, theta, model=model1)
    lo, hi, pts = args.grid
    xs = np.linspace(lo, hi, pts)
    exact_vals = exact(xs.reshape(-1, 1))
    o0 = edgeworth_density(model0, xs.reshape(-1, 1))
    o1 = edgeworth_density(model1, xs.reshape(-1, 1))
    lines = ["x,exact,order0,order1,abs_err0,abs_err1"]
    for x, e, a0, a1 in zip(xs, exact_vals, o0, o1):
        lines.append(f"{x:.17g},{e:.17g},{a0:.17g},{a1:.17g},{abs(e - a0):.17g},{abs(e - a1):.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_ratio(args):
    cfg = _load(args)
    members = cfg.family.build(args.n)
    if members[0].dim != 1:
        raise ConfigError("the ratio subcommand handles one-dimensional members")
    ctx = RatioContext(members, args.k, args.a)
    lo, hi, pts = args.t_grid
    t_tilde_targets = np.linspace(lo, hi, pts)
    block_sd = 1.0 / float(ctx.block_B[0, 0])
    ts = float(ctx.block_mean[0]) + np.sqrt(ctx.k) * block_sd * t_tilde_targets
    t_tilde, t_sharp = ctx.coords(ts.reshape(-1, 1))
    exact = ctx.exact(ts.reshape(-1, 1))
    edge = ctx.edgeworth(ts.reshape(-1, 1))
    lines = ["t,t_tilde,t_sharp,exact,edgeworth"]
    for t, tt, tsh, ex, ed in zip(ts, t_tilde[:, 0], t_sharp[:, 0], exact, edge):
        lines.append(f"{t:.17g},{tt:.17g},{tsh:.17g},{ex:.17g},{ed:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_tv(args):
    cfg = _load(args)
    members = cfg.family.build(args.n)
    a = args.a
    samples = args.samples if args.samples is not None else cfg.samples
    start = time.perf_counter()
    if args.method == "scheffe":
        est = tv_scheffe(members, args.k, a)
    elif args.method == "sum_mc":
        est = tv_sum_mc(members, args.k, a, samples=samples, rng=cfg.seed)
    else:
        est = tv_joint_mc(members, args.k, a, samples=samples, rng=cfg.seed)
    seconds = time.perf_counter() - start
    a_txt = ";".join(f"{v:.17g}" for v in np.atleast_1d(a))
    lines = [
        "n,k,a,method,value,std_error,seconds",
        f"{est.n},{est.k},{a_txt},{est.method},{est.value:.17g},{est.std_error:.17g},{seconds:.3f}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_check(args):
    cfg = _load(args)
    members = _members_for(cfg, args.n)
    if args.box is not None:
        lo, hi = (float(v) for v in args.box.split(":"))
        box = checks_mod.ThetaBox((lo,), (hi,))
    else:
        thetas = []
        for n in cfg.n_values:
            seq = cfg.family.build(n)
            for a in cfg.a_values:
                thetas.append(solve_tilt(seq, np.array(a)).theta)
        box = checks_mod.theta_box_from_solutions(thetas, members)
    report = checks_mod.run_assumption_checks(members, box, beta=args.beta)
    sys.stdout.write(report.to_text() + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.csv_rows())
    return 0 if report.all_passed else 1


def cmd_sweep(args):
    cfg = _load(args)
    threads = args.threads if args.threads is not None else _default_threads()
    rows = run_sweep(cfg, threads=threads, timing=args.timing)
    fit = None
    try:
        fit = fit_scaling(rows)
    except ValueError as exc:
        logger.warning("no scaling fit: %s", exc)
    results_path, scaling_path = emit_report(rows, fit, cfg.out)
    sys.stdout.write(f"wrote {results_path}\n")
    if scaling_path:
        sys.stdout.write(f"wrote {scaling_path}\n")
    if fit is not None:
        sys.stdout.write(
            f"scaling exponent={fit.exponent:.4f} log_constant={fit.log_constant:.4f} "
            f"r_squared={fit.r_squared:.5f}\n"
        )
    return 1 if any(r.error is not None for r in rows) else 0


_COMMANDS = {
    "tilt": cmd_tilt,
    "edgeworth": cmd_edgeworth,
    "ratio": cmd_ratio,
    "tv": cmd_tv,
    "check": cmd_check,
    "sweep": cmd_sweep,
}


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return 2
    except TiltedSumsError as exc:
        logger.error("%s", exc)
        return 1


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
