"""Command-line interface.

Exit codes: 0 success, 1 a verdict failed (violated inequality, failed
identity, monotonicity breach or a run that blew up), 2 usage or
configuration error.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import ConfigError, HypflowError
from .config import load_config
from .flow import run
from .functionals import functional_report, minkowski_residuals
from .hypgeom import Profile
from .runner import simulate
from .serialize import dumps, fmt
from .surface import geometry
from .verify import IDENTITY_TOL, identity_battery, inequality_suite, suite_failed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser():
    p = _Parser(prog="hypflow", description="Curvature flows and geometric inequalities in hyperbolic space.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="run the flow for one or more configs")
    s.add_argument("--config", action="append", required=True, help="run config JSON (repeatable)")
    s.add_argument("--jobs", type=int, default=1, help="configs evaluated concurrently")
    s.add_argument("--quiet", action="store_true")

    q = sub.add_parser("inequalities", help="evaluate the inequality suite")
    q.add_argument("--config", required=True)
    q.add_argument("--at", choices=("initial", "final"), default="initial")
    q.add_argument("--json", action="store_true", help="print records as JSON")
    # test hook: negate one functional of the report before evaluating
    q.add_argument("--flip-sign", dest="flip_sign", default=None, help=argparse.SUPPRESS)

    i = sub.add_parser("identities", help="run the symmetric-function identity battery")
    i.add_argument("--n", type=int, required=True)
    i.add_argument("--samples", type=int, default=1000)
    i.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("ball-table", help="tabulate geodesic-ball profiles")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--r-min", type=float, default=0.1)
    b.add_argument("--r-max", type=float, default=3.0)
    b.add_argument("--count", type=int, default=30)
    b.add_argument("--out", default=None, help="CSV path (default: standard output)")

    m = sub.add_parser("minkowski", help="Minkowski residuals of a config's initial surface")
    m.add_argument("--config", required=True)
    return p


def _simulate_one(cfg):
    summary, _, _ = simulate(cfg)
    return summary


def cmd_simulate(args):
    # every config is validated before any run starts
    configs = [load_config(path) for path in args.config]
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            summaries = list(pool.map(_simulate_one, configs))
    else:
        summaries = [_simulate_one(cfg) for cfg in configs]
    code = EXIT_OK
    for path, cfg, summary in zip(args.config, configs, summaries):
        out_dir = cfg.out_dir
        if not args.quiet:
            alpha = summary["alpha_fit"]
            print(
                f"{path}: {summary['status']} t={summary['t_final']:.6g} "
                f"radius={summary['final_radius']:.10g} predicted={summary['predicted_radius']} "
                f"alpha={alpha if alpha is None else f'{alpha:.4g}'} -> {out_dir}"
            )
        if summary["failed"]:
            code = EXIT_FAIL
    return code


def cmd_inequalities(args):
    cfg = load_config(args.config)
    g = cfg.initial_surface()
    if args.at == "final":
        _, g = run(g, cfg.flow)
    fields = geometry(g)
    report = functional_report(g, fields)
    if args.flip_sign is not None:
        _flip(report, args.flip_sign)
    tol = cfg.tolerances
    records = inequality_suite(g, fields=fields, report=report, eq_tol=tol.eq_tol, viol_tol=tol.viol_tol)
    if args.json:
        sys.stdout.write(dumps([rec.to_dict() for rec in records]))
    else:
        for rec in records:
            idx = ",".join(f"{k}={v}" for k, v in rec.indices.items())
            print(f"{rec.id:9s} {idx:18s} {rec.verdict:16s} gap={rec.relative_gap:.3e}")
    return EXIT_FAIL if suite_failed(records) else EXIT_OK


def _flip(report, key):
    """Negate one entry of a report, addressed by its flat key (``W2``, ``int_L_1``, ...)."""
    for name in ("Wt", "W"):
        if key.startswith(name) and key[len(name) :].isdigit():
            getattr(report, name)[int(key[len(name) :])] *= -1
            return
    base, _, idx = key.rpartition("_")
    if idx.isdigit() and isinstance(getattr(report, base, None), np.ndarray):
        getattr(report, base)[int(idx)] *= -1
        return
    if key == "area":
        report.area = -report.area
        return
    raise ConfigError(f"unknown functional {key!r}")


def cmd_identities(args):
    if args.n < 1 or args.samples < 1:
        raise ConfigError("--n and --samples must be positive")
    result = identity_battery(args.n, args.samples, args.seed)
    worst = max(result.values())
    for name, value in result.items():
        print(f"{name:24s} {value:.3e}")
    ok = worst <= IDENTITY_TOL
    print(f"max violation {worst:.3e} ({'pass' if ok else 'FAIL'}, tolerance {IDENTITY_TOL:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ball_table(args):
    n = args.n
    if n < 2 or args.count < 1 or not 0 < args.r_min <= args.r_max:
        raise ConfigError("need n >= 2, count >= 1 and 0 < r-min <= r-max")
    r = np.linspace(args.r_min, args.r_max, args.count)
    cols, data = ["r"], [r]
    for kind, kmax in (("f", n), ("ft", n), ("g", n // 2), ("h", n), ("ht", n), ("gt", n // 2)):
        for k in range(kmax + 1):
            cols.append(f"{kind}{k}")
            data.append(np.asarray(Profile(kind, n, k)(r), dtype=float))
    lines = [",".join(cols)] + [",".join(fmt(x) for x in row) for row in np.column_stack(data)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_minkowski(args):
    cfg = load_config(args.config)
    g = cfg.initial_surface()
    fields = geometry(g)
    rho, rho_t = minkowski_residuals(g, fields)
    report = functional_report(g, fields)
    scale = np.maximum(1.0, np.abs(report.int_dlam_E[: cfg.n]))
    sys.stdout.write(
        dumps(
            {
                "n": cfg.n,
                "grid_N": cfg.grid_N,
                "rho": rho,
                "rho_shifted": rho_t,
                "rho_relative": rho / scale,
                "max_abs": float(max(np.max(np.abs(rho)), np.max(np.abs(rho_t)))),
            }
        )
    )
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "inequalities": cmd_inequalities,
    "identities": cmd_identities,
    "ball-table": cmd_ball_table,
    "minkowski": cmd_minkowski,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"hypflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypflowError as exc:
        print(f"hypflow: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
