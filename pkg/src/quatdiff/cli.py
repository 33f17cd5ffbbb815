"""Command-line interface.

Subcommands::

    quatdiff stability --e0-min -0.9 --e0-max 1 --steps 100 --out sweep.csv --plot sweep.svg
    quatdiff eigvals --e0 0.5 --w 1
    quatdiff simulate --scenario paper_sec5 --out run --plot
    quatdiff selftest --seed 20240601
    quatdiff report --out-dir results

``eigvals`` exits with 0, 1 or 2 for MarginallyStable, Unstable or Boundary;
all commands exit with 3 on invalid input.
"""

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .checks import DEFAULT_SEED, run_selftest
from .errors import InvalidRange, NonFiniteDerivative, QuatDiffError
from .io import bundled_scenarios, format_value, load_scenario, write_csv
from .sim import run, summarize
from .stability import DEFAULT_TOL, classify, discriminant_root

log = logging.getLogger("quatdiff")

EXIT_DOMAIN = 3
EXIT_NONFINITE = 4
NUDGE = 1e-9

STABILITY_COLUMNS = ("e0", "a", "b", "c", "ab_minus_c", "discriminant", "max_re_eigenvalue", "class")
EIGVALS_COLUMNS = ("e0", "w", "discriminant", "class",
                   "cubic_root_1", "cubic_root_2", "cubic_root_3",
                   "eig_1", "eig_2", "eig_3", "eig_4", "eig_5", "eig_6")


def _fmt_complex(z):
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def stability_grid(e0_min, e0_max, steps):
    """Evenly spaced grid with the poles ``0`` and ``-1`` nudged by ``1e-9``."""
    if not (math.isfinite(e0_min) and math.isfinite(e0_max)):
        raise InvalidRange("e0 bounds must be finite")
    if not -1.0 <= e0_min < e0_max <= 1.0:
        raise InvalidRange(f"need -1 <= e0-min < e0-max <= 1, got [{e0_min}, {e0_max}]")
    if steps < 2:
        raise InvalidRange("steps must be at least 2")
    grid = np.linspace(e0_min, e0_max, steps)
    for i, x in enumerate(grid):
        # linspace can land a rounding error away from a pole
        for pole in (0.0, -1.0):
            if abs(x - pole) < NUDGE:
                grid[i] = pole + NUDGE
                log.warning("e0 = %g is a pole of the closed form; nudged to %r", pole, float(grid[i]))
    return grid


def stability_rows(grid, w=1.0, tol=DEFAULT_TOL):
    rows = []
    for e0 in grid:
        rep = classify(float(e0), w, tol)
        rows.append((rep.e0, rep.a, rep.b, rep.c, rep.ab_minus_c, rep.discriminant,
                     rep.max_re_eigenvalue, rep.stability.value))
    return rows


def cmd_stability(args):
    grid = stability_grid(args.e0_min, args.e0_max, args.steps)
    if not args.w > 0:
        raise InvalidRange("--w must be positive")
    rows = stability_rows(grid, args.w, args.tol)
    config = {"command": "stability", "e0_min": args.e0_min, "e0_max": args.e0_max,
              "steps": args.steps, "w_rad_s": args.w, "tol": args.tol}
    if args.out and args.out != "-":
        write_csv(args.out, STABILITY_COLUMNS, rows, config)
    else:
        write_csv(sys.stdout, STABILITY_COLUMNS, rows, config)
    if args.plot:
        from .plotting import stability_figure

        e0 = [r[0] for r in rows]
        ab = [r[1] * r[2] for r in rows]
        c = [r[3] for r in rows]
        delta = [r[5] for r in rows]
        root = discriminant_root()
        stability_figure(e0, ab, c, delta, args.plot,
                         root=root if min(e0) <= root <= max(e0) else None)
    return 0


def cmd_eigvals(args):
    if not args.w > 0:
        raise InvalidRange("--w must be positive")
    rep = classify(args.e0, args.w, args.tol)
    out = sys.stdout
    out.write(f"e0             {rep.e0!r}\n")
    out.write(f"|w| (rad/s)    {rep.w_mag!r}\n")
    out.write(f"error angle    {rep.error_angle_deg:.4f} deg "
              f"(half angle {rep.error_half_angle_deg:.4f} deg)\n")
    out.write(f"cubic a, b, c  {rep.a!r}, {rep.b!r}, {rep.c!r}\n")
    out.write(f"a b - c        {rep.ab_minus_c!r}\n")
    out.write(f"discriminant   {rep.discriminant!r}\n")
    out.write("cubic roots\n")
    for z in rep.cubic_roots:
        out.write(f"  {z.real: .12e} {z.imag:+.12e}j\n")
    out.write("eigenvalues\n")
    for z in rep.eigenvalues:
        out.write(f"  {z.real: .12e} {z.imag:+.12e}j\n")
    out.write(f"class          {rep.stability.value}\n")
    out.write("\n")
    row = ([rep.e0, rep.w_mag, rep.discriminant, rep.stability.value]
           + [_fmt_complex(z) for z in rep.cubic_roots]
           + [_fmt_complex(z) for z in rep.eigenvalues])
    out.write(",".join(EIGVALS_COLUMNS) + "\n")
    out.write(",".join(format_value(x) for x in row) + "\n")
    return rep.stability.exit_code


def simulate_to_files(cfg, prefix, plot=False, title=None):
    """Run ``cfg`` and write ``PREFIX_trace.csv``, ``PREFIX_summary.csv`` and optionally ``PREFIX_fig.svg``."""
    trace = run(cfg)
    config = cfg.to_dict()
    write_csv(f"{prefix}_trace.csv", trace.columns, trace.data, config)
    summary = summarize(trace)
    write_csv(f"{prefix}_summary.csv", ("metric", "value"), list(summary.items()), config)
    if trace.snapshots:
        rows = [(t,) + tuple(y) for t, y in trace.snapshots]
        width = len(trace.snapshots[0][1])
        write_csv(f"{prefix}_snapshots.csv", ("t_s",) + tuple(f"x{i}" for i in range(width)),
                  rows, dict(config, state_form=trace.state_form))
    if plot:
        from .plotting import trace_figure

        trace_figure(trace, f"{prefix}_fig.svg", title=title)
    return trace, summary


def cmd_simulate(args):
    cfg = load_scenario(args.scenario)
    prefix = args.out or os.path.splitext(os.path.basename(args.scenario))[0]
    _, summary = simulate_to_files(cfg, prefix, plot=args.plot, title=args.scenario)
    for k, v in summary.items():
        print(f"{k:<28s} {format_value(v)}")
    return 0


def cmd_selftest(args):
    report = run_selftest(seed=args.seed, n_states=args.states)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def cmd_report(args):
    """Stability sweep and every bundled scenario, CSV plus SVG, into one directory."""
    os.makedirs(args.out_dir, exist_ok=True)
    sweep = argparse.Namespace(e0_min=-0.9, e0_max=1.0, steps=args.steps, w=1.0, tol=DEFAULT_TOL,
                               out=os.path.join(args.out_dir, "stability.csv"),
                               plot=os.path.join(args.out_dir, "stability.svg"))
    cmd_stability(sweep)
    print(f"wrote {sweep.out} and {sweep.plot}")
    for name in bundled_scenarios():
        prefix = os.path.join(args.out_dir, name)
        _, summary = simulate_to_files(load_scenario(name), prefix, plot=True, title=name)
        print(f"wrote {prefix}_trace.csv, {prefix}_summary.csv and {prefix}_fig.svg "
              f"(final error {summary['final_error']:.3e})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="quatdiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability", help="classify a grid of e0 values")
    p.add_argument("--e0-min", type=float, default=-0.9)
    p.add_argument("--e0-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--w", type=float, default=1.0, help="|w| in rad/s (classification is invariant)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plot", metavar="SVG", help="also write the two-panel figure")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("eigvals", help="closed-form spectrum at one e0")
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_eigvals)

    p = sub.add_parser("simulate", help="run a scenario file or bundled scenario")
    p.add_argument("--scenario", required=True,
                   help="TOML file, or one of: " + ", ".join(bundled_scenarios()))
    p.add_argument("--out", metavar="PREFIX", help="output prefix (default: scenario name)")
    p.add_argument("--plot", action="store_true", help="also write PREFIX_fig.svg")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", help="oracle checks on random states")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--states", type=int, default=200)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("report", help="stability sweep and all bundled scenarios with figures")
    p.add_argument("--out-dir", default="report")
    p.add_argument("--steps", type=int, default=400)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NonFiniteDerivative as exc:
        print(f"error: simulation produced a non-finite derivative at t = {exc.t!r} s", file=sys.stderr)
        return EXIT_NONFINITE
    except QuatDiffError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
