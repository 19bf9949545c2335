"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
``HARNESS_WORKERS`` optionally caps the number of threads used by the
parallel kernels; results do not depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .errors import HarnessError
from .reports import Table, exact_table, fig2_table, fig3_table
from .simulator import SEQUENTIAL, SUBLATTICE, SimConfig, iter_snapshots
from .verify import SUITES, format_report, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


def _pos(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harness", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("exact-table", help="closed forms and asymptotics as CSV")
    s.add_argument("--t-max", type=_nonneg, required=True)
    s.add_argument("--j-max", type=_nonneg, required=True)
    s.add_argument("--out", default="-", help="output path ('-' for stdout)")

    s = sub.add_parser("verify", help="run invariant suites")
    s.add_argument("suite", choices=sorted(SUITES) + ["all"])

    s = sub.add_parser("simulate", help="run the dynamics and log gradient and displacement variance")
    s.add_argument("--dynamics", choices=[SUBLATTICE, SEQUENTIAL], required=True)
    s.add_argument("--length", type=_pos, required=True)
    s.add_argument("--dim", type=_pos, default=1)
    s.add_argument("--rounds", type=_nonneg, required=True,
                   help="measurement length: half-sweeps (sublattice) or time units (sequential)")
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--snapshot-stride", type=_pos, default=2)
    s.add_argument("--warmup", type=_nonneg, default=0)
    s.add_argument("--initial", choices=["equilibrium", "flat"], default="equilibrium")
    s.add_argument("--out", default="-")

    for name, helptext in (("fig2", "scaled correlations at the origin versus t"),
                           ("fig3", "correlation profiles in j at fixed t with fits")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--length", type=_pos, required=True)
        s.add_argument("--t1", type=_pos, required=True, help="number of time origins")
        if name == "fig2":
            s.add_argument("--t-max", type=_pos, default=20)
        else:
            s.add_argument("--t", type=_pos, default=10)
            s.add_argument("--j-max", type=_pos, default=20)
        s.add_argument("--seed", type=_nonneg, default=0)
        s.add_argument("--replicas", type=_pos, default=1)
        s.add_argument("--out", default="-")
    return p


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def simulate_table(config: SimConfig) -> Table:
    """Per snapshot: time, mean squared nearest-neighbour gradient, mean squared displacement from the first snapshot."""
    rows = []
    first = None
    for time, h in iter_snapshots(config):
        if first is None:
            first = h
        grad = np.mean([np.mean((np.roll(h, -1, axis=a) - h) ** 2) for a in range(h.ndim)])
        disp = float(np.mean((h - first) ** 2))
        rows.append((int(time), float(grad), disp))
    unit = "half-sweeps" if config.dynamics == SUBLATTICE else "time units of L^d micro-updates"
    meta = [
        ("harness", __version__),
        ("dynamics", config.dynamics),
        ("L", config.L),
        ("d", config.d),
        ("seed", config.seed),
        ("warmup", config.warmup_rounds),
        ("rounds", config.measure_rounds),
        ("snapshot_stride", config.snapshot_stride),
        ("initial", config.initial),
        ("time_unit", unit),
    ]
    return Table(("time", "gradient_variance", "displacement_variance"), rows, meta)


def _apply_workers() -> None:
    raw = os.environ.get("HARNESS_WORKERS")
    if not raw:
        return
    import numba

    n = int(raw)
    if n < 1:
        raise ValueError(f"HARNESS_WORKERS must be >= 1, got {raw}")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_workers()
        if args.command == "exact-table":
            _emit(exact_table(args.t_max, args.j_max).to_csv(), args.out)
        elif args.command == "verify":
            checks, timings = run_suite(args.suite)
            sys.stdout.write(format_report(checks, timings))
            return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
        elif args.command == "simulate":
            cfg = SimConfig(
                L=args.length, d=args.dim, dynamics=args.dynamics, seed=args.seed,
                warmup_rounds=args.warmup, measure_rounds=args.rounds,
                snapshot_stride=args.snapshot_stride, initial=args.initial,
            )
            _emit(simulate_table(cfg).to_csv(), args.out)
        elif args.command == "fig2":
            _emit(fig2_table(args.length, args.t1, args.t_max, args.seed, args.replicas).to_csv(), args.out)
        elif args.command == "fig3":
            _emit(fig3_table(args.length, args.t1, args.t, args.j_max, args.seed, args.replicas).to_csv(), args.out)
    except (HarnessError, ValueError) as exc:
        print(f"harness {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"harness {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
