"""Command-line front end.

    wavedecay certificate --sigma0 1 --sigma1 2 --interval-length 1
    wavedecay simulate run.cfg [--expect-growth]
    wavedecay sweep --sigma0 1 --sigma1 1:4:7 --lambda1 9.8696

Exit codes: 0 success / expected outcome, 1 bound violated, 2 input error,
3 runtime error (CFL, damping bounds, non-convergence).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import Verdict
from .certificate import DampingBounds, Provenance, SpectralGap, maximize_F
from .config import load_config
from .errors import (
    CFLError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DampingBoundsError,
    InvalidParameterError,
)
from .runner import dumps_json, run, trace_csv
from .spectral import DomainSpec, Grid, lambda1_box, lambda1_discrete

EXIT_OK = 0
EXIT_BOUND_VIOLATED = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3

SWEEP_HEADER = ("sigma0", "sigma1", "lambda1", "eps_star", "alpha_star", "discriminant", "regime")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def parse_range(text: str) -> list[float]:
    """``v``, ``a,b,c`` or ``start:stop:num`` (inclusive, num points)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must be start:stop:num")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise ValueError(f"range {text!r} needs at least one point")
        return [float(v) for v in np.linspace(start, stop, num)]
    values = _floats(text)
    if not values:
        raise ValueError("empty range")
    return values


# ---------------------------------------------------------------------------
# certificate


def _certificate_gap(args) -> SpectralGap:
    if args.lambda1 is not None:
        return SpectralGap(args.lambda1, Provenance.USER_SUPPLIED)
    lengths = [args.interval_length] if args.interval_length is not None else _floats(args.box_lengths)
    if args.discrete_points is not None:
        domain = DomainSpec(tuple(lengths))
        return SpectralGap(lambda1_discrete(Grid.uniform(domain, args.discrete_points)), Provenance.DISCRETE)
    return SpectralGap(lambda1_box(lengths), Provenance.ANALYTIC)


def cmd_certificate(args) -> int:
    try:
        bounds = DampingBounds(args.sigma0, args.sigma1)
        gap = _certificate_gap(args)
        cert = maximize_F(bounds, gap)
    except (InvalidParameterError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ConvergenceError as exc:
        return _fail(EXIT_RUNTIME, str(exc))
    _emit(dumps_json(cert.to_dict()), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.trace is not None:
            cfg.trace_path = args.trace
        if args.report is not None:
            cfg.report_path = args.report
        result = run(cfg)
    except (ConfigError, InvalidParameterError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (CFLError, DampingBoundsError, ConvergenceError, ConsistencyError) as exc:
        return _fail(EXIT_RUNTIME, str(exc))

    if cfg.trace_path is not None:
        cfg.trace_path.write_text(trace_csv(result.trace))
    report_text = dumps_json(result.summary)
    _emit(report_text, cfg.report_path)

    verdict = result.report.verdict
    if verdict is Verdict.DECAY_CERTIFIED:
        return EXIT_OK
    if verdict is Verdict.GROWTH_DETECTED and args.expect_growth:
        return EXIT_OK
    print(f"verdict: {verdict.value}", file=sys.stderr)
    return EXIT_BOUND_VIOLATED


# ---------------------------------------------------------------------------
# sweep


def sweep_row(params: tuple[float, float, float]) -> tuple:
    s0, s1, lam = params
    cert = maximize_F(DampingBounds(s0, s1), SpectralGap(lam))
    return (s0, s1, lam, cert.eps_star, cert.alpha_star, cert.discriminant, cert.regime.value)


def sweep_table(sigma0s, sigma1s, lambda1s, jobs: int = 1) -> tuple[list[tuple], int]:
    """Certificate rows for every admissible tuple, in lexicographic order.

    Returns (rows, skipped) where skipped counts tuples with sigma1 < sigma0.
    """
    tuples = sorted(set(itertools.product(sigma0s, sigma1s, lambda1s)))
    for s0, s1, lam in tuples:
        if s0 <= 0 or s1 <= 0 or lam <= 0:
            raise InvalidParameterError(f"sweep values must be positive, got {(s0, s1, lam)}")
    valid = [t for t in tuples if t[1] >= t[0]]
    if jobs > 1 and len(valid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, valid, chunksize=max(1, len(valid) // (4 * jobs))))
    else:
        rows = [sweep_row(t) for t in valid]
    rows.sort(key=lambda r: r[:3])
    return rows, len(tuples) - len(valid)


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    try:
        ranges = [parse_range(r) for r in (args.sigma0, args.sigma1, args.lambda1)]
        rows, skipped = sweep_table(*ranges, jobs=args.jobs)
    except (InvalidParameterError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    if not rows:
        return _fail(EXIT_INPUT, "no admissible (sigma0 <= sigma1) tuples in the sweep")
    if skipped:
        print(f"note: skipped {skipped} tuple(s) with sigma1 < sigma0", file=sys.stderr)
    _emit(sweep_csv(rows), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavedecay", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certificate", help="compute the decay certificate (JSON)")
    p.add_argument("--sigma0", type=float, required=True)
    p.add_argument("--sigma1", type=float, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambda1", type=float, help="first Dirichlet eigenvalue")
    src.add_argument("--interval-length", type=float, help="interval (0, L); lambda1 = pi^2/L^2")
    src.add_argument("--box-lengths", help="rectangle side lengths, comma separated")
    p.add_argument("--discrete-points", type=int,
                   help="use the finite-difference lambda1 with this many interior points per axis")
    p.add_argument("-o", "--output", type=Path, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("simulate", help="simulate a configured run and check the bound")
    p.add_argument("config", type=Path)
    p.add_argument("--expect-growth", action="store_true",
                   help="treat growth_detected as success (growth example)")
    p.add_argument("--trace", type=Path, help="override output.trace")
    p.add_argument("--report", type=Path, help="override output.report")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate certificates over parameter ranges (CSV)")
    p.add_argument("--sigma0", required=True, help="value, list a,b,c or start:stop:num")
    p.add_argument("--sigma1", required=True)
    p.add_argument("--lambda1", required=True)
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
