"""Command-line interface: ``charnorm test | simulate | mc-table``.

Exit codes of ``test``: 0 ran and did not reject, 3 ran and rejected,
1 usage or input error, 2 numeric failure of the procedure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import htest, mc
from .dgp import InnovationSpec, ar1, arch1, simulate
from .errors import CharnError, UntabulatedAlpha
from .smooth import Kernel, WeightFn

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_REJECT = 0, 1, 2, 3
MIN_OBSERVATIONS = 21
FAMILIES = {"normal": "standard_normal", "skew-normal": "skew_normal", "t": "standardized_t"}

VARIANTS = {
    "ar-arch": "ar_arch",
    "ar": "ar",
    "arch": "arch",
    "linear-ar1": "linear_ar1",
    "multiplicative": "multiplicative",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for numeric failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_series_text(text: str, source: str = "<input>") -> np.ndarray:
    """Parse observations: one per line, single-column CSV with optional header,
    or whitespace/comma separated. ``#`` lines are comments."""
    values = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t for t in line.replace(",", " ").split() if t]
        parsed = []
        for tok in tokens:
            try:
                parsed.append(float(tok))
            except ValueError:
                parsed = None
                break
        if parsed is None:
            if not seen_data and len(tokens) == 1:
                seen_data = True  # header line
                continue
            raise UsageError(f"{source}:{lineno}: non-numeric token in {line!r}")
        for v in parsed:
            if not math.isfinite(v):
                raise UsageError(f"{source}:{lineno}: non-finite value {v!r}")
        values.extend(parsed)
        seen_data = True
    if not values:
        raise UsageError(f"{source}: no observations found")
    return np.asarray(values, dtype=float)


def _read_input(path: str) -> np.ndarray:
    if path == "-":
        return parse_series_text(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_series_text(text, path)


def _innovation(family: str, zeta: float) -> InnovationSpec:
    if family == "skew-normal":
        return InnovationSpec.skew_normal(zeta)
    if family == "t":
        return InnovationSpec.standardized_t(zeta)
    return InnovationSpec.standard_normal()


def _model(args):
    innov = _innovation(args.family, args.zeta)
    if args.model == "ar1":
        return ar1(args.theta, innov, args.x0)
    return arch1(args.arch_a, args.arch_b, innov, args.x0)


def _kernel(args) -> Kernel:
    if args.kernel == "gaussian":
        return Kernel()
    return Kernel("compact", args.kernel_c, args.kernel)


def _weight(args) -> Optional[WeightFn]:
    if args.weight == "default":
        return None
    if args.weight == "none":
        return WeightFn("indicator", -math.inf, math.inf)
    if args.weight_a is None or args.weight_b is None:
        raise UsageError("--weight indicator/smooth needs --weight-a and --weight-b")
    if args.weight == "indicator":
        return WeightFn("indicator", args.weight_a, args.weight_b)
    return WeightFn("smooth", args.weight_a, args.weight_b, args.weight_kappa)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(text: str, path: Optional[str]) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")
    finally:
        if close:
            fh.close()


def format_report(report: htest.TestReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2)
    d = report.diagnostics
    if fmt == "csv":
        buf = io.StringIO()
        cols = ["variant", "statistic", "alpha", "critical", "reject", "n", "bandwidth"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerow([report.variant, repr(report.statistic), report.alpha, repr(report.critical),
                    int(report.reject), d.get("n"), repr(d.get("bandwidth"))])
        return buf.getvalue()
    head = [
        ("variant", report.variant),
        ("statistic", f"{report.statistic:.6g}"),
        ("alpha", f"{report.alpha:g}"),
        ("critical", f"{report.critical:.6g}"),
        ("decision", "reject H0" if report.reject else "do not reject H0"),
    ]
    head += [(k, f"{v:.6g}" if isinstance(v, float) else v) for k, v in d.items()]
    lines = [f"{k + ':':<23}{v}" for k, v in head]
    return "\n".join(lines) + "\n"


def cmd_test(args) -> int:
    if args.input is not None:
        x = _read_input(args.input)
    else:
        x = simulate(_model(args), args.n, np.random.default_rng(args.seed)).values
    if x.size < MIN_OBSERVATIONS:
        raise UsageError(f"need at least {MIN_OBSERVATIONS} observations, got {x.size}")
    cfg = htest.TestConfig(
        alpha=args.alpha,
        bandwidth=args.bandwidth,
        kernel=_kernel(args),
        weight=_weight(args),
        interpolate=args.interpolate,
        theta_method=args.theta_method.replace("-", "_"),
        power=args.power,
    )
    try:
        report = htest.TESTS[VARIANTS[args.variant]](x, cfg)
    except UntabulatedAlpha as exc:
        raise UsageError(f"{exc} (use --interpolate for an approximate value)") from None
    _emit(format_report(report, args.format), args.output)
    return EXIT_REJECT if report.reject else EXIT_OK


def cmd_simulate(args) -> int:
    spec = _model(args)
    s = simulate(spec, args.n, np.random.default_rng(args.seed))
    header = (
        f"# charnorm simulate model={args.model} family={args.family} zeta={args.zeta:g} "
        f"n={args.n} seed={args.seed}"
    )
    body = "\n".join(repr(float(v)) for v in s.values)
    _emit(header + "\n" + body + "\n", args.output)
    return EXIT_OK


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip())


def cmd_mc_table(args) -> int:
    if args.preset:
        configs = mc.preset(args.preset, reps=args.reps, seed=args.seed, alpha=args.alpha)
    else:
        if not (args.model and args.zetas and args.ns and args.tests):
            raise UsageError("custom tables need --model, --zetas, --ns and --tests (or use --preset)")
        configs = [mc.McConfig(
            args.model, FAMILIES[args.family],
            _floats(args.zetas), tuple(int(v) for v in _floats(args.ns)),
            tuple(VARIANTS.get(t, t) for t in args.tests.split(",")),
            reps=args.reps, alpha=args.alpha, seed=args.seed,
        )]
    result = mc.run_tables(configs, workers=args.workers, progress=args.progress)
    if args.format == "json":
        text = result.to_json()
    elif args.format == "text":
        text = "\n".join(
            f"{r.model:6} {r.test:8} zeta={r.zeta:<4g} n={r.n:<4d} rate={100 * r.rejection_rate:5.1f}% "
            f"se={100 * r.stderr:4.1f} errors={r.errors}"
            for r in result
        ) + "\n"
    else:
        text = result.to_csv()
    _emit(text, args.output)
    logging.getLogger(__name__).info("%d cells in %.1fs", len(result), result.elapsed)
    return EXIT_OK


def _add_model_args(p, required_n: bool):
    p.add_argument("--model", choices=["ar1", "arch1"], default="ar1")
    p.add_argument("--family", choices=["normal", "skew-normal", "t"], default="skew-normal",
                   help="innovation family; zeta is the skewness or the t degrees of freedom")
    p.add_argument("--zeta", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.5, help="AR(1) coefficient")
    p.add_argument("--arch-a", type=float, default=0.75)
    p.add_argument("--arch-b", type=float, default=0.25)
    p.add_argument("--x0", type=float, default=0.0, help="start value before burn-in")
    p.add_argument("--n", type=int, required=required_n, default=None if required_n else 200)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="charnorm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run a test on a series")
    t.add_argument("--variant", choices=sorted(VARIANTS), default="ar-arch")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="series file, '-' for stdin")
    src.add_argument("--simulate", action="store_true", help="test a freshly simulated series instead")
    _add_model_args(t, required_n=False)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--interpolate", action="store_true",
                   help="allow approximate critical values between tabulated levels")
    t.add_argument("--bandwidth", type=float, default=None)
    t.add_argument("--kernel", choices=["gaussian", "quartic", "triweight"], default="gaussian")
    t.add_argument("--kernel-c", type=float, default=1.0, help="support half-width of compact kernels")
    t.add_argument("--weight", choices=["default", "none", "indicator", "smooth"], default="default")
    t.add_argument("--weight-a", type=float)
    t.add_argument("--weight-b", type=float)
    t.add_argument("--weight-kappa", type=float, default=0.5)
    t.add_argument("--theta-method", choices=["ols", "yule-walker"], default="ols")
    t.add_argument("--power", type=float, default=1.0,
                   help="exponent of (3/4 c^2 + 1) in the multiplicative test normalization")
    t.add_argument("--format", choices=["text", "json", "csv"], default="text")
    t.add_argument("--output", "-o")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="write a simulated series, one value per line")
    _add_model_args(s, required_n=True)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("mc-table", help="Monte Carlo rejection rates")
    m.add_argument("--preset", choices=mc.PRESETS)
    m.add_argument("--model", choices=["ar1", "arch1"])
    m.add_argument("--family", choices=["normal", "skew-normal", "t"], default="skew-normal")
    m.add_argument("--zetas", help="comma-separated zeta grid")
    m.add_argument("--ns", help="comma-separated sample sizes")
    m.add_argument("--tests", help="comma-separated tests, e.g. ar-arch,ar")
    m.add_argument("--reps", type=int, default=500)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--alpha", type=float, default=0.05)
    m.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${mc.WORKERS_ENV} or 1)")
    m.add_argument("--format", choices=["csv", "json", "text"], default="csv")
    m.add_argument("--output", "-o")
    m.add_argument("--progress", action="store_true")
    m.set_defaults(func=cmd_mc_table)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or getattr(args, "progress", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"charnorm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CharnError, mc.McCellError) as exc:
        print(f"charnorm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"charnorm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
