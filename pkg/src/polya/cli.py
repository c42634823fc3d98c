"""Command-line front end: ``polya {pd,fc,laplace-check,mc,watson}``.

Data goes to stdout as CSV (with header) or JSON lines, numbers printed
with 17 significant digits so doubles round-trip exactly. Diagnostics go
to stderr. Exit codes: 0 ok, 1 usage, 2 constraint, 3 tolerance breach,
4 resource.
"""

import argparse
import itertools
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass

from .errors import ConstraintError, ConvergenceWarning, DivergenceError, ResourceError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONSTRAINT = 2
EXIT_TOLERANCE = 3
EXIT_RESOURCE = 4

D_MIN, D_MAX = 3, 64
RECORD_FIELDS = ("d", "method", "value", "error_estimate", "elapsed_ms")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for constraint errors here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class OutputRecord:
    d: int
    method: str
    value: float
    error_estimate: float
    elapsed_ms: float

    @classmethod
    def from_json(cls, line):
        obj = json.loads(line)
        return cls(*(obj[k] for k in RECORD_FIELDS))

    @classmethod
    def from_csv(cls, row):
        parts = row.split(",")
        return cls(int(parts[0]), parts[1], float(parts[2]), float(parts[3]), float(parts[4]))


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    return fmt(v)


def emit(rows, fields, form, out):
    """Write dict rows as CSV (header first) or JSON lines."""
    if form == "csv":
        out.write(",".join(fields) + "\n")
        for row in rows:
            out.write(",".join(fmt(row[f]) for f in fields) + "\n")
    else:
        for row in rows:
            out.write("{" + ", ".join(f'"{f}": {_json_value(row[f])}' for f in fields) + "}\n")


def parse_d_range(text):
    """'3' -> [3]; '3..10' -> [3, ..., 10] (inclusive)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad dimension range {text!r}; use N or LO..HI") from None
    if lo > hi:
        raise UsageError(f"empty dimension range {text!r}")
    if lo < D_MIN:
        raise UsageError(
            f"d={lo}: the walk is recurrent for d=1,2 (p=1) and u(d) is not "
            f"convergent there; choose d >= {D_MIN}"
        )
    if hi > D_MAX:
        raise UsageError(f"d={hi} is above the supported maximum {D_MAX}")
    return list(range(lo, hi + 1))


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def _timed(fn):
    t0 = time.perf_counter()
    res = fn()
    return res, (time.perf_counter() - t0) * 1e3


def cmd_pd(args, out):
    from .quad import u_quadrature
    from .series import SeriesConfig, u_series
    from .specfun import gamma_product_u3

    dims = parse_d_range(args.d)
    methods = []
    for m in args.method:
        methods.extend(v.strip() for v in m.split(","))
    unknown = set(methods) - {"series", "quad", "gamma", "all"}
    if unknown:
        raise UsageError(f"unknown method(s): {', '.join(sorted(unknown))}")
    compare = "all" in methods
    if compare:
        methods = ["series", "quad", "gamma"]
    if "gamma" in methods and not compare and any(d != 3 for d in dims):
        raise UsageError("the gamma-product route exists only for d = 3")

    cfg = SeriesConfig(tolerance=args.tolerance)
    rows = []
    breach = False
    for d in dims:
        block = []
        for m in methods:
            if m == "gamma":
                if d != 3:
                    continue
                u, ms = _timed(gamma_product_u3)
                err_u = 4 * sys.float_info.epsilon * u
            elif m == "series":
                res, ms = _timed(lambda: u_series(d, cfg))
                u, err_u = res.value, res.error_estimate
            else:
                res, ms = _timed(lambda: u_quadrature(d))
                u, err_u = res.value, res.error_estimate
            block.append(
                {
                    "d": d,
                    "method": m,
                    "value": 1.0 - 1.0 / u,
                    "error_estimate": err_u / (u * u),
                    "elapsed_ms": ms if args.timing else 0.0,
                }
            )
        if compare:
            worst = 0.0
            for r1, r2 in itertools.combinations(block, 2):
                worst = max(worst, abs(r1["value"] - r2["value"]) / abs(r2["value"]))
            for r in block:
                r["max_rel_diff"] = worst
            if worst > 10 * args.tolerance:
                breach = True
                print(
                    f"d={d}: routes disagree by {worst:.3g} relative "
                    f"(> 10 x tolerance {args.tolerance:g})",
                    file=sys.stderr,
                )
        rows.extend(block)
    fields = RECORD_FIELDS + (("max_rel_diff",) if compare else ())
    emit(rows, fields, args.format, out)
    return EXIT_TOLERANCE if breach else EXIT_OK


def cmd_fc(args, out):
    from .series import LauricellaParams, SeriesConfig, lauricella_fc

    c = _float_list(args.c)
    x = _float_list(args.x)
    if len(c) != len(x):
        raise UsageError(f"--c has {len(c)} entries but --x has {len(x)}")
    params = LauricellaParams(args.a, args.b, tuple(c), tuple(x))
    cfg = SeriesConfig(tolerance=args.tolerance, n_max=args.nmax)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        value, info = lauricella_fc(params, cfg, method=args.method, full_output=True)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    row = {
        "value": float(value),
        "error_estimate": float(info["error_estimate"]),
        "last_shell": float(info["last_shell"]),
        "terms_used": int(info["terms_used"]),
    }
    emit([row], ("value", "error_estimate", "last_shell", "terms_used"), args.format, out)
    return EXIT_OK


def cmd_laplace_check(args, out):
    from .laplace import verify_lemma1

    if args.count < 1:
        raise UsageError("--count must be a positive integer")
    report = verify_lemma1(args.count, args.seed)
    row = {
        "count": report.count,
        "seed": report.seed,
        "max_rel_diff": report.max_rel_diff,
        "mean_rel_diff": report.mean_rel_diff,
        "tolerance": args.tolerance,
    }
    emit([row], tuple(row), args.format, out)
    return EXIT_TOLERANCE if report.max_rel_diff > args.tolerance else EXIT_OK


def cmd_mc(args, out):
    from .series import return_probability
    from .walk import WalkConfig, estimate_return

    try:
        cfg = WalkConfig(
            args.d, args.walks, args.horizon, args.seed, args.workers, args.step_budget
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    est = estimate_return(cfg)
    ref = return_probability(args.d).p if args.d >= 3 else 1.0
    row = {
        "d": args.d,
        "walks": est.walks,
        "horizon": est.horizon,
        "p_hat": est.p_hat,
        "std_err": est.std_err,
        "ci95_lo": est.ci95[0],
        "ci95_hi": est.ci95[1],
        "returned": est.returned,
        "truncated": est.truncated,
        "reference": ref,
    }
    emit([row], tuple(row), args.format, out)
    # d = 1, 2 are recurrent; the finite-horizon deficit there is expected
    if args.d >= 3 and abs(est.p_hat - ref) > max(args.tolerance, 4 * est.std_err):
        print(
            f"p_hat={est.p_hat:.6f} misses p({args.d})={ref:.10f} by more than "
            f"max({args.tolerance:g}, 4 std err)",
            file=sys.stderr,
        )
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_watson(args, out):
    from .quad import LatticeIntegralConfig, lattice_green_integral
    from .series import u_series

    parse_d_range(str(args.d))
    if args.samples < 1:
        raise UsageError("--samples must be a positive integer")
    cfg = LatticeIntegralConfig(samples=args.samples, normalize=args.normalize)
    res = lattice_green_integral(args.d, cfg, seed=args.seed)
    u = u_series(args.d).value
    norm = args.d / (2.0 * math.pi) ** args.d
    ref = u if args.normalize else u / norm
    row = {
        "d": args.d,
        "samples": res.samples,
        "normalized": res.normalized,
        "value": res.value,
        "std_error": res.std_error,
        "reference": ref,
    }
    emit([row], tuple(row), args.format, out)
    scale = 1.0 if args.normalize else norm
    if abs(res.value - ref) * scale > args.tolerance:
        print(
            f"lattice integral {res.value:.6g} misses {ref:.10g} beyond tolerance "
            f"{args.tolerance:g} (on the u(d) scale)",
            file=sys.stderr,
        )
        return EXIT_TOLERANCE
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="polya", description="Polya random walk constants")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def fmt_opt(p):
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    p = sub.add_parser("pd", help="return probabilities p(d) by one or more routes")
    p.add_argument("--d", required=True, help="dimension N or inclusive range LO..HI")
    p.add_argument(
        "--method", action="append", default=None,
        help="series, quad, gamma or all (repeatable or comma separated)",
    )
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="report elapsed_ms as 0 for byte-identical output")
    fmt_opt(p)
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("fc", help="evaluate the Lauricella F_C series")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", required=True, help="comma-separated c_1..c_d")
    p.add_argument("--x", required=True, help="comma-separated x_1..x_d")
    p.add_argument("--nmax", type=int, default=4096)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--method", choices=("auto", "shell", "naive"), default="auto")
    fmt_opt(p)
    p.set_defaults(func=cmd_fc)

    p = sub.add_parser("laplace-check", help="random-spec check of the Laplace/F_C identity")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=1e-6)
    fmt_opt(p)
    p.set_defaults(func=cmd_laplace_check)

    p = sub.add_parser("mc", help="Monte Carlo return probability")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--walks", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--step-budget", type=int, default=10**13)
    p.add_argument("--tolerance", type=float, default=3e-3)
    fmt_opt(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("watson", help="quasi-Monte Carlo torus integral")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true",
                   help="multiply by d/(2 pi)^d so the value estimates u(d)")
    p.add_argument("--tolerance", type=float, default=5e-3)
    fmt_opt(p)
    p.set_defaults(func=cmd_watson)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        if getattr(args, "method", "") is None:
            args.method = ["series"]
        return args.func(args, out)
    except (UsageError, DivergenceError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstraintError as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
