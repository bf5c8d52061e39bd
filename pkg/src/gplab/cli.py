"""Command-line driver.

    gplab verify     randomized margin suite over admissible functions
    gplab reproduce  one of the known equality / extremizer cases
    gplab spectrum   eigenvalue table of -L_{A,lam} up to a cutoff
    gplab stability  deficits, profile fits and stability margins of one function

Exit codes: 0 success, 1 a margin or equality failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .funcs import FuncSum, is_neumann_admissible
from .functionals import deficit_report
from .measure import MonomialWeight, WeightedGaussianMeasure
from .spectral import DEFAULT_CUTOFF, rayleigh_gap, spectrum_rows
from .stability import stability_margins
from .suite import CASES, SuiteConfig, reproduce, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def parse_alpha(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")] if text is not None else []
    if not parts or parts == [""]:
        raise ConfigError("--alpha needs at least one exponent (e.g. 1,0)")
    try:
        alpha = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--alpha: cannot parse {text!r}") from exc
    if any(not math.isfinite(a) or a < 0 for a in alpha):
        raise ConfigError("--alpha exponents must be finite and >= 0")
    return alpha


def parse_func(text: str, n: int) -> FuncSum:
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    try:
        f = FuncSum.from_json(json.loads(text), n)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"--func: not a valid function: {exc}") from exc
    if f.n != n:
        raise ConfigError(f"--func has {f.n} coordinates but alpha has {n}")
    return f


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}")
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return conv


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--verbose", "-v", action="store_true",
                        help="include per-function records / lambda scans")
    common.add_argument("--quad-order", type=_positive(int), default=None,
                        help="tensor quadrature order (default 40, or GPLAB_QUAD_ORDER)")

    p = argparse.ArgumentParser(prog="gplab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"gplab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="randomized margin suite")
    v.add_argument("--alpha", required=True, help="comma-separated exponents, e.g. 1,0")
    v.add_argument("--lambda", dest="lam", type=_positive(float), default=None,
                   help="scale for the lambda-dependent inequalities (random per trial if omitted)")
    v.add_argument("--trials", type=_positive(int), default=100)
    v.add_argument("--seed", type=_nonneg_int, default=0)
    v.add_argument("--degree", type=_nonneg_int, default=6, help="polynomial degree cap")
    v.add_argument("--func", help="JSON function to use for every trial (or @file)")

    r = sub.add_parser("reproduce", parents=[common], help="reproduce an equality case")
    r.add_argument("case", choices=sorted(CASES))

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues up to a cutoff")
    s.add_argument("--alpha", required=True)
    s.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    s.add_argument("--degree", type=_nonneg_int, default=DEFAULT_CUTOFF,
                   help="cutoff on the weighted degree (eigenvalue at lambda = 1)")

    st = sub.add_parser("stability", parents=[common], help="stability report for one function")
    st.add_argument("--alpha", required=True)
    st.add_argument("--func", required=True, help="JSON function (or @file)")
    st.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0,
                    help="scale of the measure for the Poincare part of the report")
    return p


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


MARGIN_HEADER = ("theorem", "lhs", "rhs", "margin", "function_id")


def cmd_verify(args):
    weight = MonomialWeight(parse_alpha(args.alpha))
    func = parse_func(args.func, weight.n) if args.func else None
    if func is not None and not is_neumann_admissible(func, weight):
        raise ConfigError("--func must have even exponents in weighted coordinates")
    config = SuiteConfig(alpha=weight.alpha, lam=args.lam, trials=args.trials, seed=args.seed,
                         degree=args.degree, quad_order=args.quad_order, func=func)
    report, records = run_suite(config)
    if args.format == "csv":
        text = _csv([(r.theorem, r.lhs, r.rhs, r.margin, r.function_id) for r in records],
                    MARGIN_HEADER)
    else:
        if args.verbose:
            report["records"] = [{"theorem": r.theorem, "lhs": r.lhs, "rhs": r.rhs,
                                  "margin": r.margin, "function_id": r.function_id}
                                 for r in records]
        text = _dump_json(report)
    return text, EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_reproduce(args):
    out = reproduce(args.case)
    if args.format == "csv":
        text = _csv([(args.case, out["lhs"], out["rhs"], out["lhs"] - out["rhs"], 0)], MARGIN_HEADER)
    else:
        text = _dump_json(out)
    return text, EXIT_OK if out["passed"] else EXIT_FAIL


def cmd_spectrum(args):
    weight = MonomialWeight(parse_alpha(args.alpha))
    rows = spectrum_rows(weight, args.degree, args.lam)
    if args.format == "csv":
        text = _csv([(" ".join(str(k) for k in r["index"]), r["eigenvalue"]) for r in rows],
                    ("index", "eigenvalue"))
    else:
        out = {"gplab_version": __version__, "command": "spectrum", "alpha": list(weight.alpha),
               "lambda": args.lam, "cutoff": args.degree, "rows": rows}
        if args.degree >= 2:
            out["rayleigh_gap"] = rayleigh_gap(weight, args.degree, args.lam)
        text = _dump_json(out)
    return text, EXIT_OK


def cmd_stability(args):
    weight = MonomialWeight(parse_alpha(args.alpha))
    u = parse_func(args.func, weight.n)
    if u.is_zero() or any(c.beta <= 0 for c in u.components):
        raise ConfigError("--func must be non-zero with a Gaussian envelope (beta > 0) in every term")
    rep = stability_margins(u, weight, keep_scan=args.verbose)
    ok = all(m.holds() for m in rep.margins.values())
    if args.format == "csv":
        text = _csv([(k, m.lhs, m.rhs, m.margin, 0) for k, m in rep.margins.items()], MARGIN_HEADER)
    else:
        out = {"gplab_version": __version__, "command": "stability"}
        out.update(rep.to_json(with_scan=args.verbose))
        if is_neumann_admissible(u, weight):
            out["deficits"] = deficit_report(u, WeightedGaussianMeasure(weight, args.lam)).to_json()
        text = _dump_json(out)
    return text, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "reproduce": cmd_reproduce, "spectrum": cmd_spectrum,
            "stability": cmd_stability}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        text, code = COMMANDS[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"gplab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
