"""Command-line front end: ``intervalkit {hpd,lrci,invariance,coverage,compare}``.

Every command writes one result record to standard output (JSON by
default, or CSV) and diagnostics to standard error.  Exit status is 0 when
a record was produced, 2 for argument errors and 3 for numeric failures.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import __version__
from .densities import CustomDensity, Normalization, Support, make_density, family_parameters, Family
from .exceptions import BoundaryMle, DomainError, ModeAtBoundary, NumericFailure
from .hpd import density_ratio_to_mode, hpd_levelset, hpd_one_sided, hpd_quantile_scan
from .likelihood import (
    MODEL_TAGS,
    ReparameterizedModel,
    make_model,
    wilks_lrci,
)
from .numeric import Tolerances
from .studies import (
    SIMULATION_FAMILIES,
    CoverageSpec,
    compare_hpd_lrci,
    comparison_table,
    simulate_lrci_coverage,
)
from .transforms import invariance_report, parse_transform

__all__ = ["main", "build_parser", "OutputRecord", "parse_expression", "read_data"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

ONE_SIDED_WARNING = "mode at support boundary; equal-density HPD conditions not met"


@dataclass
class OutputRecord:
    command: str
    inputs_echo: dict
    result: dict
    warnings: list = field(default_factory=list)
    version: str = __version__

    def as_dict(self):
        return {
            "command": self.command,
            "inputs_echo": self.inputs_echo,
            "result": self.result,
            "warnings": list(self.warnings),
            "version": self.version,
        }


# -- restricted expression language --------------------------------------------

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCTIONS = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt}
_CONSTANTS = {"pi": math.pi, "e": math.e}


def parse_expression(text: str) -> Callable[[float], float]:
    """Compile an arithmetic expression in ``x`` into a function.

    Grammar: numbers, ``x``, the constants ``pi`` and ``e``, the binary
    operators ``+ - * / ^`` (``**`` is accepted as a synonym for ``^``),
    unary ``+``/``-``, parentheses, and the functions ``exp``, ``log`` and
    ``sqrt``.  Anything else is rejected with :class:`DomainError`.
    Evaluation errors (``log`` of a negative number, overflow, division by
    zero) yield ``-inf``, i.e. zero density.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            value = float(node.value)
            return lambda x: value
        if isinstance(node, ast.Name):
            if node.id == "x":
                return lambda x: x
            if node.id in _CONSTANTS:
                value = _CONSTANTS[node.id]
                return lambda x: value
            raise DomainError(f"unknown name {node.id!r} in expression")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            op, left, right = _BINARY[type(node.op)], build(node.left), build(node.right)
            return lambda x: op(left(x), right(x))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            op, arg = _UNARY[type(node.op)], build(node.operand)
            return lambda x: op(arg(x))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCTIONS and len(node.args) == 1 and not node.keywords):
            fn, arg = _FUNCTIONS[node.func.id], build(node.args[0])
            return lambda x: fn(arg(x))
        raise DomainError(f"unsupported construct in expression: {ast.dump(node)[:60]}")

    compiled = build(tree)

    def evaluate(x: float) -> float:
        try:
            value = compiled(float(x))
        except (ValueError, ZeroDivisionError, OverflowError):
            return -math.inf
        if isinstance(value, complex) or math.isnan(value):
            return -math.inf
        return float(value)

    return evaluate


# -- data ingestion ---------------------------------------------------------------

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def _parse_number(token: str, where: str) -> float:
    token = token.strip()
    if not _NUMBER.fullmatch(token):
        raise DomainError(f"{where}: {token!r} is not a decimal number")
    return float(token)


def read_data(text: str, source: str = "data") -> list:
    """One observation per line; ``#`` starts a comment; blank lines are skipped."""
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if body:
            values.append(_parse_number(body, f"{source} line {lineno}"))
    if not values:
        raise DomainError(f"{source} contains no observations")
    return values


def _load_data(args) -> list:
    if args.data is not None and args.values is not None:
        raise DomainError("give either --data or --values, not both")
    if args.values is not None:
        return [_parse_number(v, "--values") for v in args.values.split(",") if v.strip()]
    if args.data is None:
        raise DomainError(f"model {args.model!r} needs --data FILE or --values LIST")
    try:
        with open(args.data, encoding="utf-8") as fh:
            return read_data(fh.read(), args.data)
    except OSError as exc:
        raise DomainError(f"cannot read {args.data}: {exc.strerror}") from None


# -- argument helpers -------------------------------------------------------------

_DENSITY_PARAMS = ("mu", "sigma", "shape", "rate", "a", "b")


def _density_from_args(args, tol):
    if args.logpdf is not None:
        if args.family is not None or args.density is not None:
            raise DomainError("--logpdf cannot be combined with --family or --density")
        lo, hi = _parse_support(args.support)
        return CustomDensity(
            parse_expression(args.logpdf),
            support=Support(lo, hi),
            normalization=Normalization.UNNORMALIZED if args.unnormalized else Normalization.NORMALIZED,
            tol=tol,
            name=args.logpdf,
        )
    if args.density is not None:
        if args.family is not None:
            raise DomainError("--density cannot be combined with --family")
        spec = _parse_density_spec(args.density)
        family = spec.pop("family", None)
        if family is None:
            raise DomainError("--density needs a family=NAME entry")
        return make_density(family, tol, **spec)
    if args.family is None:
        raise DomainError("specify a density with --family, --density or --logpdf")
    names = family_parameters(Family(args.family))
    params = {}
    for name in names:
        value = getattr(args, name)
        if value is None:
            raise DomainError(f"family {args.family} needs --{name}")
        params[name] = value
    extra = [f"--{n}" for n in _DENSITY_PARAMS if n not in names and getattr(args, n) is not None]
    if extra:
        raise DomainError(f"family {args.family} does not take {', '.join(extra)}")
    return make_density(args.family, tol, **params)


def _parse_density_spec(text: str) -> dict:
    out = {}
    for item in text.split():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise DomainError(f"bad density entry {item!r}; expected key=value")
        out[key] = value if key == "family" else _parse_number(value, f"--density {key}")
    return out


def _parse_bound(token: str) -> float:
    token = token.strip().lower()
    if token in ("inf", "+inf"):
        return math.inf
    if token == "-inf":
        return -math.inf
    return _parse_number(token, "--support")


def _parse_support(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"--support must be LOWER,UPPER, got {text!r}")
    lo, hi = (_parse_bound(p) for p in parts)
    if not lo < hi:
        raise DomainError(f"--support lower bound must be below the upper bound, got {text!r}")
    return lo, hi


def _model_from_args(args):
    tag = args.model
    if tag == "binomial":
        if args.n is None or args.x is None:
            raise DomainError("model binomial needs --n and --x")
        model = make_model(tag, n=args.n, x=args.x)
    elif tag == "normal-mean":
        model = make_model(tag, data=_load_data(args), sigma=1.0 if args.sigma is None else args.sigma)
    else:
        model = make_model(tag, data=_load_data(args))
    if getattr(args, "transform", None):
        model = ReparameterizedModel(model, parse_transform(args.transform))
    return model


def _ratios(d, interval):
    try:
        return [density_ratio_to_mode(d, interval.lower), density_ratio_to_mode(d, interval.upper)]
    except ModeAtBoundary:
        return None


# -- commands ----------------------------------------------------------------------

def cmd_hpd(args, tol) -> OutputRecord:
    d = _density_from_args(args, tol)
    warnings = []
    try:
        if args.method == "scan":
            if d.mode_at_boundary:
                raise ModeAtBoundary(f"mode of {d!r} is at the support boundary")
            interval = hpd_quantile_scan(d, args.alpha, args.grid_size, tol)
        else:
            interval = hpd_levelset(d, args.alpha, tol)
    except ModeAtBoundary:
        interval = hpd_one_sided(d, args.alpha, tol)
        warnings.append(ONE_SIDED_WARNING)
    result = interval.as_dict()
    result["mode"] = d.mode
    result["density_ratio_to_mode"] = _ratios(d, interval)
    return OutputRecord("hpd", _echo(args), result, warnings)


def cmd_lrci(args, tol) -> OutputRecord:
    model = _model_from_args(args)
    try:
        interval = wilks_lrci(model, args.alpha, tol)
    except BoundaryMle as exc:
        raise BoundaryMle(f"{exc} (Wilks' theorem requires an interior MLE)") from exc
    fit = model.mle(tol)
    result = {"model": model.describe(), "mle": fit.as_dict(), **interval.as_dict()}
    return OutputRecord("lrci", _echo(args), result, list(interval.notes))


def cmd_invariance(args, tol) -> OutputRecord:
    d = _density_from_args(args, tol)
    report = invariance_report(d, parse_transform(args.transform), args.alpha, tol)
    warnings = [ONE_SIDED_WARNING] if report.pushforward_hpd.one_sided else []
    return OutputRecord("invariance", _echo(args), report.as_dict(), warnings)


def _coverage_params(args):
    fam = SIMULATION_FAMILIES[args.model]
    values = {"mu": args.mu, "sigma": args.sigma, "p": None, "rate": None}
    values[fam.interest] = args.theta
    if args.theta is None:
        raise DomainError("--theta (true value of the interest parameter) is required")
    return tuple(values[name] for name in fam.param_names)


def cmd_coverage(args, tol) -> OutputRecord:
    if args.model not in SIMULATION_FAMILIES:
        raise DomainError(f"unknown model {args.model!r}")
    spec = CoverageSpec(
        family=args.model,
        true_params=_coverage_params(args),
        n_obs=args.n,
        replications=args.reps,
        alpha=args.alpha,
        seed=args.seed,
    )
    result = simulate_lrci_coverage(spec, jobs=args.jobs, tol=tol)
    warnings = []
    if result.n_boundary_skips:
        warnings.append(f"{result.n_boundary_skips} replications skipped: MLE on the parameter boundary")
    echo = _echo(args)
    echo.pop("jobs", None)  # scheduling only; keeps records byte-identical across --jobs
    return OutputRecord("coverage", echo, result.as_record(), warnings)


def cmd_compare(args, tol) -> OutputRecord:
    model = _model_from_args(args)
    record = compare_hpd_lrci(model, args.alpha, tol)
    result = record.as_dict()
    result["table"] = [
        {"theta": t, "deviance": dev, "density": dens}
        for t, dev, dens in comparison_table(record, args.grid)
    ]
    warnings = list(record.lrci.notes)
    if record.hpd.one_sided:
        warnings.append(ONE_SIDED_WARNING)
    return OutputRecord("compare", _echo(args), result, warnings)


_COMMANDS = {
    "hpd": cmd_hpd,
    "lrci": cmd_lrci,
    "invariance": cmd_invariance,
    "coverage": cmd_coverage,
    "compare": cmd_compare,
}


def _echo(args) -> dict:
    skip = {"command", "format"}
    if getattr(args, "logpdf", None) is None:
        skip |= {"support", "unnormalized"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


# -- output ------------------------------------------------------------------------

def _flatten(value, prefix=""):
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            out.update(_flatten(v, f"{prefix}{k}."))
        return out
    if isinstance(value, (list, tuple)) and not any(isinstance(v, dict) for v in value):
        out = {}
        for i, v in enumerate(value):
            out.update(_flatten(v, f"{prefix}{i}."))
        return out
    return {prefix[:-1]: value}


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def render(record: OutputRecord, fmt: str) -> str:
    data = record.as_dict()
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    table = data["result"].pop("table", None)
    flat = _flatten(data)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(flat))
    writer.writerow([_csv_cell(v) for v in flat.values()])
    if table is not None:
        buf.write("\n")
        writer.writerow(["theta", "deviance", "density"])
        for row in table:
            writer.writerow([_csv_cell(row[k]) for k in ("theta", "deviance", "density")])
    return buf.getvalue()


# -- parser ------------------------------------------------------------------------

class _Formatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


DATA_GRAMMAR = """\
data files: one observation per line; text after '#' is a comment; blank
lines are ignored.  Each observation matches [+-]?(digits[.digits]|.digits)
with an optional exponent [eE][+-]?digits, using '.' as the decimal point
regardless of locale.  --values takes the same numbers separated by commas.
"""

EXPRESSION_GRAMMAR = """\
custom densities: --logpdf takes the log-density as an expression in x using
numbers, + - * / ^ (or **), parentheses, exp, log, sqrt and the constants pi
and e, e.g. --logpdf=-x^2/2 --support=-inf,inf --unnormalized (use the
--flag=VALUE form when the value starts with '-').
"""

TOLERANCE_ENV = """\
environment: INTERVALKIT_TOL_X overrides the absolute root tolerance (default
1e-10) and INTERVALKIT_TOL_QUAD the quadrature tolerance (default 1e-9).
exit status: 0 result written, 2 argument error, 3 numeric failure.
"""


def _common(p):
    p.add_argument("--alpha", type=float, default=0.05,
                   help="one minus the interval probability / confidence level")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")


def _density_args(p):
    g = p.add_argument_group("density")
    g.add_argument("--family", choices=[f.value for f in Family if f is not Family.CUSTOM],
                   help="built-in density family")
    g.add_argument("--mu", type=float, help="normal mean / lognormal log-scale mean")
    g.add_argument("--sigma", type=float, help="normal / lognormal standard deviation (> 0)")
    g.add_argument("--shape", type=float, help="gamma shape (> 0)")
    g.add_argument("--rate", type=float, help="gamma / exponential rate (> 0, inverse x units)")
    g.add_argument("--a", type=float, help="beta first shape (> 0)")
    g.add_argument("--b", type=float, help="beta second shape (> 0)")
    g.add_argument("--density", metavar="SPEC",
                   help='plain-text density spec, e.g. "family=lognormal mu=0 sigma=1"')
    g.add_argument("--logpdf", metavar="EXPR", help="custom log-density expression in x")
    g.add_argument("--support", default="-inf,inf", metavar="LO,HI",
                   help="support of a custom density")
    g.add_argument("--unnormalized", action="store_true",
                   help="normalize a custom density by quadrature")


def _model_args(p, transform=True):
    g = p.add_argument_group("likelihood model")
    g.add_argument("--model", required=True, choices=sorted(MODEL_TAGS), help="likelihood model")
    g.add_argument("--n", type=int, help="binomial number of trials")
    g.add_argument("--x", type=int, help="binomial number of successes")
    g.add_argument("--sigma", type=float, help="known standard deviation for normal-mean (default 1)")
    g.add_argument("--data", metavar="FILE", help="observations, one per line")
    g.add_argument("--values", metavar="LIST", help="observations inline, comma separated")
    if transform:
        g.add_argument("--transform", metavar="NAME[:P,...]",
                       help="report the interval for g(theta), e.g. log, logit, affine:2,3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intervalkit",
        description="HPD intervals, profile likelihood-ratio intervals and their "
                    "behaviour under monotone transforms.",
        epilog=TOLERANCE_ENV,
        formatter_class=_Formatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("hpd", help="HPD interval of a unimodal density",
                       epilog=EXPRESSION_GRAMMAR + TOLERANCE_ENV, formatter_class=_Formatter)
    _density_args(p)
    p.add_argument("--method", choices=("levelset", "scan"), default="levelset",
                   help="level-set inversion or quantile-width scan")
    p.add_argument("--grid-size", type=int, default=200,
                   help="number of tail-mass grid cells for --method scan")
    _common(p)

    p = sub.add_parser("lrci", help="profile likelihood-ratio confidence interval",
                       epilog=DATA_GRAMMAR + TOLERANCE_ENV, formatter_class=_Formatter)
    _model_args(p)
    _common(p)

    p = sub.add_parser("invariance", help="HPD interval under a monotone transform",
                       epilog=EXPRESSION_GRAMMAR + TOLERANCE_ENV, formatter_class=_Formatter)
    _density_args(p)
    p.add_argument("--transform", required=True, metavar="NAME[:P,...]",
                   help="identity, log, exp, logit, affine:A,B or power:K")
    _common(p)

    p = sub.add_parser("coverage", help="Monte Carlo coverage of Wilks intervals",
                       epilog=TOLERANCE_ENV, formatter_class=_Formatter)
    p.add_argument("--model", required=True, choices=sorted(SIMULATION_FAMILIES), help="likelihood model")
    p.add_argument("--theta", type=float, help="true value of the interest parameter")
    p.add_argument("--mu", type=float, default=0.0, help="true normal mean when sigma is the interest")
    p.add_argument("--sigma", type=float, default=1.0, help="true standard deviation when mu is the interest")
    p.add_argument("--n", type=int, required=True, help="observations per replication (binomial trials)")
    p.add_argument("--reps", type=int, default=1000, help="replications (>= 100)")
    p.add_argument("--seed", type=int, default=0, help="master seed, unsigned 64-bit")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; never changes the result")
    _common(p)

    p = sub.add_parser("compare", help="HPD of the normalized profile likelihood vs the LRCI",
                       epilog=DATA_GRAMMAR + TOLERANCE_ENV, formatter_class=_Formatter)
    _model_args(p, transform=False)
    p.add_argument("--grid", type=int, default=201, help="rows in the plotting table")
    _common(p)
    return parser


def main(argv: Optional[list] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = Tolerances.from_env()
        record = _COMMANDS[args.command](args, tol)
        text = render(record, args.format)
    except DomainError as exc:
        print(f"intervalkit {args.command}: error: {exc}", file=stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"intervalkit {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    for message in record.warnings:
        print(f"intervalkit {args.command}: warning: {message}", file=stderr)
    stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
