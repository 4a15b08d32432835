"""Command-line front end: ``prodlab {pi,eval,table1,radicals,converge,verify}``.

Exit codes: 0 success, 1 verification failures, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import radicals
from .errors import ProdlabError
from .numerics import PREC_ENV_VAR, PiMultiple, Precision, ctx_for, format_value, parse_real
from .products import (
    Family,
    ProductSpec,
    closed_form_partial,
    convergence_report,
    limit_value,
    partial_log_product,
    partial_product,
    required_terms,
    term_value,
)
from .verify import run_suite

EXIT_OK, EXIT_FAILURES, EXIT_USAGE = 0, 1, 2

PI_FAMILIES = {"viete": Family.COS2, "sinc": Family.SINC_Q, "tan": Family.TAN_Q}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_z(text: str):
    try:
        return parse_real(text)
    except ProdlabError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text: str):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prodlab", description="Viete, sinc and tangent infinite products at high precision.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def prec(p):
        p.add_argument("--prec-bits", type=int, default=None, help=f"target bits (default ${PREC_ENV_VAR} or 128)")

    def fmt(p):
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p = sub.add_parser("pi", help="partial product against its limit at z = pi/2")
    p.add_argument("--family", choices=sorted(PI_FAMILIES), required=True)
    p.add_argument("--q", type=int, default=2)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--terms", type=int)
    group.add_argument("--target-err", type=_positive_float)
    prec(p)

    p = sub.add_parser("eval", help="partial product, closed form and limit of one product")
    p.add_argument("--family", choices=[f.value for f in Family], required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--z", type=_parse_z, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    prec(p)

    p = sub.add_parser("table1", help="radical tangent terms at z = pi/n and their limit coefficient")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--terms", type=int, required=True)
    fmt(p)
    prec(p)

    p = sub.add_parser("radicals", help="Viete factors as nested radicals")
    p.add_argument("--viete-terms", type=int, required=True)
    fmt(p)
    prec(p)

    p = sub.add_parser("converge", help="truncation error per term count, written as CSV")
    p.add_argument("--family", choices=[f.value for f in Family], required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--z", type=_parse_z, required=True)
    p.add_argument("--max-terms", type=int, required=True)
    p.add_argument("--out", required=True)
    prec(p)

    p = sub.add_parser("verify", help="seeded identity-verification suite")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cases", type=int, default=100)
    prec(p)
    return parser


def _precision(args) -> Precision:
    if args.prec_bits is not None:
        return Precision(target_bits=args.prec_bits)
    return Precision.from_env()


class _Printer:
    def __init__(self, p: Precision, out):
        self.p = p
        self.out = out

    def num(self, x) -> str:
        return format_value(x, self.p.target_bits)

    def kv(self, key, value):
        self.out.write(f"{key}: {value}\n")


def _rel(a, b, ctx):
    a, b = ctx.mpf(a), ctx.mpf(b)
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def cmd_pi(args, p: Precision, out) -> int:
    family = PI_FAMILIES[args.family]
    q = 2 if family is Family.COS2 else args.q
    if args.family == "viete" and args.q != 2:
        raise UsageError("viete fixes q = 2")
    z = PiMultiple(Fraction(1, 2))
    base = ProductSpec(family, q, z)
    terms = args.terms if args.terms is not None else required_terms(base, args.target_err)
    if terms < 1:
        raise UsageError("--terms must be >= 1")
    ctx = ctx_for(p)
    partial = partial_product(base.with_range(0, terms), p).value.value
    limit = limit_value(base, p).value
    # limit = 2/pi for the sinc-type families, 4/pi for tan, so pi = c / partial
    pi_est = (4 if family is Family.TAN_Q else 2) / ctx.mpf(partial)
    pr = _Printer(p, out)
    pr.kv("family", f"{args.family} ({family.value}, q={q}, z=pi/2)")
    pr.kv("terms", terms)
    pr.kv("partial", pr.num(partial))
    pr.kv("limit", pr.num(limit))
    pr.kv("abs_error", pr.num(abs(ctx.mpf(partial) - limit)))
    pr.kv("pi_estimate", pr.num(pi_est))
    return EXIT_OK


def cmd_eval(args, p: Precision, out) -> int:
    if args.m >= args.n:
        raise UsageError(f"need m < n, got m={args.m}, n={args.n}")
    spec = ProductSpec(Family(args.family), args.q, args.z, args.m, args.n)
    ctx = ctx_for(p)
    pr = _Printer(p, out)
    pr.kv("family", spec.family.value)
    pr.kv("q", spec.q)
    pr.kv("z", args.z)
    pr.kv("range", f"[{spec.m}, {spec.n})")
    partial = partial_product(spec, p).value.value
    closed = closed_form_partial(spec, p).value
    if spec.family is Family.TAN_EXP:
        pr.kv("log_partial", pr.num(partial_log_product(spec, p).value.value))
        pr.kv("log_closed_form", pr.num(closed))
        closed = ctx.exp(closed)
    limit = limit_value(spec, p).value
    pr.kv("partial", pr.num(partial))
    pr.kv("closed_form", pr.num(closed))
    pr.kv("limit", pr.num(limit))
    pr.kv("rel_diff_partial_closed", pr.num(_rel(partial, closed, ctx)))
    pr.kv("rel_diff_partial_limit", pr.num(_rel(partial, limit, ctx)))
    pr.kv("rel_diff_closed_limit", pr.num(_rel(closed, limit, ctx)))
    return EXIT_OK


def _emit_table(fmt: str, columns, rows, out, meta=None):
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row[c] for c in columns])
    elif fmt == "json":
        doc = dict(meta or {})
        doc["rows"] = [{c: row[c] for c in columns} for row in rows]
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for key, value in (meta or {}).items():
            out.write(f"{key}: {value}\n")
        for row in rows:
            out.write("  ".join(f"{c}={row[c]}" for c in columns) + "\n")


def cmd_table1(args, p: Precision, out) -> int:
    if args.terms < 1:
        raise UsageError("--terms must be >= 1")
    terms, coeff = radicals.table1_expressions(args.n, args.terms)
    ctx = ctx_for(p)
    pr = _Printer(p, out)
    spec = ProductSpec(Family.TAN_Q, 2, PiMultiple(Fraction(1, args.n)))
    rows = []
    for k, e in enumerate(terms):
        r = radicals.eval_expr(e, p)
        t = term_value(spec, k, p).value
        rows.append({
            "k": str(k),
            "expression": radicals.render_expr(e),
            "value": pr.num(r.value.value),
            "bound": pr.num(r.abs_error_bound),
            "tan_q_term": pr.num(t),
            "difference": pr.num(ctx.mpf(r.value.value) - t),
        })
    rc = radicals.eval_expr(coeff, p)
    closed = 2 * args.n * ctx.tan(ctx.pi / (2 * args.n))
    rows.append({
        "k": "result",
        "expression": radicals.render_expr(coeff),
        "value": pr.num(rc.value.value),
        "bound": pr.num(rc.abs_error_bound),
        "tan_q_term": pr.num(closed),
        "difference": pr.num(ctx.mpf(rc.value.value) - closed),
    })
    columns = ["k", "expression", "value", "bound", "tan_q_term", "difference"]
    reference = radicals.TABLE1_REFERENCE[args.n]
    verdict = radicals.expr_equal(coeff, radicals.parse_expr(reference), max_bits=p.working_bits)
    meta = {
        "n": str(args.n),
        "z": f"pi/{args.n}",
        "limit": f"result/pi = {pr.num(closed / ctx.pi)}",
        "reference_coefficient": f"{reference} ({verdict.value})",
    }
    _emit_table(args.format, columns, rows, out, meta)
    return EXIT_OK


def cmd_radicals(args, p: Precision, out) -> int:
    if args.viete_terms < 1:
        raise UsageError("--viete-terms must be >= 1")
    factors, _ = radicals.viete_expression(args.viete_terms)
    ctx = ctx_for(p)
    pr = _Printer(p, out)
    two_over_pi = 2 / ctx.pi
    rows = []
    running = None
    for k, f in enumerate(factors):
        running = f if running is None else radicals.Product((running, f))
        fv = radicals.eval_expr(f, p)
        rv = radicals.eval_expr(running, p)
        rows.append({
            "k": str(k),
            "factor": radicals.render_expr(f),
            "factor_value": pr.num(fv.value.value),
            "product": pr.num(rv.value.value),
            "bound": pr.num(rv.abs_error_bound),
            "distance_to_2_over_pi": pr.num(abs(ctx.mpf(rv.value.value) - two_over_pi)),
        })
    columns = ["k", "factor", "factor_value", "product", "bound", "distance_to_2_over_pi"]
    _emit_table(args.format, columns, rows, out, {"limit": pr.num(two_over_pi)})
    return EXIT_OK


def converge_csv(report, p: Precision) -> str:
    ctx = ctx_for(p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["terms", "abs_error", "log2_abs_error"])
    for terms, err in report.rows:
        log2 = ctx.log(err, 2) if err > 0 else None
        w.writerow([terms, format_value(err, p.target_bits), "-inf" if log2 is None else format_value(log2, p.target_bits)])
    return buf.getvalue()


def cmd_converge(args, p: Precision, out) -> int:
    spec = ProductSpec(Family(args.family), args.q, args.z)
    report = convergence_report(spec, args.max_terms, p)
    with open(args.out, "w", newline="") as fh:
        fh.write(converge_csv(report, p))
    out.write(f"rows: {len(report.rows)}\n")
    out.write(f"fitted_order: {report.fitted_order:.6f}\n")
    return EXIT_OK


def cmd_verify(args, p: Precision, out, err=sys.stderr) -> int:
    report = run_suite(args.seed, args.cases, p)
    out.write(report.to_text())
    print(f"wall_time: {report.wall_time:.2f}s", file=err)
    return EXIT_OK if report.passed else EXIT_FAILURES


COMMANDS = {
    "pi": cmd_pi,
    "eval": cmd_eval,
    "table1": cmd_table1,
    "radicals": cmd_radicals,
    "converge": cmd_converge,
    "verify": cmd_verify,
}


def run(argv, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        p = _precision(args)
        if args.command == "verify":
            return cmd_verify(args, p, out, err)
        return COMMANDS[args.command](args, p, out)
    except UsageError as exc:
        print(f"prodlab: error: {exc}", file=err)
        return EXIT_USAGE
    except (ProdlabError, ValueError) as exc:
        print(f"prodlab: error: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
