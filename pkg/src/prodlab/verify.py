"""Seeded identity checks over the product families and radical towers.

Each ``check_*`` returns a :class:`CaseReport`; :func:`run_suite` draws
parameters from a fixed 64-bit LCG so a (seed, cases, precision) triple always
produces the same report.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from . import numerics, radicals
from .errors import DegenerateFitError, NonConvergenceError, PoleError
from .numerics import DEFAULT_PRECISION, Number, PiMultiple, Precision, ctx_for, format_value, resolve
from .products import (
    ConvergenceReport,
    Family,
    ProductSpec,
    closed_form_partial,
    convergence_report,
    fit_slope,
    limit_value,
    partial_log_product,
    partial_product,
    term_value,
)

Z_LOW = Fraction(1, 10)
Z_HIGH = Fraction(3)
POLE_MARGIN = Fraction(1, 1000)


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    inputs: dict
    lhs: Any
    rhs: Any
    rel_error: Any
    tolerance: Any
    passed: bool
    skipped: bool = False

    def line(self) -> str:
        params = " ".join(f"{k}={_fmt_input(v)}" for k, v in self.inputs.items())
        return (
            f"{self.case_id} {params} rel_error={format_value(self.rel_error, 53)} "
            f"tolerance={format_value(self.tolerance, 53)}"
        )


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    total: int
    failures: tuple
    wall_time: float = field(compare=False)
    skipped: int = 0
    precision: Optional[Precision] = None
    family_counts: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        """Deterministic text form (wall time is deliberately left out)."""
        lines = [
            f"seed: {self.seed}",
            f"precision: target={self.precision.target_bits} guard={self.precision.guard_bits}",
            f"total: {self.total}",
        ]
        lines += [f"  {name}: {count}" for name, count in self.family_counts]
        lines += [f"skipped: {self.skipped}", f"failures: {len(self.failures)}"]
        lines += [f"FAIL {c.line()}" for c in self.failures]
        return "\n".join(lines) + "\n"


def _fmt_input(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator < 10 ** 6 else format_value(resolve(v, numerics.context(96)), 80)
    if isinstance(v, Family):
        return v.value
    return str(v)


def _case(case_id, inputs, lhs, rhs, rel_error, tolerance, skipped=False) -> CaseReport:
    return CaseReport(case_id, inputs, lhs, rhs, rel_error, tolerance, bool(rel_error <= tolerance), skipped)


def _skipped(case_id, inputs, exc) -> CaseReport:
    zero = numerics.context(53).zero
    return CaseReport(case_id, dict(inputs, skipped=str(exc)), None, None, zero, zero, True, True)


def _pole_of(exc):
    """The PoleError behind ``exc`` (directly or as the cause of a non-convergence), else None."""
    while exc is not None:
        if isinstance(exc, PoleError):
            return exc
        exc = exc.__cause__
    return None


def _rel(a, b, ctx):
    a, b = ctx.mpf(a), ctx.mpf(b)
    diff = abs(a - b)
    if diff == 0:
        return ctx.zero
    return diff / max(abs(b), ctx.ldexp(1, -ctx.prec))


def _tolerance(p: Precision, slack_bits: int):
    return numerics.context(64).ldexp(1, slack_bits - p.target_bits)


def check_partial_identity(
    q: int,
    z: Number,
    m: int,
    n: int,
    p: Precision = DEFAULT_PRECISION,
    closed_form: Callable = closed_form_partial,
    case_id: str = "partial",
) -> CaseReport:
    """Telescoped finite product vs its closed form, for TAN_Q and (n <= 6) in log space for TAN_EXP."""
    inputs = {"family": Family.TAN_Q, "q": q, "z": z, "m": m, "n": n}
    ctx = ctx_for(p)
    tol = _tolerance(p, 16)
    try:
        spec = ProductSpec(Family.TAN_Q, q, z, m, n)
        lhs = partial_product(spec, p).value.value
        rhs = closed_form(spec, p).value
        rel = _rel(lhs, rhs, ctx)
        zr = resolve(z, ctx)
        if m < n <= 6 and 0 < zr < ctx.pi:
            espec = ProductSpec(Family.TAN_EXP, q, z, m, n)
            llog = partial_log_product(espec, p).value.value
            rlog = closed_form(espec, p).value
            rel = max(rel, _rel(llog, rlog, ctx))
    except (PoleError, NonConvergenceError) as exc:
        if _pole_of(exc) is None:
            raise
        return _skipped(case_id, inputs, _pole_of(exc))
    return _case(case_id, inputs, lhs, rhs, rel, tol)


def dirichlet_kernel_error(q: int, theta: Number, p: Precision = DEFAULT_PRECISION):
    """|sum_{i=1..q} cos((2i-1) theta) - sin(2q theta)/(2 sin theta)| / q, summed by brute force."""
    ctx = ctx_for(p)
    t = resolve(theta, ctx)
    brute = ctx.fsum(ctx.cos((2 * i - 1) * t) for i in range(1, q + 1))
    if t == 0:
        closed = ctx.mpf(q)
    else:
        closed = ctx.sin(2 * q * t) / (2 * ctx.sin(t))
    return abs(brute - closed) / q


def check_family_equivalence(
    q: int,
    z: Number,
    terms: int,
    p: Precision = DEFAULT_PRECISION,
    seed: int = 0,
    case_id: str = "family",
    kernel_points: int = 20,
) -> CaseReport:
    """Cosine-sum truncation at q vs sinc-type truncation at 2q, plus the kernel identity at random angles."""
    inputs = {"q": q, "z": z, "terms": terms}
    ctx = ctx_for(p)
    tol = _tolerance(p, 16)
    try:
        lhs = partial_product(ProductSpec(Family.COS_SUM, q, z, 0, terms), p).value.value
        rhs = partial_product(ProductSpec(Family.SINC_Q, 2 * q, z, 0, terms), p).value.value
    except (PoleError, NonConvergenceError) as exc:
        if _pole_of(exc) is None:
            raise
        return _skipped(case_id, inputs, _pole_of(exc))
    rel = _rel(lhs, rhs, ctx)
    rng = Lcg64(seed ^ (q * 0x51ED27))
    for _ in range(kernel_points):
        theta = rng.uniform(Fraction(1, 1000), Fraction(3))
        rel = max(rel, dirichlet_kernel_error(q, theta, p))
    return _case(case_id, inputs, lhs, rhs, rel, tol)


def check_limit_convergence(
    spec: ProductSpec, n_max: int, p: Precision = DEFAULT_PRECISION, case_id: str = "limit"
) -> CaseReport:
    """|partial(0..n) - limit| <= 2 z**2 b**(-2n) for n = 5..n_max.

    TAN_EXP is compared in log space against 2 z**2 b**-n, its slower rate.
    ``rel_error`` is the worst ratio of observed error to bound; tolerance 1.
    """
    inputs = {"family": spec.family, "q": spec.q, "z": spec.z, "n_max": n_max}
    if n_max < 8:
        raise ValueError("n_max must be >= 8")
    ctx = ctx_for(p)
    one = ctx.one
    if spec.is_zero():
        return _case(case_id, inputs, one, one, ctx.zero, one)
    z = resolve(spec.z, ctx)
    b = ctx.mpf(spec.base)
    log_space = spec.family is Family.TAN_EXP
    try:
        limit = limit_value(spec.with_range(0, None), p).value
        target = ctx.ln(limit) if log_space else limit
        worst = ctx.zero
        part = None
        for n in range(5, n_max + 1):
            s = spec.with_range(0, n)
            if log_space:
                part = partial_log_product(s, p).value.value
                bound = 2 * z ** 2 * b ** (-n)
            else:
                part = partial_product(s, p).value.value
                bound = 2 * z ** 2 * b ** (-2 * n)
            worst = max(worst, abs(part - target) / bound)
    except (PoleError, NonConvergenceError) as exc:
        if _pole_of(exc) is None:
            raise
        return _skipped(case_id, inputs, _pole_of(exc))
    return _case(case_id, inputs, part, target, worst, one)


def fit_order(report: ConvergenceReport, q: int, case_id: str = "fit") -> CaseReport:
    """Pass when the refitted slope is within 5% of -2 ln q."""
    usable = [(t, e) for t, e in report.rows if t >= 5 and e > 0]
    if len(usable) < 10:
        raise DegenerateFitError(f"need >= 10 usable rows, have {len(usable)}")
    slope = fit_slope(report.rows, 5)
    expected = -2 * math.log(q)
    rel = abs(slope - expected) / abs(expected)
    return CaseReport(case_id, {"q": q, "rows": len(report.rows)}, slope, expected, rel, 0.05, rel <= 0.05)


def check_radical_term(n: int, k: int, p: Precision = DEFAULT_PRECISION, case_id: str = "radical") -> CaseReport:
    """k-th radical tangent term at z = pi/n vs the numeric TAN_Q term, within combined bounds."""
    inputs = {"n": n, "k": k}
    terms, _ = radicals.table1_expressions(n, k + 1)
    r = radicals.eval_expr(terms[k], p)
    spec = ProductSpec(Family.TAN_Q, 2, PiMultiple(Fraction(1, n)), 0, None)
    t = term_value(spec, k, p)
    return _combined_case(case_id, inputs, r, t.value, p)


def check_viete_radical(n_terms: int, p: Precision = DEFAULT_PRECISION, case_id: str = "viete") -> CaseReport:
    """Nested-radical Viete product vs the numeric halving-cosine partial product at z = pi/2."""
    _, product = radicals.viete_expression(n_terms)
    r = radicals.eval_expr(product, p)
    pp = partial_product(ProductSpec(Family.COS2, 2, PiMultiple(Fraction(1, 2)), 0, n_terms), p)
    return _combined_case(case_id, {"n_terms": n_terms}, r, pp.value.value, p, pp.abs_error_bound)


def _combined_case(case_id, inputs, radical_result, numeric, p, numeric_bound=None) -> CaseReport:
    ctx = ctx_for(p.with_guard(2 * p.guard_bits))
    a = ctx.mpf(radical_result.value.value)
    b = ctx.mpf(numeric)
    # numeric side: relative error 2**(1-target) per the trig contract
    nb = numeric_bound if numeric_bound is not None else ctx.ldexp(abs(b), 1 - p.target_bits)
    combined = radical_result.abs_error_bound + nb
    scale = max(abs(b), ctx.ldexp(1, -ctx.prec))
    return _case(case_id, inputs, a, b, abs(a - b) / scale, combined / scale)


class Lcg64:
    """Knuth's MMIX 64-bit linear congruential generator."""

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = (seed * 0x9E3779B97F4A7C15 + 1) & self.MASK

    def next_u64(self) -> int:
        self.state = (self.A * self.state + self.C) & self.MASK
        return self.state

    def unit(self) -> Fraction:
        """Exact dyadic rational in [0, 1) from the top 53 bits."""
        return Fraction(self.next_u64() >> 11, 1 << 53)

    def uniform(self, lo: Fraction, hi: Fraction) -> Fraction:
        return lo + (hi - lo) * self.unit()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi]."""
        return lo + (self.next_u64() >> 32) % (hi - lo + 1)


def _near_pole(z: Fraction, q: int, m: int, n: int, family: Family) -> bool:
    """Whether any tan/cot/csc argument of terms m..n is within POLE_MARGIN of a conditioning pole.

    Poles of tan at odd multiples of pi/2 and of cot/csc at nonzero multiples
    of pi.  Arguments shrinking towards 0 are well conditioned and not counted.
    """
    ctx = numerics.context(96)
    zz = resolve(z, ctx)
    margin = resolve(POLE_MARGIN, ctx)
    base = 2 * q if family is Family.COS_SUM else (2 if family is Family.COS2 else q)
    half = family.is_tangent
    for k in range(m, n + 2):
        a = zz / ctx.mpf(base) ** k
        if half:
            a = a / 2
            j = ctx.nint((a - ctx.pi / 2) / ctx.pi)
            if abs(a - ctx.pi / 2 - j * ctx.pi) < margin:
                return True
        j = ctx.nint(a / ctx.pi)
        if j != 0 and abs(a - j * ctx.pi) < margin:
            return True
    return False


def sample_z(rng: Lcg64, q: int, m: int, n: int, family: Family = Family.TAN_Q) -> Fraction:
    while True:
        z = rng.uniform(Z_LOW, Z_HIGH)
        if not _near_pole(z, q, m, n, family):
            return z


def partial_identity_cases(seed: int, count: int):
    """Deterministic (q, z, m, n) draws: q in 2..5, 0 <= m < n <= 8, z in (0.1, 3) off poles.

    The first draw is pinned to q = 2, m = 0 (the induction base case family).
    """
    rng = Lcg64(seed)
    out = []
    for i in range(count):
        q = 2 if i == 0 else rng.randint(2, 5)
        n = rng.randint(1, 8)
        m = 0 if i == 0 else rng.randint(0, n - 1)
        out.append((q, sample_z(rng, q, m, n), m, n))
    return out


_LIMIT_ROTATION = (Family.COS2, Family.COS_SUM, Family.SINC_Q, Family.TAN_Q, Family.TAN_EXP)


def run_suite(
    seed: int,
    cases: int,
    p: Precision = DEFAULT_PRECISION,
    closed_form: Callable = closed_form_partial,
) -> SuiteReport:
    """Run ``cases`` draws of every check family; failures are data, not exceptions.

    Families per case: telescoped partial identity, cosine-sum vs sinc
    equivalence, limit convergence (rotating through all five families, with
    the classical z = pi/2 cosine product every tenth case), convergence-order
    fit, and a radical-vs-numeric cross-check (tangent table terms and the
    Viete tower, alternating).
    """
    if not isinstance(cases, int) or cases < 1:
        raise ValueError("cases must be >= 1")
    started = time.perf_counter()
    rng = Lcg64(seed)
    reports = []
    counts = {"partial": 0, "family": 0, "limit": 0, "fit": 0, "radical": 0}
    for i, (q, z, m, n) in enumerate(partial_identity_cases(rng.next_u64(), cases)):
        reports.append(check_partial_identity(q, z, m, n, p, closed_form, case_id=f"partial-{i}"))
        counts["partial"] += 1

        fq = rng.randint(2, 4)
        fz = sample_z(rng, 2 * fq, 0, 8, Family.SINC_Q)
        reports.append(
            check_family_equivalence(fq, fz, rng.randint(1, 8), p, seed=rng.next_u64(), case_id=f"family-{i}")
        )
        counts["family"] += 1

        fam = _LIMIT_ROTATION[i % len(_LIMIT_ROTATION)]
        lq = 2 if fam is Family.COS2 else rng.randint(2, 5)
        lz = PiMultiple(Fraction(1, 2)) if (fam is Family.COS2 and i % 10 == 0) else sample_z(rng, lq, 0, 20, fam)
        reports.append(
            check_limit_convergence(ProductSpec(fam, lq, lz), rng.randint(8, 16), p, case_id=f"limit-{i}")
        )
        counts["limit"] += 1

        ffam = Family.SINC_Q if i % 2 == 0 else Family.TAN_Q
        fq2 = rng.randint(2, 5)
        fz2 = sample_z(rng, fq2, 0, 20, ffam)
        report = convergence_report(ProductSpec(ffam, fq2, fz2), rng.randint(16, 20), p)
        reports.append(fit_order(report, fq2, case_id=f"fit-{i}"))
        counts["fit"] += 1

        if i % 2 == 0:
            rn = radicals.TABLE1_NS[rng.randint(0, len(radicals.TABLE1_NS) - 1)]
            reports.append(check_radical_term(rn, rng.randint(0, 6), p, case_id=f"radical-{i}"))
        else:
            reports.append(check_viete_radical(rng.randint(1, 20), p, case_id=f"radical-{i}"))
        counts["radical"] += 1

    failures = tuple(r for r in reports if not r.passed)
    return SuiteReport(
        seed=seed,
        total=len(reports),
        failures=failures,
        wall_time=time.perf_counter() - started,
        skipped=sum(1 for r in reports if r.skipped),
        precision=p,
        family_counts=tuple(counts.items()),
    )
