"""Terms, partial products, telescoped closed forms and limits.

Five product families are supported:

``COS2``
    cos(z / 2**(k+1)); the halving product whose limit is sin(z)/z.  At
    z = pi/2 it is the classical cosine product for 2/pi.
``COS_SUM``
    (1/q) * sum_{i=1..q} cos((2i-1) z / (2q)**(j+1)).
``SINC_Q``
    sin(z q**-k) csc(z q**-(k+1)) / q.
``TAN_Q``
    tan(z q**-k / 2) cot(z q**-(k+1) / 2) / q, with limit 2 tan(z/2) / z.
``TAN_EXP``
    the tower-exponent tangent product.  Its factors carry exponents q**(k+1)
    and are only ever handled through their logarithms.

Partial products always multiply in ascending ``k`` so results are
bit-reproducible.
"""
from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from . import numerics
from .errors import DegenerateFitError, DomainError, IndexRangeError, ProductOverflowError
from .numerics import (
    DEFAULT_PRECISION,
    EvalResult,
    Number,
    Precision,
    Real,
    ctx_for,
    resolve,
    stable_eval,
    trig_mpf,
)

# |log| beyond this is treated as exceeding exponent capacity
MAX_LOG_MAGNITUDE = 2 ** 40


class Family(enum.Enum):
    COS2 = "cos2"
    COS_SUM = "cossum"
    SINC_Q = "sinc"
    TAN_Q = "tan"
    TAN_EXP = "tanexp"

    @property
    def is_tangent(self) -> bool:
        return self in (Family.TAN_Q, Family.TAN_EXP)


def _pi_bound():
    return numerics.context(64).pi


@dataclass(frozen=True)
class ProductSpec:
    """One product instance: ``family`` with base ``q`` at ``z``, terms ``m <= k < n``.

    ``n=None`` stands for the infinite product.  ``z`` can be anything
    :func:`numerics.resolve` accepts; exact inputs (fractions, ``PiMultiple``)
    are re-rounded at each evaluation precision.
    """

    family: Family
    q: int = 2
    z: Number = 0
    m: int = 0
    n: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        if not isinstance(self.q, int) or self.q < 2:
            raise DomainError(f"q must be an integer >= 2, got {self.q!r}")
        if self.family is Family.COS2 and self.q != 2:
            raise DomainError("COS2 halves the angle; q must be 2")
        if not isinstance(self.m, int) or self.m < 0:
            raise DomainError(f"m must be a nonnegative integer, got {self.m!r}")
        if self.n is not None and (not isinstance(self.n, int) or self.n < self.m):
            raise DomainError(f"need m <= n, got m={self.m}, n={self.n}")
        z = resolve(self.z, numerics.context(96))
        pi = _pi_bound()
        if self.family is Family.TAN_EXP:
            if not 0 < z < pi:
                raise DomainError("TAN_EXP needs 0 < z < pi (log-space evaluation)")
        elif not abs(z) < pi:
            raise DomainError(f"{self.family.name} needs |z| < pi")

    @property
    def bounded(self) -> bool:
        return self.n is not None

    @property
    def base(self) -> int:
        """Ratio between consecutive term arguments."""
        if self.family is Family.COS2:
            return 2
        if self.family is Family.COS_SUM:
            return 2 * self.q
        return self.q

    def with_range(self, m: int, n: Optional[int]) -> "ProductSpec":
        return replace(self, m=m, n=n)

    def is_zero(self) -> bool:
        return resolve(self.z, numerics.context(64)) == 0


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple  # ((terms, abs_error mpf), ...) ascending in terms
    fitted_order: float


def _check_index(spec: ProductSpec, k: int):
    if not isinstance(k, int) or k < spec.m or (spec.n is not None and k >= spec.n):
        raise IndexRangeError(f"term index {k} outside [{spec.m}, {spec.n if spec.n is not None else 'inf'})")


def _tan_exp_log_term(q: int, z_exact: Number, k: int, p: Precision):
    """log of the k-th tower-exponent factor, computed at precision raised for the q**k amplification."""
    tp = p.raised(math.ceil(k * math.log2(q)) + 16)
    ctx = ctx_for(tp)
    z = resolve(z_exact, ctx)
    qk = ctx.mpf(q) ** k
    inner = trig_mpf("tan", z / (2 * qk * q), tp)
    outer = trig_mpf("tan", z / (2 * qk), tp)
    bracket = (
        -(q - 1) * ctx.ln2
        - (k * (q - 1) + q) * ctx.ln(q)
        + (q - 1) * ctx.ln(z)
        - q * ctx.ln(inner)
        + ctx.ln(outer)
    )
    return qk * bracket


def _reciprocal_trig(fn: str, x, p: Precision):
    """cot or csc inside a cancelling ratio: the pole at 0 is benign there, the others are not."""
    ctx = ctx_for(p)
    if x != 0 and abs(x) < 1:
        return ctx.cot(x) if fn == "cot" else ctx.csc(x)
    return trig_mpf(fn, x, p)


def _term_mpf(spec: ProductSpec, k: int, p: Precision):
    ctx = ctx_for(p)
    fam, q = spec.family, spec.q
    if fam is Family.TAN_EXP:
        return ctx.mpf(_tan_exp_log_term(q, spec.z, k, p))
    z = resolve(spec.z, ctx)
    if z == 0:
        return ctx.one
    if fam is Family.COS2:
        return trig_mpf("cos", ctx.ldexp(z, -(k + 1)), p)
    if fam is Family.COS_SUM:
        theta = z / ctx.mpf(2 * q) ** (k + 1)
        total = ctx.zero
        for i in range(1, q + 1):
            total += trig_mpf("cos", (2 * i - 1) * theta, p)
        return total / q
    a = z / ctx.mpf(q) ** k
    if fam is Family.SINC_Q:
        return trig_mpf("sin", a, p) * _reciprocal_trig("csc", a / q, p) / q
    return trig_mpf("tan", a / 2, p) * _reciprocal_trig("cot", a / (2 * q), p) / q


def term_value(spec: ProductSpec, k: int, p: Precision = DEFAULT_PRECISION) -> Real:
    """The k-th factor of ``spec``; for TAN_EXP, its natural log.

    At z = 0 every factor is exactly 1 by continuity.
    """
    _check_index(spec, k)
    return Real(_term_mpf(spec, k, p), p.working_bits)


def _require_bounded(spec: ProductSpec):
    if not spec.bounded:
        raise DomainError("partial products need a finite n")


def _log_sum(spec: ProductSpec, p: Precision):
    ctx = ctx_for(p)
    total = ctx.zero
    for k in range(spec.m, spec.n):
        t = _term_mpf(spec, k, p)
        total += t if spec.family is Family.TAN_EXP else ctx.ln(t)
    return total


def _raw_product(spec: ProductSpec, p: Precision):
    ctx = ctx_for(p)
    if spec.family is Family.TAN_EXP:
        s = _log_sum(spec, p)
        if abs(s) > MAX_LOG_MAGNITUDE:
            raise ProductOverflowError(f"log-space product {ctx.nstr(s, 8)} exceeds exponent capacity")
        return ctx.exp(s)
    acc = ctx.one
    for k in range(spec.m, spec.n):
        acc *= _term_mpf(spec, k, p)
    return acc


def partial_product(spec: ProductSpec, p: Precision = DEFAULT_PRECISION) -> EvalResult:
    """Product of the factors ``m <= k < n``; exactly 1 for an empty range."""
    _require_bounded(spec)
    if spec.m == spec.n:
        return EvalResult(Real(ctx_for(p).one, p.working_bits), ctx_for(p).zero)
    return stable_eval(lambda pp: _raw_product(spec, pp), p)


def partial_log_product(spec: ProductSpec, p: Precision = DEFAULT_PRECISION) -> EvalResult:
    """Natural log of :func:`partial_product`, summed term by term.

    This is the native route for TAN_EXP.  Other families take the log of
    each (positive) factor.
    """
    _require_bounded(spec)
    if spec.m == spec.n:
        return EvalResult(Real(ctx_for(p).zero, p.working_bits), ctx_for(p).zero)
    return stable_eval(lambda pp: _log_sum(spec, pp), p)


def _sinc_closed(z, base: int, m: int, n: int, p: Precision):
    ctx = ctx_for(p)
    top = trig_mpf("sin", z / ctx.mpf(base) ** m, p)
    bottom = trig_mpf("sin", z / ctx.mpf(base) ** n, p)
    return top / (ctx.mpf(base) ** (n - m) * bottom)


def _tan_q_closed(z, q: int, m: int, n: int, p: Precision):
    ctx = ctx_for(p)
    qm, qn = ctx.mpf(q) ** m, ctx.mpf(q) ** n
    return trig_mpf("tan", z / (2 * qm), p) * _reciprocal_trig("cot", z / (2 * qn), p) * qm / qn


def _tan_exp_log_closed(z_exact: Number, q: int, m: int, n: int, p: Precision):
    # the q**n-weighted terms cancel down to O(q**-m); raise precision to cover it
    tp = p.raised(math.ceil((n + m) * math.log2(q)) + 32)
    ctx = ctx_for(tp)
    z = resolve(z_exact, ctx)
    qm, qn = q ** m, q ** n
    return (
        (qm - qn) * ctx.ln2
        + (m * qm - n * qn) * ctx.ln(q)
        + (qn - qm) * ctx.ln(z)
        + qm * ctx.ln(trig_mpf("tan", z / (2 * ctx.mpf(qm)), tp))
        - qn * ctx.ln(trig_mpf("tan", z / (2 * ctx.mpf(qn)), tp))
    )


def closed_form_partial(spec: ProductSpec, p: Precision = DEFAULT_PRECISION) -> Real:
    """Telescoped value of the partial product, computed without multiplying terms.

    TAN_Q: q**(m-n) tan(z q**-m / 2) cot(z q**-n / 2).
    SINC_Q, COS2, COS_SUM (at base ``spec.base``): sin(z b**-m) / (b**(n-m) sin(z b**-n)).
    TAN_EXP: the log of the tower-exponent closed form.
    """
    _require_bounded(spec)
    ctx = ctx_for(p)
    m, n = spec.m, spec.n
    if spec.family is Family.TAN_EXP:
        if m == n:
            return Real(ctx.zero, p.working_bits)
        return Real(ctx.mpf(_tan_exp_log_closed(spec.z, spec.q, m, n, p)), p.working_bits)
    z = resolve(spec.z, ctx)
    if z == 0 or m == n:
        return Real(ctx.one, p.working_bits)
    if spec.family is Family.TAN_Q:
        return Real(_tan_q_closed(z, spec.q, m, n, p), p.working_bits)
    return Real(_sinc_closed(z, spec.base, m, n, p), p.working_bits)


def limit_value(spec: ProductSpec, p: Precision = DEFAULT_PRECISION) -> Real:
    """Value of the infinite product over ``k >= m``.

    With w = z * base**-m this is sin(w)/w for the sinc-type families and
    2 tan(w/2)/w for TAN_Q; TAN_EXP gives (2 tan(w/2)/w)**(q**m).  Any
    family at z = 0 gives 1.
    """
    ctx = ctx_for(p)
    z = resolve(spec.z, ctx)
    if z == 0:
        return Real(ctx.one, p.working_bits)
    w = z / ctx.mpf(spec.base) ** spec.m
    if spec.family.is_tangent:
        value = 2 * trig_mpf("tan", w / 2, p) / w
        if spec.family is Family.TAN_EXP and spec.m:
            value = value ** (spec.q ** spec.m)
    else:
        value = trig_mpf("sin", w, p) / w
    return Real(value, p.working_bits)


def fit_slope(rows, start: int = 5) -> float:
    """Least-squares slope of ln(abs_error) against terms over rows with terms >= start."""
    usable = [(t, e) for t, e in rows if t >= start]
    if len(usable) < 2:
        raise DegenerateFitError(f"need at least two rows with terms >= {start}")
    if any(e <= 0 for _, e in usable):
        raise DegenerateFitError("zero abs_error in fit range; raise precision")
    xs = [float(t) for t, _ in usable]
    ys = [float(numerics.context(64).ln(e)) for _, e in usable]
    return statistics.linear_regression(xs, ys).slope


def convergence_report(spec: ProductSpec, n_max: int, p: Precision = DEFAULT_PRECISION) -> ConvergenceReport:
    """|partial(0..n) - limit| for n = 1..n_max, plus the fitted log-error slope.

    Partials are accumulated incrementally in ascending k at the doubled-guard
    precision that :func:`partial_product` settles on.
    """
    if spec.m != 0:
        raise DomainError("convergence_report needs m = 0")
    if not isinstance(n_max, int) or n_max < 3:
        raise DomainError("n_max must be >= 3")
    wp = p.with_guard(2 * p.guard_bits)
    ctx = ctx_for(wp)
    limit = limit_value(spec, wp).value
    floor = ctx.ldexp(max(abs(limit), ctx.one), -(wp.working_bits - 8))
    rows = []
    acc = ctx.zero if spec.family is Family.TAN_EXP else ctx.one
    for k in range(n_max):
        t = _term_mpf(spec, k, wp)
        if spec.family is Family.TAN_EXP:
            acc += t
            partial = ctx.exp(acc)
        else:
            acc *= t
            partial = acc
        rows.append((k + 1, abs(partial - limit)))
    if any(e <= floor for _, e in rows):
        raise DegenerateFitError("abs_error underflows the working precision; raise precision")
    start = 5 if n_max >= 6 else 1
    return ConvergenceReport(tuple(rows), fit_slope(rows, start))


def required_terms(spec: ProductSpec, target_abs_err: Number) -> int:
    """Smallest n >= 1 with z**2 * b**(-2n) <= target_abs_err (b = ``spec.base``).

    TAN_EXP converges only like b**-n, so its model is z**2 * b**-n.
    """
    ctx = numerics.context(256)
    z = resolve(spec.z, ctx)
    if not 0 < z < ctx.pi:
        raise DomainError("required_terms needs 0 < z < pi")
    target_exact = numerics.exact_fraction(target_abs_err)
    target = resolve(target_exact if target_exact is not None else target_abs_err, ctx)
    if target <= 0:
        raise DomainError("target_abs_err must be positive")
    b = spec.base
    rate = 1 if spec.family is Family.TAN_EXP else 2
    z_exact = numerics.exact_fraction(spec.z)

    def fits(n: int) -> bool:
        if z_exact is not None and target_exact is not None:
            return z_exact ** 2 <= target_exact * Fraction(b) ** (rate * n)
        return z ** 2 <= target * ctx.mpf(b) ** (rate * n)

    guess = max(1, int(ctx.ceil(ctx.ln(z ** 2 / target) / (rate * ctx.ln(b)))))
    n = guess
    while n > 1 and fits(n - 1):
        n -= 1
    while not fits(n):
        n += 1
    return n
