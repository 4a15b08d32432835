"""Exact radical expression trees and their certified interval evaluation.

Nodes are immutable.  Each node carries a cached interval enclosure computed
at construction from its children's enclosures; that is what certifies the
``Sqrt`` (nonnegative child) and ``Quotient`` (denominator away from 0)
invariants cheaply.  When the cached enclosure is too coarse to decide, the
subtree is re-evaluated at doubling precision before giving up.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from mpmath.ctx_iv import MPIntervalContext

from ..errors import IntervalCheckError
from ..numerics import DEFAULT_PRECISION, EvalResult, Precision, Real, context

ENCLOSURE_BITS = 96
MAX_CERTIFY_BITS = 4096
MAX_EVAL_ESCALATIONS = 8


@lru_cache(maxsize=None)
def interval_context(bits: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = bits
    return ctx


class _Undecided(Exception):
    """Enclosure too wide to check an invariant at the current precision."""


class RadicalExpr:
    """Base class of the expression node types."""

    def kids(self) -> tuple:
        return ()

    def combine(self, ctx, kid_values):
        """Interval of this node from its children's intervals (outward rounded)."""
        raise NotImplementedError

    def _certify(self):
        bits = ENCLOSURE_BITS
        for kid in self.kids():
            bits = max(bits, kid._enc[0])
        encs = [kid._enc[1] for kid in self.kids()]
        try:
            value = self.combine(interval_context(bits), encs)
        except _Undecided:
            value = None
        while value is None:
            bits *= 2
            if bits > MAX_CERTIFY_BITS:
                raise IntervalCheckError(f"cannot certify {type(self).__name__} invariant up to {MAX_CERTIFY_BITS} bits")
            try:
                value = _interval(self, bits)
            except _Undecided:
                value = None
        object.__setattr__(self, "_enc", (bits, value))

    def __str__(self):
        from .text import render_expr

        return render_expr(self)


def _endpoint(x, which):
    # make_mpf wraps the raw endpoint without rounding; only comparisons use it
    return context(53).make_mpf(x._mpi_[which])


def _lower(x):
    return _endpoint(x, 0)


def _upper(x):
    return _endpoint(x, 1)


def bounds(iv):
    """(lower, upper) endpoints of an interval as mpf values, exactly."""
    return _lower(iv), _upper(iv)


@dataclass(frozen=True)
class RationalConst(RadicalExpr):
    numerator: int
    denominator: int = 1
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for v in (self.numerator, self.denominator):
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError("rational constants need integer numerator and denominator")
        if self.denominator == 0:
            raise IntervalCheckError("zero denominator in rational constant")
        f = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", f.numerator)
        object.__setattr__(self, "denominator", f.denominator)
        self._certify()

    @classmethod
    def of(cls, value) -> "RationalConst":
        f = Fraction(value)
        return cls(f.numerator, f.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def is_integer(self) -> bool:
        return self.denominator == 1

    def combine(self, ctx, kid_values):
        v = ctx.mpf(self.numerator)
        return v if self.denominator == 1 else v / self.denominator


@dataclass(frozen=True)
class Sqrt(RadicalExpr):
    child: RadicalExpr
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_node(self.child)
        self._certify()

    def kids(self):
        return (self.child,)

    def combine(self, ctx, kid_values):
        (c,) = kid_values
        if _upper(c) < 0:
            raise IntervalCheckError(f"sqrt of a provably negative value {c}")
        if _lower(c) < 0:
            raise _Undecided
        return ctx.sqrt(c)


class _NAry(RadicalExpr):
    def _setup(self):
        children = tuple(self.children)
        if len(children) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two children")
        for c in children:
            _check_node(c)
        object.__setattr__(self, "children", children)
        self._certify()

    def kids(self):
        return self.children


@dataclass(frozen=True)
class Sum(_NAry):
    children: tuple
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._setup()

    def combine(self, ctx, kid_values):
        total = kid_values[0]
        for v in kid_values[1:]:
            total = total + v
        return total


@dataclass(frozen=True)
class Product(_NAry):
    children: tuple
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._setup()

    def combine(self, ctx, kid_values):
        total = kid_values[0]
        for v in kid_values[1:]:
            total = total * v
        return total


@dataclass(frozen=True)
class Quotient(RadicalExpr):
    num: RadicalExpr
    den: RadicalExpr
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_node(self.num)
        _check_node(self.den)
        self._certify()

    def kids(self):
        return (self.num, self.den)

    def combine(self, ctx, kid_values):
        a, b = kid_values
        lo, hi = _lower(b), _upper(b)
        if lo == 0 and hi == 0:
            raise IntervalCheckError("division by an exact zero")
        if lo <= 0 <= hi:
            raise _Undecided
        return a / b


@dataclass(frozen=True)
class Neg(RadicalExpr):
    child: RadicalExpr
    _enc: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_node(self.child)
        self._certify()

    def kids(self):
        return (self.child,)

    def combine(self, ctx, kid_values):
        return -kid_values[0]


def _check_node(x):
    if not isinstance(x, RadicalExpr):
        raise TypeError(f"expected a RadicalExpr, got {type(x).__name__}")


def as_expr(x) -> RadicalExpr:
    """Promote ints and Fractions to :class:`RationalConst`."""
    if isinstance(x, RadicalExpr):
        return x
    return RationalConst.of(x)


def _interval(e: RadicalExpr, bits: int):
    ctx = interval_context(bits)
    memo = {}

    def walk(node):
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        value = node.combine(ctx, [walk(k) for k in node.kids()])
        memo[key] = value
        return value

    return walk(e)


def enclosure(e: RadicalExpr, bits: int):
    """Outward-rounded interval containing ``e``, computed at ``bits`` of precision.

    Raises ``IntervalCheckError`` if a sqrt argument or divisor cannot be kept
    away from the forbidden region at this precision.
    """
    try:
        return _interval(e, bits)
    except _Undecided:
        raise IntervalCheckError(f"enclosure at {bits} bits straddles a forbidden value") from None


def depth(e: RadicalExpr) -> int:
    kids = e.kids()
    return 1 + (max(depth(k) for k in kids) if kids else 0)


def sqrt_depth(e: RadicalExpr) -> int:
    """Largest number of Sqrt nodes on any root-to-leaf path."""
    below = max((sqrt_depth(k) for k in e.kids()), default=0)
    return below + (1 if isinstance(e, Sqrt) else 0)


def node_count(e: RadicalExpr) -> int:
    return 1 + sum(node_count(k) for k in e.kids())


def eval_expr(e: RadicalExpr, p: Precision = DEFAULT_PRECISION) -> EvalResult:
    """Certified value of ``e``: midpoint of its enclosure and the half-width.

    Precision escalates (guard doubling) until the half-width is at most
    ``2**-target * max(1, |mid|)``.
    """
    guard = p.guard_bits
    last = None
    for _ in range(MAX_EVAL_ESCALATIONS + 1):
        wp = p.with_guard(guard)
        bits = wp.working_bits
        try:
            iv = enclosure(e, bits)
        except IntervalCheckError as exc:
            last = exc
            guard *= 2
            continue
        ctx = context(bits)
        a, b = _lower(iv), _upper(iv)
        mid = ctx.mpf(ctx.ldexp(ctx.fadd(a, b, exact=True), -1))
        bound = max(ctx.fsub(b, mid, rounding="u"), ctx.fsub(mid, a, rounding="u"), ctx.zero)
        if bound <= ctx.ldexp(max(ctx.one, abs(mid)), -p.target_bits):
            return EvalResult(Real(mid, bits), bound)
        guard *= 2
    if last is not None:
        raise last
    raise IntervalCheckError(f"enclosure did not shrink to {p.target_bits} bits")


class Verdict(enum.Enum):
    EQUAL_WITHIN = "equal_within"
    DISTINCT = "distinct"
    UNDECIDED = "undecided"


def expr_equal(a: RadicalExpr, b: RadicalExpr, max_bits: int = 256) -> Verdict:
    """Numerical comparison; never claims symbolic equality.

    ``DISTINCT`` once the enclosures separate at any precision up to
    ``max_bits``; ``EQUAL_WITHIN`` if at ``max_bits`` every point of the two
    enclosures is within ``2**(8 - max_bits) * max(1, |a|)``.
    """
    bits = min(64, max_bits)
    while True:
        try:
            ia = enclosure(a, bits)
            ib = enclosure(b, bits)
        except IntervalCheckError:
            if bits >= max_bits:
                raise
            bits = min(2 * bits, max_bits)
            continue
        a_lo, a_hi, b_lo, b_hi = _lower(ia), _upper(ia), _lower(ib), _upper(ib)
        if a_hi < b_lo or b_hi < a_lo:
            return Verdict.DISTINCT
        if bits >= max_bits:
            break
        bits = min(2 * bits, max_bits)
    ctx = context(max_bits + 16)
    spread = max(ctx.fsub(a_hi, b_lo, rounding="u"), ctx.fsub(b_hi, a_lo, rounding="u"))
    scale = max(ctx.one, abs(a_lo), abs(a_hi))
    if spread <= ctx.ldexp(scale, 8 - max_bits):
        return Verdict.EQUAL_WITHIN
    return Verdict.UNDECIDED
