"""Precision-controlled real arithmetic on top of mpmath.

Every function takes an explicit :class:`Precision`; nothing here reads or
mutates mpmath's global ``mp`` context.  Working contexts are cached per bit
count and never modified after creation, so they can be shared across threads.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Union

import mpmath
from mpmath.ctx_mp import MPContext

from .errors import DomainError, NonConvergenceError, PoleError, PrecisionError

MIN_TARGET_BITS = 53
MIN_GUARD_BITS = 16
MAX_ESCALATIONS = 4
PREC_ENV_VAR = "PRODLAB_PREC_BITS"

TRIG_FUNCTIONS = ("sin", "cos", "tan", "cot", "csc")


@dataclass(frozen=True)
class Precision:
    target_bits: int = 128
    guard_bits: int = 32

    def __post_init__(self):
        if not isinstance(self.target_bits, int) or self.target_bits < MIN_TARGET_BITS:
            raise PrecisionError(f"target_bits must be an integer >= {MIN_TARGET_BITS}, got {self.target_bits!r}")
        if not isinstance(self.guard_bits, int) or self.guard_bits < MIN_GUARD_BITS:
            raise PrecisionError(f"guard_bits must be an integer >= {MIN_GUARD_BITS}, got {self.guard_bits!r}")

    @property
    def working_bits(self) -> int:
        return self.target_bits + self.guard_bits

    def with_guard(self, guard_bits: int) -> "Precision":
        return Precision(self.target_bits, guard_bits)

    def raised(self, extra_bits: int) -> "Precision":
        """Same target, ``extra_bits`` more guard."""
        return Precision(self.target_bits, self.guard_bits + max(0, int(extra_bits)))

    @classmethod
    def from_env(cls, environ=None) -> "Precision":
        environ = os.environ if environ is None else environ
        raw = environ.get(PREC_ENV_VAR)
        if raw is None or raw.strip() == "":
            return cls()
        try:
            bits = int(raw)
        except ValueError:
            raise PrecisionError(f"{PREC_ENV_VAR}={raw!r} is not an integer") from None
        return cls(target_bits=bits)


DEFAULT_PRECISION = Precision()


@lru_cache(maxsize=None)
def context(bits: int) -> MPContext:
    """Private mpmath context with ``bits`` of mantissa (round-to-nearest)."""
    ctx = MPContext()
    ctx.prec = bits
    return ctx


def ctx_for(p: Precision) -> MPContext:
    return context(p.working_bits)


@dataclass(frozen=True)
class PiMultiple:
    """The exact real ``coeff * pi``; resolved lazily at whatever precision is asked."""

    coeff: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    def __str__(self):
        c = self.coeff
        head = "pi" if abs(c.numerator) == 1 else f"{abs(c.numerator)}*pi"
        sign = "-" if c < 0 else ""
        if c == 0:
            return "0"
        return f"{sign}{head}" if c.denominator == 1 else f"{sign}{head}/{c.denominator}"


@dataclass(frozen=True)
class Real:
    value: Any  # mpmath mpf
    precision_bits: int

    def __post_init__(self):
        if not mpmath.isfinite(self.value):
            raise DomainError(f"non-finite value {self.value}")

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return format_value(self.value, self.precision_bits - MIN_GUARD_BITS)


@dataclass(frozen=True)
class EvalResult:
    value: Real
    abs_error_bound: Any  # nonnegative mpf

    def __float__(self):
        return float(self.value)

    def contains(self, x) -> bool:
        """Whether ``x`` lies in the certified enclosure."""
        ctx = context(self.value.precision_bits)
        return abs(ctx.mpf(x) - self.value.value) <= self.abs_error_bound


Number = Union[int, float, str, Fraction, PiMultiple, Real, Any]

_PI_RE = re.compile(r"^\s*(-)?\s*(?:(\d+)\s*\*\s*)?pi\s*(?:/\s*(\d+))?\s*$")


def parse_real(text: str) -> Union[Fraction, PiMultiple]:
    """Parse a decimal / rational literal, or ``pi``, ``pi/K``, ``N*pi/K``.

    Decimals are kept exact as fractions so that no precision is lost before
    the working precision is known.
    """
    m = _PI_RE.match(text)
    if m:
        sign, num, den = m.groups()
        den = int(den) if den else 1
        if den == 0:
            raise DomainError(f"zero denominator in {text!r}")
        coeff = Fraction(int(num) if num else 1, den)
        return PiMultiple(-coeff if sign else coeff)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse {text!r} as a real number") from None


def resolve(x: Number, ctx: MPContext):
    """Return ``x`` as an mpf of ``ctx`` (rounded once, to nearest)."""
    if isinstance(x, Real):
        return ctx.mpf(x.value)
    if isinstance(x, PiMultiple):
        c = x.coeff
        return ctx.pi * c.numerator / c.denominator
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return resolve(parse_real(x), ctx)
    if isinstance(x, float) and not (x == x and abs(x) != float("inf")):
        raise DomainError(f"non-finite input {x}")
    v = ctx.mpf(x)
    if not ctx.isfinite(v):
        raise DomainError(f"non-finite input {x}")
    return v


def exact_fraction(x: Number):
    """``x`` as an exact Fraction when it is rational by construction, else None."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        v = parse_real(x)
        return v if isinstance(v, Fraction) else None
    return None


def real(x: Number, p: Precision = DEFAULT_PRECISION) -> Real:
    return Real(resolve(x, ctx_for(p)), p.working_bits)


def pi_ref(p: Precision = DEFAULT_PRECISION) -> Real:
    ctx = ctx_for(p)
    return Real(+ctx.pi, p.working_bits)


def _pole_distance(fn: str, x, ctx: MPContext):
    if fn == "tan":
        half_pi = ctx.pi / 2
        j = ctx.nint((x - half_pi) / ctx.pi)
        return abs(x - half_pi - j * ctx.pi)
    j = ctx.nint(x / ctx.pi)
    return abs(x - j * ctx.pi)


def trig_mpf(fn: str, x, p: Precision):
    """mpf-level kernel behind :func:`trig_eval`; ``x`` must already be an mpf."""
    ctx = ctx_for(p)
    if fn not in TRIG_FUNCTIONS:
        raise DomainError(f"unknown trigonometric function {fn!r}")
    if not ctx.isfinite(x):
        raise DomainError(f"{fn} of non-finite argument {x}")
    if fn == "sin":
        return ctx.sin(x)
    if fn == "cos":
        return ctx.cos(x)
    d = _pole_distance(fn, x, ctx)
    if d < ctx.ldexp(1, -(p.target_bits // 2)):
        raise PoleError(fn, ctx.nstr(x, 20), ctx.nstr(d, 5))
    if fn == "tan":
        return ctx.tan(x)
    if fn == "cot":
        return ctx.cot(x)
    return ctx.csc(x)


def trig_eval(fn: str, x: Number, p: Precision = DEFAULT_PRECISION) -> Real:
    """sin, cos, tan, cot or csc of ``x`` at the working precision of ``p``.

    tan is refused within ``2**(-target_bits/2)`` of an odd multiple of pi/2,
    cot and csc within the same distance of a multiple of pi.
    """
    ctx = ctx_for(p)
    return Real(trig_mpf(fn, resolve(x, ctx), p), p.working_bits)


def log_eval(x: Number, p: Precision = DEFAULT_PRECISION) -> Real:
    ctx = ctx_for(p)
    v = resolve(x, ctx)
    if v <= 0:
        raise DomainError(f"log of nonpositive argument {v}")
    return Real(ctx.ln(v), p.working_bits)


def exp_eval(x: Number, p: Precision = DEFAULT_PRECISION) -> Real:
    ctx = ctx_for(p)
    return Real(ctx.exp(resolve(x, ctx)), p.working_bits)


def sqrt_eval(x: Number, p: Precision = DEFAULT_PRECISION) -> Real:
    ctx = ctx_for(p)
    v = resolve(x, ctx)
    if v < 0:
        raise DomainError(f"sqrt of negative argument {v}")
    return Real(ctx.sqrt(v), p.working_bits)


def _as_mpf(result, ctx):
    if isinstance(result, EvalResult):
        result = result.value
    if isinstance(result, Real):
        return ctx.mpf(result.value)
    return ctx.mpf(result)


def stable_eval(computation: Callable[[Precision], Any], p: Precision = DEFAULT_PRECISION) -> EvalResult:
    """Run ``computation`` at two guard levels and accept once they agree.

    The comparison is made at ``target + guard`` vs ``target + 2*guard``; on
    disagreement (or a pole/zero-division failure) the guard is doubled, at most
    ``MAX_ESCALATIONS`` times.  The returned bound is ``2**-target * |value|``.
    """
    guard = p.guard_bits
    lower = None
    last_exc = None
    for _ in range(MAX_ESCALATIONS + 1):
        lo_p, hi_p = p.with_guard(guard), p.with_guard(2 * guard)
        hi_ctx = ctx_for(hi_p)
        try:
            if lower is None:
                lower = _as_mpf(computation(lo_p), hi_ctx)
            upper = _as_mpf(computation(hi_p), hi_ctx)
        except (PoleError, ZeroDivisionError) as exc:
            last_exc = exc
            lower = None
            guard *= 2
            continue
        if not (hi_ctx.isfinite(lower) and hi_ctx.isfinite(upper)):
            lower = None
            guard *= 2
            continue
        tol = hi_ctx.ldexp(abs(upper), -p.target_bits)
        if abs(upper - lower) <= tol:
            return EvalResult(Real(upper, hi_p.working_bits), tol)
        lower = upper
        guard *= 2
    raise NonConvergenceError(
        f"no agreement to {p.target_bits} bits after {MAX_ESCALATIONS} guard escalations"
        + (f" (last failure: {last_exc})" if last_exc else "")
    ) from last_exc


def decimal_digits(prec_bits: int) -> int:
    """Digits printed for a given precision: floor(bits * log10 2) - 2."""
    # 2**bits is never a power of ten, so its digit count is floor(bits*log10 2) + 1
    return len(str(2 ** prec_bits)) - 3


def format_value(x, prec_bits: int) -> str:
    """Round-to-nearest decimal rendering with :func:`decimal_digits` significant digits."""
    digits = max(1, decimal_digits(prec_bits))
    ctx = context(max(prec_bits, MIN_TARGET_BITS) + MIN_GUARD_BITS)
    return mpmath.libmp.to_str(ctx.mpf(x)._mpf_, digits)
