import math
import random
import threading
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodlab.errors import DomainError, NonConvergenceError, PoleError, PrecisionError
from prodlab.numerics import (
    PREC_ENV_VAR,
    PiMultiple,
    Precision,
    Real,
    ctx_for,
    decimal_digits,
    format_value,
    parse_real,
    pi_ref,
    real,
    stable_eval,
    trig_eval,
)

# 40 significant digits of pi, transcribed from a published table.
PI_40 = "3.141592653589793238462643383279502884197"

P128 = Precision(128, 32)


def rel(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    return abs(a - b) / abs(b)


class TestPrecision:
    def test_defaults(self):
        p = Precision()
        assert (p.target_bits, p.guard_bits, p.working_bits) == (128, 32, 160)

    @pytest.mark.parametrize("target,guard", [(52, 32), (128, 15), (0, 16)])
    def test_rejects_invalid(self, target, guard):
        with pytest.raises(PrecisionError):
            Precision(target, guard)

    def test_from_env(self):
        assert Precision.from_env({PREC_ENV_VAR: "200"}).target_bits == 200
        assert Precision.from_env({}).target_bits == 128
        with pytest.raises(PrecisionError):
            Precision.from_env({PREC_ENV_VAR: "lots"})


class TestPiRef:
    def test_53_bits(self):
        assert float(pi_ref(Precision(53, 16))) == 3.141592653589793

    def test_128_bits_against_published_digits(self):
        with mpmath.workdps(60):
            assert rel(pi_ref(P128).value, mpmath.mpf(PI_40)) < mpmath.mpf(10) ** -38

    def test_invalid_precision(self):
        with pytest.raises(PrecisionError):
            pi_ref(Precision(52))

    @pytest.mark.parametrize("lo,hi", [(53, 128), (64, 256), (100, 101)])
    def test_agrees_across_precisions(self, lo, hi):
        a, b = pi_ref(Precision(lo)).value, pi_ref(Precision(hi)).value
        with mpmath.workprec(hi + 64):
            assert abs(mpmath.mpf(a) - b) <= mpmath.ldexp(mpmath.mpf(4), -(lo - 2))

    def test_within_two_ulps(self):
        with mpmath.workdps(60):
            ulp = mpmath.ldexp(1, 2 - 128)  # pi lies in [2, 4)
            assert abs(pi_ref(P128).value - mpmath.mpf(PI_40)) <= 2 * ulp


class TestTrig:
    def test_cos_pi_over_4(self):
        v = trig_eval("cos", PiMultiple(Fraction(1, 4)), P128)
        assert rel(v.value, mpmath.sqrt(2) / 2) < 2.0 ** -126
        assert str(v).startswith("0.7071067811865476"[:17])

    def test_tan_pi_over_8_matches_half_angle(self):
        # independent route: tan(t/2) = sin t / (1 + cos t) at t = pi/4, done in the global context
        with mpmath.workprec(200):
            t = mpmath.pi / 4
            oracle = mpmath.sin(t) / (1 + mpmath.cos(t))
            assert rel(trig_eval("tan", "pi/8", P128).value, oracle) < 2.0 ** -127
            assert rel(oracle, mpmath.sqrt(2) - 1) < 2.0 ** -190

    def test_cot_near_zero_is_a_pole(self):
        with pytest.raises(PoleError):
            trig_eval("cot", Fraction(1, 10 ** 40), P128)

    def test_tan_near_half_pi_is_a_pole(self):
        ctx = ctx_for(P128)
        with pytest.raises(PoleError):
            trig_eval("tan", Real(ctx.pi / 2, 160), P128)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            trig_eval("sin", float("nan"), P128)
        with pytest.raises(DomainError):
            trig_eval("sec", 1, P128)

    def test_pythagorean_identity_seeded(self):
        rng = random.Random(20240)
        ctx = ctx_for(P128)
        tol = ctx.ldexp(1, 4 - 128)
        for _ in range(1000):
            x = Fraction(rng.randrange(1, 3 * 2 ** 40), 2 ** 40)
            s = trig_eval("sin", x, P128).value
            c = trig_eval("cos", x, P128).value
            assert abs(s * s + c * c - 1) <= tol

    def test_tan_cot_product_seeded(self):
        rng = random.Random(20241)
        ctx = ctx_for(P128)
        tol = ctx.ldexp(1, 4 - 128)
        checked = 0
        for _ in range(1000):
            x = Fraction(rng.randrange(1, 3 * 2 ** 40), 2 ** 40)
            if abs(float(x) - math.pi / 2) < 1e-3:
                continue
            t = trig_eval("tan", x, P128).value
            ct = trig_eval("cot", x, P128).value
            assert abs(t * ct - 1) <= tol
            checked += 1
        assert checked > 990

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=1e-6, max_value=3.0))
    def test_matches_double_precision(self, x):
        p = Precision(53, 16)
        assert math.isclose(float(trig_eval("sin", x, p)), math.sin(x), rel_tol=1e-13)
        assert math.isclose(float(trig_eval("cos", x, p)), math.cos(x), rel_tol=1e-13, abs_tol=1e-15)
        if abs(x - math.pi / 2) > 1e-6:
            assert math.isclose(float(trig_eval("tan", x, p)), math.tan(x), rel_tol=1e-13)
            assert math.isclose(float(trig_eval("cot", x, p)), 1 / math.tan(x), rel_tol=1e-13)

    def test_relative_error_contract(self):
        # compare against a 400-bit evaluation in mpmath's global context
        for fn, x in [("sin", Fraction(7, 5)), ("cos", Fraction(1, 3)), ("tan", Fraction(11, 10)), ("cot", Fraction(2, 7))]:
            got = trig_eval(fn, x, P128).value
            with mpmath.workprec(400):
                exact = getattr(mpmath, fn)(mpmath.mpf(x.numerator) / x.denominator)
                assert rel(got, exact) <= mpmath.ldexp(1, 1 - 128)


class TestStableEval:
    def test_exact_identity(self):
        r = stable_eval(lambda p: trig_eval("sin", 1, p).value * trig_eval("csc", 1, p).value, P128)
        assert abs(r.value.value - 1) <= r.abs_error_bound
        assert r.abs_error_bound <= mpmath.ldexp(1, -128)

    def test_small_angle_cosine(self):
        calls = []

        def comp(p):
            calls.append(p.guard_bits)
            return trig_eval("cos", PiMultiple(Fraction(1, 2 ** 32)), p)

        r = stable_eval(comp, P128)
        assert calls == [32, 64]
        # Taylor oracle 1 - t^2/2 with t = pi 2^-32; the t^4 term is ~1e-38
        with mpmath.workprec(300):
            t = mpmath.pi * mpmath.ldexp(1, -32)
            assert abs(r.value.value - (1 - t ** 2 / 2)) < mpmath.mpf("1e-37")
            assert abs((1 - r.value.value) - mpmath.mpf("2.67516163330839461969e-19")) < mpmath.mpf("1e-38")

    def test_pole_is_non_convergence(self):
        with pytest.raises(NonConvergenceError):
            stable_eval(lambda p: trig_eval("cot", PiMultiple(1), p), P128)

    def test_escalates_until_agreement(self):
        seen = []

        def comp(p):
            seen.append(p.guard_bits)
            ctx = ctx_for(p)
            # guard-dependent error of 2**-(guard/4), gone from guard 256 on
            noise = ctx.ldexp(1, -(p.guard_bits // 4)) if p.guard_bits < 256 else 0
            return ctx.one + noise

        r = stable_eval(comp, Precision(64, 32))
        assert seen == [32, 64, 128, 256, 512]
        assert r.value.precision_bits == 64 + 512
        assert r.value.value == 1

    def test_result_precision_bits(self):
        r = stable_eval(lambda p: pi_ref(p), P128)
        assert r.value.precision_bits == 128 + 64


class TestParsing:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("pi/4", PiMultiple(Fraction(1, 4))),
            ("-pi/2", PiMultiple(Fraction(-1, 2))),
            ("3*pi/8", PiMultiple(Fraction(3, 8))),
            ("pi", PiMultiple(1)),
            ("0.7", Fraction(7, 10)),
            ("1e-3", Fraction(1, 1000)),
            ("2/3", Fraction(2, 3)),
        ],
    )
    def test_parse_real(self, text, expected):
        assert parse_real(text) == expected

    def test_bad_literal(self):
        with pytest.raises(DomainError):
            parse_real("pie")

    def test_decimal_is_exact(self):
        v = real("0.1", Precision(300))
        with mpmath.workprec(400):
            assert abs(v.value - mpmath.mpf(1) / 10) < mpmath.ldexp(1, -330)


def test_decimal_digits():
    assert decimal_digits(128) == 36  # floor(128 log10 2) = 38
    assert decimal_digits(53) == 13
    assert len(format_value(mpmath.mpf(2) / 3, 128).lstrip("0.")) == 36


def test_precision_contexts_are_thread_safe():
    results = {}

    def work(bits):
        p = Precision(bits)
        results[bits] = [str(pi_ref(p)) for _ in range(50)]

    threads = [threading.Thread(target=work, args=(b,)) for b in (64, 128, 200, 256)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for bits, vals in results.items():
        assert len(set(vals)) == 1
        assert vals[0] == str(pi_ref(Precision(bits)))
