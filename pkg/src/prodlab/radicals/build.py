"""Builders for the half-angle radical towers behind the cosine and tangent products."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import IntervalCheckError, UnsupportedSeedError
from .tree import Neg, Product, Quotient, RadicalExpr, RationalConst, Sqrt, Sum, bounds, enclosure

SEED_NS = (1, 2, 3, 4, 5, 6, 8)
TABLE1_NS = (2, 3, 4, 5, 6, 8)

_ONE = RationalConst(1)


def seed_cos(n: int) -> RadicalExpr:
    """Exact cos(pi/n) for the tabulated constructible n."""
    if n == 1:
        return RationalConst(-1)
    if n == 2:
        return RationalConst(0)
    if n == 3:
        return RationalConst(1, 2)
    if n == 4:
        return Quotient(Sqrt(RationalConst(2)), RationalConst(2))
    if n == 5:
        return Quotient(Sum((RationalConst(1), Sqrt(RationalConst(5)))), RationalConst(4))
    if n == 6:
        return Quotient(Sqrt(RationalConst(3)), RationalConst(2))
    if n == 8:
        return Quotient(Sqrt(Sum((RationalConst(2), Sqrt(RationalConst(2))))), RationalConst(2))
    raise UnsupportedSeedError(f"no exact radical for cos(pi/{n}); supported n: {SEED_NS}")


@dataclass(frozen=True)
class AngleSeed:
    n: int
    cos_expr: RadicalExpr

    @classmethod
    def for_n(cls, n: int) -> "AngleSeed":
        return cls(n, seed_cos(n))


def _lower_bound_ok(e: RadicalExpr, floor) -> bool:
    """Whether e >= floor can be certified (floor an int)."""
    bits = 96
    while bits <= 4096:
        lo, hi = bounds(enclosure(e, bits))
        if lo >= floor:
            return True
        if hi < floor:
            return False
        bits *= 2
    return False


def half_angle_cos(cos_e: RadicalExpr) -> RadicalExpr:
    """cos(t/2) = sqrt((cos t + 1)/2), given cos t; rational inputs fold to one constant."""
    if isinstance(cos_e, RationalConst):
        c = cos_e.value
        if not -1 <= c <= 1:
            raise IntervalCheckError(f"cosine value {c} outside [-1, 1]")
        return Sqrt(RationalConst.of((c + 1) / 2))
    if not _lower_bound_ok(cos_e, -1):
        raise IntervalCheckError("cos_e + 1 could be negative")
    return Sqrt(Quotient(Sum((cos_e, _ONE)), RationalConst(2)))


def half_angle_tan_cot(cos_e: RadicalExpr):
    """(tan(t/2), cot(t/2)) = (sqrt((1 - c)/(1 + c)), 1/that), for an angle t in (0, pi)."""
    if isinstance(cos_e, RationalConst):
        c = cos_e.value
        if not -1 < c < 1:
            raise IntervalCheckError(f"cos value {c} does not describe an angle in (0, pi)")
        tan_half = Sqrt(RationalConst.of((1 - c) / (1 + c)))
    else:
        tan_half = Sqrt(Quotient(Sum((_ONE, Neg(cos_e))), Sum((_ONE, cos_e))))
    return tan_half, Quotient(_ONE, tan_half)


def viete_expression(n_terms: int):
    """Factors cos(pi / 2**(k+2)), k < n_terms, as nested radicals, and their product.

    Factor k is reached by k+1 half-angle steps from cos(pi/2) = 0.
    """
    if not isinstance(n_terms, int) or n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    factors = []
    c = seed_cos(2)
    for _ in range(n_terms):
        c = half_angle_cos(c)
        factors.append(c)
    product = factors[0] if n_terms == 1 else Product(tuple(factors))
    return factors, product


def cos_tower(n: int, levels: int):
    """[cos(pi/n), cos(pi/(2n)), ..., cos(pi/(n 2**levels))]."""
    tower = [seed_cos(n)]
    for _ in range(levels):
        tower.append(half_angle_cos(tower[-1]))
    return tower


def table1_expressions(n: int, k_terms: int):
    """Radical terms of the base-2 tangent product at z = pi/n, and its limit coefficient.

    Term k is (1/2) tan(pi/(n 2**(k+1))) cot(pi/(n 2**(k+2))); the product
    converges to result_coeff / pi with result_coeff = 2n tan(pi/(2n)).
    """
    if n not in TABLE1_NS:
        seed_cos(n)  # raises UnsupportedSeedError for untabulated n
        raise UnsupportedSeedError(f"table rows exist for n in {TABLE1_NS}, not {n}")
    if not isinstance(k_terms, int) or k_terms < 1:
        raise ValueError("k_terms must be >= 1")
    tower = cos_tower(n, k_terms)
    half = RationalConst(1, 2)
    terms = []
    for k in range(k_terms):
        tan_k, _ = half_angle_tan_cot(tower[k])
        _, cot_k1 = half_angle_tan_cot(tower[k + 1])
        terms.append(Product((half, tan_k, cot_k1)))
    tan0, _ = half_angle_tan_cot(tower[0])
    result_coeff = Product((RationalConst(2 * n), tan0))
    return terms, result_coeff


# Result-column coefficients of the tangent table, as printed (limit = coeff / pi).
TABLE1_REFERENCE = {
    2: "4",
    3: "2 * sqrt(3)",
    4: "8 * sqrt((2 + -(sqrt(2)))/(2 + sqrt(2)))",
    5: "10 * sqrt(1 + -(2/sqrt(5)))",
    6: "12 * (2 + -(sqrt(3)))",
    8: "16 * sqrt((2 + -(sqrt(2 + sqrt(2))))/(2 + sqrt(2 + sqrt(2))))",
}
