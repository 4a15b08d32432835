"""Exact nested-radical trees: construction, certified evaluation and text form."""
from .build import (
    SEED_NS,
    TABLE1_REFERENCE,
    TABLE1_NS,
    AngleSeed,
    cos_tower,
    half_angle_cos,
    half_angle_tan_cot,
    seed_cos,
    table1_expressions,
    viete_expression,
)
from .text import parse_expr, render_expr
from .tree import (
    Neg,
    Product,
    Quotient,
    RadicalExpr,
    RationalConst,
    Sqrt,
    Sum,
    Verdict,
    as_expr,
    bounds,
    depth,
    enclosure,
    eval_expr,
    expr_equal,
    node_count,
    sqrt_depth,
)

from ..errors import IntervalCheckError as InvariantViolationError  # noqa: E402
