"""High-precision evaluation and verification of Viete-type cosine, sinc and tangent products."""
from .numerics import (
    DEFAULT_PRECISION,
    EvalResult,
    PiMultiple,
    Precision,
    Real,
    pi_ref,
    stable_eval,
    trig_eval,
)
from .products import (
    ConvergenceReport,
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

__version__ = "0.1.0"
