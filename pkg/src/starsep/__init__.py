"""Exact star products with separation of variables on pseudo-Kähler charts."""

from .geometry import GeometryCache
from .jets import (
    GaussRational,
    Jet,
    MultiIndex,
    builtin_potential,
    jet_mul,
    jet_partial,
    jet_reciprocal,
)
from .star import (
    StarResult,
    TensorT,
    closed_form_T_reference,
    star,
    star_via_T,
    tensor_T,
    wick_star,
)
from .symbols import (
    NuSeries,
    Symbol,
    apply_symbol_operator,
    compose,
    euler_apply,
    euler_inverse,
    left_mult_symbol,
    q_apply,
)
from .verify import (
    VerificationReport,
    random_potential,
    random_potential_cache,
    verify_algebraic_identities,
    verify_cross_checks,
    verify_star_laws,
)

__version__ = "0.1.0"

__all__ = [
    "GaussRational",
    "GeometryCache",
    "Jet",
    "MultiIndex",
    "NuSeries",
    "StarResult",
    "Symbol",
    "TensorT",
    "VerificationReport",
    "apply_symbol_operator",
    "builtin_potential",
    "closed_form_T_reference",
    "compose",
    "euler_apply",
    "euler_inverse",
    "jet_mul",
    "jet_partial",
    "jet_reciprocal",
    "left_mult_symbol",
    "q_apply",
    "random_potential",
    "random_potential_cache",
    "star",
    "star_via_T",
    "tensor_T",
    "verify_algebraic_identities",
    "verify_cross_checks",
    "verify_star_laws",
    "wick_star",
]
