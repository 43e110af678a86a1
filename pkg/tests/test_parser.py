"""Expression grammar, index validation, and evaluation into jets."""

from __future__ import annotations

from fractions import Fraction

import pytest

from starsep.exprparse import (
    ExpressionError,
    ast_to_jet,
    expression_jet,
    parse_expression,
)
from starsep.jets import GaussRational, Jet, MultiIndex, builtin_potential


def test_flat_potential_expression():
    jet = expression_jet("z1*zbar1 + z2*zbar2", 2, 4)
    assert jet == builtin_potential("flat", 2, 4)


def test_rational_coefficients():
    jet = expression_jet("zbar1^2 + 3/4*z1", 1, 3)
    expected = Jet.monomial(1, 3, MultiIndex.make([], [1, 1])) + Jet.monomial(
        1, 3, MultiIndex.make([1]), Fraction(3, 4)
    )
    assert jet == expected


def test_index_out_of_range():
    with pytest.raises(ExpressionError, match="index 3 exceeds dimension 2"):
        parse_expression("z3", 2)


def test_imaginary_unit():
    jet = expression_jet("i*z1 + 2", 1, 2)
    expected = Jet.monomial(1, 2, MultiIndex.make([1]), GaussRational(0, 1)) + Jet.constant(
        1, 2, 2
    )
    assert jet == expected


def test_parenthesized_power():
    jet = expression_jet("(z1 + zbar1)^2", 1, 4)
    manual = (
        Jet.monomial(1, 4, MultiIndex.make([1, 1]))
        + Jet.monomial(1, 4, MultiIndex.make([1], [1]), 2)
        + Jet.monomial(1, 4, MultiIndex.make([], [1, 1]))
    )
    assert jet == manual


def test_builtin_atoms_in_expressions():
    jet = expression_jet("fubini-study + 1/4*z1^2*zbar1", 1, 6)
    expected = builtin_potential("fubini-study", 1, 6) + Jet.monomial(
        1, 6, MultiIndex.make([1, 1], [1]), Fraction(1, 4)
    )
    assert jet == expected
    assert expression_jet("fubini_study", 1, 6) == builtin_potential("fubini-study", 1, 6)


def test_unary_minus_extension():
    jet = expression_jet("-z1 + 2", 1, 2)
    assert jet == Jet.constant(1, 2, 2) - Jet.monomial(1, 2, MultiIndex.make([1]))
    jet = expression_jet("(-1/2)*zbar1", 1, 2)
    assert jet == Jet.monomial(1, 2, MultiIndex.make([], [1]), Fraction(-1, 2))


def test_syntax_error_positions():
    with pytest.raises(ExpressionError) as err:
        parse_expression("z1 + * z2", 2)
    assert err.value.position == 5
    with pytest.raises(ExpressionError):
        parse_expression("z1 +", 2)
    with pytest.raises(ExpressionError):
        parse_expression("(z1", 2)
    with pytest.raises(ExpressionError, match="exponent"):
        parse_expression("z1^(2)", 2)
    with pytest.raises(ExpressionError, match="unknown identifier"):
        parse_expression("w3", 2)
    with pytest.raises(ExpressionError, match="unexpected character"):
        parse_expression("z1 @ z2", 2)


def test_power_zero_and_products():
    assert expression_jet("z1^0", 1, 2) == Jet.constant(1, 2, 1)
    jet = expression_jet("2*3/4", 1, 2)
    assert jet == Jet.constant(1, 2, Fraction(3, 2))


def test_evaluation_validates_dimension_late():
    ast = parse_expression("z2")  # no declared dimension at parse time
    with pytest.raises(ExpressionError, match="exceeds dimension 1"):
        ast_to_jet(ast, 1, 3)
