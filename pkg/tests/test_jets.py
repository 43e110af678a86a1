"""Exact jet arithmetic: ring laws, calculus rules, builtin potentials."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from starsep.jets import (
    GaussRational,
    Jet,
    MultiIndex,
    builtin_potential,
    jet_mul,
    jet_partial,
    jet_reciprocal,
)

from conftest import jet_to_poly, log_series_potential, poly_mul, poly_to_jet


def var(n, order, name, k=1):
    return Jet.variable(n, order, name, k)


# ------------------------------------------------------------------ strategies

small_fraction = st.builds(
    Fraction, st.integers(-3, 3), st.sampled_from([1, 2, 3])
)
small_scalar = st.builds(GaussRational, small_fraction, small_fraction)


@st.composite
def jets(draw, n=None, order=None, min_order=0):
    n = n if n is not None else draw(st.integers(1, 2))
    order = order if order is not None else draw(st.integers(min_order, 4))
    coeffs = {}
    for _ in range(draw(st.integers(0, 5))):
        holo = draw(st.lists(st.integers(1, n), max_size=order))
        anti = draw(st.lists(st.integers(1, n), max_size=order))
        if len(holo) + len(anti) > order:
            continue
        coeffs[MultiIndex.make(holo, anti)] = draw(small_scalar)
    return Jet.from_coefficients(n, order, coeffs)


# ------------------------------------------------------------------ jet_mul


def test_mul_difference_of_squares():
    one = Jet.constant(1, 4, 1)
    zzb = var(1, 4, "z") * var(1, 4, "zbar")
    prod = jet_mul(one + zzb, one - zzb)
    assert prod == one - zzb * zzb


def test_mul_absorbing_zero():
    fs = builtin_potential("fubini-study", 2, 6)
    assert jet_mul(fs, Jet.zero(2, 6)).is_zero


def test_mul_reciprocal_oracle_order6():
    # independent oracle: multiply the geometric series against (1 + z zbar)
    a = Jet.constant(1, 6, 1) + var(1, 6, "z") * var(1, 6, "zbar")
    inv = {(m, m): Fraction((-1) ** m) for m in range(4)}
    inv_jet = poly_to_jet(inv, 1, 6)
    assert jet_mul(inv_jet, a) == Jet.constant(1, 6, 1)
    assert jet_reciprocal(a) == inv_jet


def test_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        jet_mul(Jet.zero(1, 2), Jet.zero(2, 2))


def test_mul_takes_min_order():
    a = builtin_potential("flat", 1, 6)
    b = builtin_potential("flat", 1, 3)
    assert jet_mul(a, b).order == 3


# ------------------------------------------------------------------ jet_partial


def test_partial_monomial():
    m = Jet.monomial(1, 5, MultiIndex.make([1, 1], [1]))
    two_zzb = Jet.monomial(1, 4, MultiIndex.make([1], [1]), 2)
    assert jet_partial(m, ("z", 1)) == two_zzb
    assert jet_partial(m, "zbar1") == Jet.monomial(1, 4, MultiIndex.make([1, 1]))


def test_partial_log_series_oracle():
    phi = builtin_potential("fubini-study", 1, 6)
    g = phi.partial_z(1).partial_zbar(1)
    # oracle: d/dz d/dzbar log(1+z zbar) = sum (m+1)(-1)^m (z zbar)^m
    expected = poly_to_jet(
        {(m, m): Fraction((-1) ** m * (m + 1)) for m in range(3)}, 1, 4
    )
    assert g == expected


def test_partial_order_zero_rejected():
    with pytest.raises(ValueError):
        Jet.constant(1, 0, 5).partial_z(1)


def test_partial_decrements_order():
    phi = builtin_potential("flat", 2, 5)
    assert phi.partial_z(2).order == 4


# ------------------------------------------------------------------ jet_reciprocal


def test_reciprocal_geometric_series():
    a = Jet.constant(1, 4, 1) + var(1, 4, "z") * var(1, 4, "zbar")
    expected = poly_to_jet({(0, 0): Fraction(1), (1, 1): Fraction(-1), (2, 2): Fraction(1)}, 1, 4)
    assert jet_reciprocal(a) == expected


def test_reciprocal_of_one():
    one = Jet.constant(2, 5, 1)
    assert jet_reciprocal(one) == one


def test_reciprocal_multiply_back():
    c = Jet.constant(1, 2, 2) + var(1, 2, "z") + var(1, 2, "zbar")
    r = jet_reciprocal(c)
    assert jet_mul(c, r) == Jet.constant(1, 2, 1)
    assert r.coefficient(MultiIndex()) == GaussRational(Fraction(1, 2))
    assert r.coefficient(MultiIndex.make([1])) == GaussRational(Fraction(-1, 4))
    assert r.coefficient(MultiIndex.make([1, 1])) == GaussRational(Fraction(1, 8))
    assert r.coefficient(MultiIndex.make([1], [1])) == GaussRational(Fraction(1, 4))


def test_reciprocal_zero_constant_rejected():
    with pytest.raises(ValueError):
        jet_reciprocal(var(1, 3, "z"))


# ------------------------------------------------------------------ builtin_potential


def test_builtin_fubini_study_matches_log_oracle():
    phi = builtin_potential("fubini-study", 1, 6)
    assert jet_to_poly(phi) == log_series_potential(-1, 1, 6)
    assert phi.coefficient(MultiIndex.make([1, 1], [1, 1])) == GaussRational(Fraction(-1, 2))


def test_builtin_flat_n2():
    phi = builtin_potential("flat", 2, 4)
    expected = Jet.monomial(2, 4, MultiIndex.make([1], [1])) + Jet.monomial(
        2, 4, MultiIndex.make([2], [2])
    )
    assert phi == expected


def test_builtin_hyperbolic_matches_log_oracle():
    phi = builtin_potential("hyperbolic", 1, 4)
    assert jet_to_poly(phi) == log_series_potential(1, 1, 4)


def test_builtin_fubini_study_n2_oracle():
    phi = builtin_potential("fubini-study", 2, 6)
    assert jet_to_poly(phi) == log_series_potential(-1, 2, 6)


def test_builtin_rejects_unknown_name_and_low_order():
    with pytest.raises(ValueError):
        builtin_potential("euclidean", 1, 4)
    with pytest.raises(ValueError):
        builtin_potential("flat", 1, 1)


# ------------------------------------------------------------------ properties


@settings(max_examples=60, deadline=None)
@given(jets(n=2, order=3), jets(n=2, order=3), jets(n=2, order=3))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b == b + a


@settings(max_examples=40, deadline=None)
@given(jets(n=2, min_order=2))
def test_mixed_partials_commute(a):
    assert a.partial_z(1).partial_zbar(2) == a.partial_zbar(2).partial_z(1)


@settings(max_examples=40, deadline=None)
@given(jets(n=1, order=4), small_scalar)
def test_reciprocal_roundtrip(a, c0):
    constant = GaussRational(c0.re + 1, c0.im)  # keep away from zero often
    a = a - Jet.constant(1, 4, a.constant_term()) + Jet.constant(1, 4, constant)
    if a.constant_term().is_zero:
        return
    assert a * a.reciprocal() == Jet.constant(1, 4, 1)


@settings(max_examples=40, deadline=None)
@given(jets(n=2, min_order=1), jets(n=2, min_order=1))
def test_leibniz_rule(a, b):
    left = (a * b).partial_z(1)
    right = a.partial_z(1) * b + a * b.partial_z(1)
    # both sides land on the common valid order min(a.order, b.order) - 1
    assert left == right


def test_equality_requires_same_order():
    a = builtin_potential("flat", 1, 4)
    b = builtin_potential("flat", 1, 5)
    assert a != b
    assert a == b.truncated(4)


def test_canonical_serialization_is_stable():
    phi = builtin_potential("fubini-study", 2, 4)
    assert phi.to_text() == "z1*zbar1 + z2*zbar2 - 1/2*z1^2*zbar1^2 - z1*z2*zbar1*zbar2 - 1/2*z2^2*zbar2^2"


def test_conjugate_involution():
    a = Jet.monomial(2, 3, MultiIndex.make([1], [2]), GaussRational(1, 2))
    assert a.conjugate().conjugate() == a
    assert a.conjugate() == Jet.monomial(2, 3, MultiIndex.make([2], [1]), GaussRational(1, -2))
