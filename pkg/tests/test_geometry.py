"""Metric, connection, curvature and canonical tensors from a potential."""

from __future__ import annotations

from fractions import Fraction

import pytest

from starsep.geometry import GeometryCache
from starsep.jets import GaussRational, Jet, MultiIndex, builtin_potential
from starsep.symbols import Symbol
from starsep.verify import jets_match, random_potential_cache

from conftest import log_series_potential, poly_diff, poly_to_jet


@pytest.fixture(scope="module")
def fs1():
    return GeometryCache(builtin_potential("fubini-study", 1, 12))


@pytest.fixture(scope="module")
def hyp1():
    return GeometryCache(builtin_potential("hyperbolic", 1, 12))


@pytest.fixture(scope="module")
def flat1():
    return GeometryCache(builtin_potential("flat", 1, 10))


@pytest.fixture(scope="module")
def flat2():
    return GeometryCache(builtin_potential("flat", 2, 8))


# ------------------------------------------------------------------ potential_derivative


def test_potential_derivative_flat(flat1):
    g = flat1.potential_derivative(MultiIndex.make([1], [1]))
    assert g == Jet.constant(1, 8, 1)


def test_potential_derivative_fourth_fs_constant(fs1):
    # independent oracle: 4 * (coefficient of z^2 zbar^2 in the log series)
    oracle = log_series_potential(-1, 1, 12)
    expected = oracle[(2, 2)] * 4
    got = fs1.potential_derivative(MultiIndex.make([1, 1], [1, 1])).constant_term()
    assert got == GaussRational(expected) == GaussRational(-2)


def test_potential_derivative_pure_flat_vanishes(flat2):
    assert flat2.potential_derivative(MultiIndex.make([1, 1])).is_zero
    assert flat2.potential_derivative(MultiIndex.make([], [1, 2])).is_zero


def test_potential_derivative_order_exhaustion(flat1):
    with pytest.raises(ValueError):
        flat1.potential_derivative(MultiIndex.make([1] * 11))


# ------------------------------------------------------------------ invert_metric


def test_invert_metric_flat_identity(flat2):
    grid = flat2.invert_metric()
    for l in range(2):
        for k in range(2):
            expected = Jet.constant(2, 6, 1 if l == k else 0)
            assert grid[l][k] == expected


def test_invert_metric_fs(fs1):
    # (1 + z zbar)^2, checked by multiplying back against g
    expected = poly_to_jet(
        {(0, 0): Fraction(1), (1, 1): Fraction(2), (2, 2): Fraction(1)}, 1, 4
    )
    assert fs1.g_up(1, 1).truncated(4) == expected
    product = fs1.g_low(1, 1) * fs1.g_up(1, 1)
    assert product == Jet.constant(1, product.order, 1)


def test_invert_metric_hyperbolic(hyp1):
    expected = poly_to_jet({(0, 0): Fraction(1), (1, 1): Fraction(-2)}, 1, 2)
    assert hyp1.g_up(1, 1).truncated(2) == expected
    product = hyp1.g_low(1, 1) * hyp1.g_up(1, 1)
    assert product == Jet.constant(1, product.order, 1)


def test_degenerate_metric_rejected():
    # potential with identically zero mixed Hessian at the origin
    phi = Jet.monomial(1, 4, MultiIndex.make([1, 1], [1, 1]))
    with pytest.raises(ValueError, match="degenerate"):
        GeometryCache(phi)


# ------------------------------------------------------------------ contravariant_apply


def test_contravariant_flat(flat1):
    z2 = Jet.monomial(1, 6, MultiIndex.make([1, 1]))
    assert flat1.contravariant_apply(z2, 1, "antiholo") == Jet.monomial(
        1, 5, MultiIndex.make([1]), 2
    )
    zb2 = Jet.monomial(1, 6, MultiIndex.make([], [1, 1]))
    assert flat1.contravariant_apply(zb2, 1, "holo") == Jet.monomial(
        1, 5, MultiIndex.make([], [1]), 2
    )


def test_contravariant_fs_antiholomorphic_of_zbar(fs1):
    zb = Jet.monomial(1, 6, MultiIndex.make([], [1]))
    assert fs1.contravariant_apply(zb, 1, "antiholo").is_zero


# ------------------------------------------------------------------ christoffel


def test_christoffel_flat_vanishes(flat2):
    for t in (1, 2):
        for l in (1, 2):
            for q in (1, 2):
                assert flat2.christoffel_bar(t, l, q).is_zero


def test_christoffel_fs_series(fs1):
    # oracle: -2z/(1+z zbar) expanded independently
    series = {(m + 1, m): Fraction(-2 * (-1) ** m) for m in range(3)}
    expected = poly_to_jet(series, 1, 6)
    assert fs1.christoffel_bar(1, 1, 1).truncated(6) == expected


def test_christoffel_hyperbolic_constant_term(hyp1):
    assert hyp1.christoffel_bar(1, 1, 1).constant_term().is_zero


# ------------------------------------------------------------------ curvature


def test_curvature_flat_zero(flat2):
    assert flat2.curvature_low(1, 2, 1, 2).is_zero
    assert flat2.curvature_upper(2, 1, 1, (1, 2)).is_zero
    assert flat2.curvature_upper(3, 2, 1, (1, 1, 2)).is_zero


def test_curvature_spot_values(fs1, hyp1):
    assert fs1.curvature_low(1, 1, 1, 1).constant_term() == GaussRational(2)
    assert hyp1.curvature_low(1, 1, 1, 1).constant_term() == GaussRational(-2)


def test_curvature_upper_constants(fs1):
    assert fs1.curvature_upper(2, 1, 1, (1, 1)).constant_term() == GaussRational(2)
    assert fs1.curvature_upper(3, 1, 1, (1, 1, 1)).constant_term().is_zero


def test_curvature_upper_requires_rank_two(fs1):
    with pytest.raises(ValueError):
        fs1.curvature_upper(1, 1, 1, (1,))


# ------------------------------------------------------------------ rho symbols


def test_rho_flat_all_zero(flat2):
    assert flat2.rho(2, 2).is_zero
    assert flat2.rho_tilde().is_zero
    gamma = flat2.gamma()
    expect = Symbol.monomial(Jet.constant(2, 6, 1), eta=[1], etabar=[1]) + Symbol.monomial(
        Jet.constant(2, 6, 1), eta=[2], etabar=[2]
    )
    assert gamma == expect


def test_rho22_fs_constant(fs1):
    rho = fs1.rho(2, 2)
    coeff = rho.coefficient(eta=(1, 1), etabar=(1, 1))
    assert coeff.constant_term() == GaussRational(2)


def test_rho_tilde_fs_constant(fs1):
    coeff = fs1.rho_tilde().coefficient(eta=(1, 1), etabar=(1, 1))
    assert coeff.constant_term() == GaussRational(4)


def test_rho_rejects_unsupported_shapes(fs1):
    with pytest.raises(ValueError):
        fs1.rho(1, 2)
    with pytest.raises(ValueError):
        fs1.rho(3, 3)


def test_rho_22_paths_agree(fs1):
    # r-path lowering equals the direct curvature tensor contraction
    direct = Symbol.zero(1)
    direct = direct + Symbol.monomial(
        fs1.curvature_low(1, 1, 1, 1), eta=[1, 1], etabar=[1, 1]
    )
    assert not _symbol_diff(fs1.rho(2, 2), direct)


def _symbol_diff(a, b):
    from starsep.verify import symbols_match

    return symbols_match(a, b)


# ------------------------------------------------------------------ symmetrized covariant derivative


def test_symmetrized_derivative_scalar(flat1):
    f = Jet.monomial(1, 6, MultiIndex.make([], [1, 1]))
    out = flat1.symmetrized_covariant_derivative(Symbol.from_jet(f), "antiholo")
    expected = Symbol.monomial(f.partial_zbar(1), etabar=[1])
    assert out == expected


def test_symmetrized_derivative_constant_is_zero(flat1):
    one = Symbol.from_jet(Jet.constant(1, 6, 1))
    assert flat1.symmetrized_covariant_derivative(one, "antiholo").is_zero


def test_rho23_matches_symmetrized_derivative_constant(fs1):
    nabla = fs1.symmetrized_covariant_derivative(fs1.rho(2, 2), "antiholo")
    direct = fs1.rho(2, 3)
    coeff_a = nabla.coefficient(eta=(1, 1), etabar=(1, 1, 1))
    coeff_b = direct.coefficient(eta=(1, 1), etabar=(1, 1, 1))
    const_a = coeff_a.constant_term() if coeff_a else GaussRational(0)
    const_b = coeff_b.constant_term() if coeff_b else GaussRational(0)
    assert const_a == const_b


# ------------------------------------------------------------------ identities on random potentials


@pytest.mark.parametrize("seed", [1, 2])
def test_jacobi_and_rules_on_random_potential(seed):
    from starsep.verify import verify_algebraic_identities

    G = random_potential_cache(seed, 2, 10, work_order=6)
    report = verify_algebraic_identities(G, seed)
    assert report.passed, [c for c in report.checks if not c.passed]


def test_work_order_does_not_change_reported_tensors():
    honest = random_potential_cache(5, 1, 12)
    capped = random_potential_cache(5, 1, 12, work_order=6)
    assert not jets_match(
        honest.christoffel_bar(1, 1, 1), capped.christoffel_bar(1, 1, 1)
    )
    assert not jets_match(
        honest.curvature_upper(2, 1, 1, (1, 1)), capped.curvature_upper(2, 1, 1, (1, 1))
    )
