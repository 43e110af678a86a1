"""Shared fixtures and tiny independent oracles.

The oracle helpers below implement truncated polynomial arithmetic from
scratch on plain dicts {exponent tuple: Fraction}, deliberately sharing no
code with the package, so expected values in tests are computed by an
independent route.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from starsep.jets import Jet, MultiIndex


# ------------------------------------------------------------------ oracles

Poly = "dict[tuple[int, ...], Fraction]"


def poly_mul(a, b, max_deg):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) > max_deg:
                continue
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def poly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, Fraction(0)) + c
    return {e: c for e, c in out.items() if c != 0}


def poly_scale(a, s):
    s = Fraction(s)
    return {e: c * s for e, c in a.items() if c * s != 0}


def poly_diff(a, var):
    out = {}
    for e, c in a.items():
        if e[var]:
            e2 = list(e)
            e2[var] -= 1
            out[tuple(e2)] = c * e[var]
    return out


def log_series_potential(sign: int, n: int, order: int):
    """Oracle for log(1 + sign*u)/sign with u = sum z^k zbar^k, truncated."""
    u = {}
    for k in range(n):
        e = [0] * (2 * n)
        e[k] = 1
        e[n + k] = 1
        u[tuple(e)] = Fraction(1)
    total = {}
    power = {tuple([0] * (2 * n)): Fraction(1)}
    for m in range(1, order // 2 + 1):
        power = poly_mul(power, u, order)
        total = poly_add(total, poly_scale(power, Fraction(sign ** (m + 1), m)))
    return total


def jet_to_poly(jet: Jet):
    """Convert a real jet into the oracle dict representation."""
    out = {}
    for idx, coeff in jet.coefficients().items():
        assert coeff.im == 0, "oracle helpers are real-only"
        e = [0] * (2 * jet.n)
        for k in idx.holo:
            e[k - 1] += 1
        for l in idx.antiholo:
            e[jet.n + l - 1] += 1
        out[tuple(e)] = coeff.re
    return out


def poly_to_jet(p, n: int, order: int) -> Jet:
    coeffs = {}
    for e, c in p.items():
        holo = [k + 1 for k in range(n) for _ in range(e[k])]
        anti = [l + 1 for l in range(n) for _ in range(e[n + l])]
        coeffs[MultiIndex.make(holo, anti)] = c
    return Jet.from_coefficients(n, order, coeffs)


# ------------------------------------------------------------------ fixtures


@pytest.fixture(scope="session")
def geometry_cache():
    """Factory for geometry caches shared across test modules."""
    from starsep.geometry import GeometryCache
    from starsep.jets import builtin_potential

    built: dict = {}

    def build(name: str, n: int, phi_order: int, work_order=None) -> "GeometryCache":
        key = (name, n, phi_order, work_order)
        if key not in built:
            phi = builtin_potential(name, n, phi_order)
            built[key] = GeometryCache(
                phi, work_order=work_order, phi_source=lambda o, name=name, n=n: builtin_potential(name, n, o)
            )
        return built[key]

    return build
