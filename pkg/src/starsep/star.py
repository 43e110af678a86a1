"""User-facing products: f*g in powers of nu, and the invariant tensor T.

`star` evaluates the left-multiplication symbol recursion and applies it in
normal form; `tensor_T` runs the invariant recursion
T_{r+1} = E^-1((Q + gamma) T_r) starting from 1; `closed_form_T_reference`
assembles the explicit nu^4 expansion from the canonical curvature
polynomials and serves as a golden cross-check; `star_via_T` contracts T
against contravariant derivative chains of the two factors; `wick_star` is
the independent flat-space oracle computed directly from partial
derivatives, sharing no code with the symbol machinery.

Truncation policy: when `out_order` is given, intermediate nu-components
are truncated to out_order + (remaining transport steps), which preserves
every reported coefficient while keeping intermediate jets small.  With
out_order=None all validity bookkeeping is the honest one inherited from
the potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .geometry import GeometryCache
from .jets import Jet
from .symbols import (
    NuSeries,
    Symbol,
    apply_symbol_operator,
    euler_inverse,
    left_mult_symbol,
    promote_to_series,
    q_apply,
)


@dataclass(frozen=True)
class StarResult:
    """A star product expansion: component r is the jet coefficient of nu^r."""

    series: NuSeries
    meta: dict = field(default_factory=dict)

    def __getitem__(self, r: int) -> Jet:
        return self.series[r]


@dataclass(frozen=True)
class TensorT:
    """The invariant total symbol of the star product's bidifferential series."""

    series: NuSeries

    def __getitem__(self, r: int) -> Symbol:
        return self.series[r]

    def truncated(self, order: int) -> "TensorT":
        return TensorT(self.series.map(lambda s: s.truncated(order)))


def star(
    G: GeometryCache,
    f,
    g,
    N: int,
    out_order: int | None = None,
    meta: dict | None = None,
) -> StarResult:
    """f * g through nu^N; f and g may be jets or nu-series of jets."""
    n = G.n
    F = left_mult_symbol(G, f, N, out_order=out_order)
    g_series = promote_to_series(g, N, lambda: Jet.zero(n, G.phi.order))
    comps = []
    for m in range(N + 1):
        acc = None
        for b in range(m + 1):
            gb = g_series[b]
            if gb.is_zero and acc is not None:
                continue
            piece = apply_symbol_operator(G, F[m - b], gb, out_order=out_order)
            acc = piece if acc is None else acc + piece
        if out_order is not None:
            acc = acc.truncated(out_order)
        comps.append(acc)
    result_meta = {"n": n, "nu_order": N, "phi_order": G.phi.order, "base_point": "origin"}
    result_meta.update(meta or {})
    return StarResult(NuSeries(comps, N), result_meta)


def wick_star(f: Jet, g: Jet, N: int) -> StarResult:
    """Flat-space oracle: sum_r nu^r/r! (dbar^r f)(d^r g), contracted diagonally.

    Implemented directly from partial derivatives; deliberately independent
    of the symbol calculus so it can serve as an oracle for it.
    """
    if f.n != g.n:
        raise ValueError("chart dimension mismatch")
    n = f.n
    comps = [f * g]
    for r in range(1, N + 1):
        acc = None
        for multiset in combinations_with_replacement(range(1, n + 1), r):
            counts: dict[int, int] = {}
            for i in multiset:
                counts[i] = counts.get(i, 0) + 1
            weight = Fraction(1, math.prod(math.factorial(c) for c in counts.values()))
            df, dg = f, g
            for l in multiset:
                df = df.partial_zbar(l)
                dg = dg.partial_z(l)
            piece = (df * dg).scale(weight)
            acc = piece if acc is None else acc + piece
        comps.append(acc)
    return StarResult(NuSeries(comps, N), {"n": n, "nu_order": N, "oracle": "wick"})


def tensor_T(G: GeometryCache, N: int, out_order: int | None = None) -> TensorT:
    """Invariant total symbol through nu^N via T_r = (E^-1 (Q + gamma))^r 1."""
    n = G.n
    gamma = G.gamma()
    comps = [Symbol.from_jet(Jet.constant(n, G.phi.order, 1))]
    for r in range(1, N + 1):
        prev = comps[-1]
        nxt = euler_inverse(q_apply(G, prev) + gamma.pointwise_mul(prev))
        if out_order is not None:
            nxt = nxt.truncated(out_order + (N - r))
        assert nxt.eta_degree() <= r and nxt.etabar_degree() <= r, "fiber degree bound"
        comps.append(nxt)
    if out_order is not None:
        comps = [c.truncated(out_order) for c in comps]
    return TensorT(NuSeries(comps, N))


def closed_form_T_reference(G: GeometryCache, out_order: int | None = None) -> TensorT:
    """The explicit nu^4 expansion of T assembled from canonical tensors."""
    gamma = G.gamma()
    gamma2 = gamma.pointwise_mul(gamma)
    gamma3 = gamma2.pointwise_mul(gamma)
    gamma4 = gamma3.pointwise_mul(gamma)
    rho22 = G.rho(2, 2)
    rho23 = G.rho(2, 3)
    rho32 = G.rho(3, 2)
    rho_t = G.rho_tilde()
    one = Symbol.from_jet(Jet.constant(G.n, G.phi.order, 1))
    comps = [
        one,
        gamma,
        gamma2.scale(Fraction(1, 2)),
        gamma3.scale(Fraction(1, 6)) + rho22.scale(Fraction(1, 4)),
        gamma4.scale(Fraction(1, 24))
        + gamma.pointwise_mul(rho22).scale(Fraction(1, 4))
        + rho23.scale(Fraction(1, 12))
        + rho32.scale(Fraction(1, 12))
        + rho_t.scale(Fraction(1, 8)),
    ]
    if out_order is not None:
        comps = [c.truncated(out_order) for c in comps]
    return TensorT(NuSeries(comps, 4))


def star_via_T(
    G: GeometryCache,
    T: TensorT,
    u: Jet,
    v: Jet,
    N: int,
    out_order: int | None = None,
) -> StarResult:
    """Evaluate u * v by contracting T against D- and Dbar-chains of u and v."""
    if T.series.order < N:
        raise ValueError("tensor T not computed to the requested nu order")
    from .symbols import fiber_unpack

    n = G.n
    max_depth = max(
        (T[r].eta_degree() for r in range(N + 1)),
        default=0,
    )
    if out_order is not None:
        u = u.truncated(min(u.order, out_order + max_depth))
        v = v.truncated(min(v.order, out_order + max_depth))
    u_chains: dict[tuple[int, ...], Jet] = {(): u}
    v_chains: dict[tuple[int, ...], Jet] = {(): v}

    def chain(cache: dict, base_kind: str, multiset: tuple[int, ...]) -> Jet:
        if multiset in cache:
            return cache[multiset]
        prev = chain(cache, base_kind, multiset[:-1])
        if base_kind == "holo":
            jet = G.d_upper(prev, multiset[-1])
        else:
            jet = G.dbar_upper(prev, multiset[-1])
        if out_order is not None:
            jet = jet.truncated(min(jet.order, out_order + max_depth - len(multiset)))
        cache[multiset] = jet
        return jet

    comps = []
    for r in range(N + 1):
        acc = None
        for (z, e, b), coeff in T[r].terms.items():
            if z:
                raise ValueError("tensor T may not contain zetabar variables")
            du = chain(u_chains, "holo", fiber_unpack(e, n))
            dv = chain(v_chains, "antiholo", fiber_unpack(b, n))
            piece = coeff * du * dv
            acc = piece if acc is None else acc + piece
        if acc is None:
            acc = Jet.zero(n, min(u.order, v.order))
        if out_order is not None:
            acc = acc.truncated(out_order)
        comps.append(acc)
    return StarResult(
        NuSeries(comps, N),
        {"n": n, "nu_order": N, "phi_order": G.phi.order, "via": "tensor_T"},
    )
