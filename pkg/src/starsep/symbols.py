"""Symbols of differential operators in normal form, and their calculus.

A Symbol is a polynomial in fiber variables with Jet coefficients.  Fiber
variables come in three families over a chart of dimension n:

    etabar^1..etabar^n   symbols of the right contravariant derivative factors,
    zetabar_1..zetabar_n symbols of the left covariant derivative factors,
    eta^1..eta^n         holomorphic fiber variables used by the total-symbol
                         tensor of the star product (inert under composition).

Terms are keyed by packed fiber exponents (zetabar, eta, etabar).  The
polynomial coefficient of a fiber monomial is the full symmetrized tensor
contraction, i.e. multiplicities are already folded in, which is why every
operator below can treat one stored term as one summand.

The operator calculus implemented here:

  * `euler_apply` / `euler_inverse` - the etabar-degree counting operator
    and its inverse on symbols vanishing at etabar = 0;
  * `q_apply` - transport along the antiholomorphic connection lift plus
    curvature corrections, the generator of left-symbol components;
  * `compose` - the terminating exponential composition formula for symbols
    of operators (eta-free);
  * `apply_symbol_operator` - reconstructs the operator from its symbol in
    normal form and applies it to a jet;
  * `left_mult_symbol` - the closed recursion F_r = (E^-1 Q) F_{r-1} + f_r
    for the symbol of a left star-multiplication operator.

All operations are pure; inputs are never mutated.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterable

from .jets import _BITS, _MASK, GaussRational, Jet, monomial_text, render_terms

if TYPE_CHECKING:  # pragma: no cover
    from .geometry import GeometryCache


# ------------------------------------------------------------------ fiber keys


def fiber_pack(indices: Iterable[int], n: int) -> int:
    key = 0
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"fiber index {i} outside 1..{n}")
        key += 1 << (_BITS * (i - 1))
    return key


def fiber_unpack(key: int, n: int) -> tuple[int, ...]:
    out = []
    for i in range(n):
        out.extend([i + 1] * ((key >> (_BITS * i)) & _MASK))
    return tuple(out)


def fiber_exp(key: int, i: int) -> int:
    """Exponent of fiber index i (1-based) in a packed key."""
    return (key >> (_BITS * (i - 1))) & _MASK


def fiber_degree(key: int, n: int) -> int:
    return sum((key >> (_BITS * i)) & _MASK for i in range(n))


def fiber_unit(i: int) -> int:
    return 1 << (_BITS * (i - 1))


TermKey = "tuple[int, int, int]"  # (zetabar, eta, etabar) packed exponents


class Symbol:
    """Fiber polynomial with Jet coefficients; immutable by convention."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        clean = {}
        for key, jet in (terms or {}).items():
            if jet.n != n:
                raise ValueError("coefficient jet on a different chart")
            if not jet.is_zero:
                clean[key] = jet
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Symbol is immutable")

    # -------------------------------------------------------------- factories

    @staticmethod
    def zero(n: int) -> "Symbol":
        return Symbol(n)

    @staticmethod
    def from_jet(jet: Jet) -> "Symbol":
        return Symbol(jet.n, {(0, 0, 0): jet})

    @staticmethod
    def monomial(
        coeff: Jet,
        eta: Iterable[int] = (),
        etabar: Iterable[int] = (),
        zetabar: Iterable[int] = (),
    ) -> "Symbol":
        n = coeff.n
        key = (fiber_pack(zetabar, n), fiber_pack(eta, n), fiber_pack(etabar, n))
        return Symbol(n, {key: coeff})

    # -------------------------------------------------------------- structure

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def eta_degree(self) -> int:
        return max((fiber_degree(e, self.n) for (_, e, _) in self.terms), default=0)

    def etabar_degree(self) -> int:
        return max((fiber_degree(b, self.n) for (_, _, b) in self.terms), default=0)

    def zetabar_degree(self) -> int:
        return max((fiber_degree(z, self.n) for (z, _, _) in self.terms), default=0)

    def has_zetabar(self) -> bool:
        return any(z for (z, _, _) in self.terms)

    def has_eta(self) -> bool:
        return any(e for (_, e, _) in self.terms)

    def coefficient(self, eta=(), etabar=(), zetabar=()) -> Jet | None:
        key = (
            fiber_pack(zetabar, self.n),
            fiber_pack(eta, self.n),
            fiber_pack(etabar, self.n),
        )
        return self.terms.get(key)

    def restrict_etabar_zero(self) -> "Symbol":
        """The part of the symbol with etabar-degree 0."""
        return Symbol(self.n, {k: j for k, j in self.terms.items() if not k[2]})

    # -------------------------------------------------------------- arithmetic

    def __add__(self, other: "Symbol") -> "Symbol":
        if self.n != other.n:
            raise ValueError("chart dimension mismatch")
        merged = dict(self.terms)
        for key, jet in other.terms.items():
            prev = merged.get(key)
            merged[key] = jet if prev is None else prev + jet
        return Symbol(self.n, merged)

    def __neg__(self) -> "Symbol":
        return Symbol(self.n, {k: -j for k, j in self.terms.items()})

    def __sub__(self, other: "Symbol") -> "Symbol":
        return self + (-other)

    def scale(self, value) -> "Symbol":
        return Symbol(self.n, {k: j.scale(value) for k, j in self.terms.items()})

    def jet_mul(self, jet: Jet) -> "Symbol":
        return Symbol(self.n, {k: j * jet for k, j in self.terms.items()})

    def pointwise_mul(self, other: "Symbol") -> "Symbol":
        """Product as fiber polynomials (not the operator composition)."""
        if self.n != other.n:
            raise ValueError("chart dimension mismatch")
        acc: dict = {}
        for (z1, e1, b1), c1 in self.terms.items():
            for (z2, e2, b2), c2 in other.terms.items():
                key = (z1 + z2, e1 + e2, b1 + b2)
                prod = c1 * c2
                prev = acc.get(key)
                acc[key] = prod if prev is None else prev + prod
        return Symbol(self.n, acc)

    def partial_etabar(self, l: int) -> "Symbol":
        """Formal d/detabar^l on the fiber monomials."""
        out = {}
        for (z, e, b), c in self.terms.items():
            exp = fiber_exp(b, l)
            if exp:
                out[(z, e, b - fiber_unit(l))] = c.scale(exp)
        return Symbol(self.n, out)

    def map_coefficients(self, fn: Callable[[Jet], Jet]) -> "Symbol":
        return Symbol(self.n, {k: fn(j) for k, j in self.terms.items()})

    def truncated(self, order: int) -> "Symbol":
        return Symbol(self.n, {k: j.truncated(order) for k, j in self.terms.items()})

    def min_jet_order(self) -> int | None:
        return min((j.order for j in self.terms.values()), default=None)

    # -------------------------------------------------------------- protocol

    def __eq__(self, other):
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return f"Symbol(n={self.n}, terms={len(self.terms)})"

    def sorted_terms(self) -> list:
        def sort_key(item):
            (z, e, b), _ = item
            nv = self.n
            degree = fiber_degree(z, nv) + fiber_degree(e, nv) + fiber_degree(b, nv)
            exps = tuple(
                fiber_exp(part, i) for part in (e, b, z) for i in range(1, nv + 1)
            )
            return (degree, tuple(-x for x in exps))

        return sorted(self.terms.items(), key=sort_key)

    def flattened(self) -> list:
        """Canonically ordered (base_key, fiber_key, coefficient) triples."""
        out = []
        for (z, e, b), jet in self.sorted_terms():
            for _, key, (re, im) in jet._sorted_items():
                coeff = GaussRational(Fraction(re, jet.den), Fraction(im, jet.den))
                out.append((key, (z, e, b), coeff))
        return out

    def to_text(self) -> str:
        parts = [
            (coeff, monomial_text(base, self.n, fiber))
            for base, fiber, coeff in self.flattened()
        ]
        return render_terms(parts)

    def __str__(self):
        return self.to_text()


class NuSeries:
    """Formal power series in nu, truncated at a fixed order, exact components."""

    __slots__ = ("order", "components")

    def __init__(self, components: Iterable, order: int | None = None):
        comps = list(components)
        if order is None:
            order = len(comps) - 1
        if len(comps) != order + 1:
            raise ValueError("component count must equal order + 1")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "components", tuple(comps))

    def __setattr__(self, name, value):
        raise AttributeError("NuSeries is immutable")

    def __getitem__(self, r: int):
        return self.components[r]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def map(self, fn: Callable) -> "NuSeries":
        return NuSeries([fn(c) for c in self.components], self.order)

    def truncated_jets(self, order: int) -> "NuSeries":
        return self.map(lambda c: c.truncated(order))

    def __add__(self, other: "NuSeries") -> "NuSeries":
        if self.order != other.order:
            raise ValueError("nu-order mismatch")
        return NuSeries(
            [a + b for a, b in zip(self.components, other.components)], self.order
        )

    def __eq__(self, other):
        if not isinstance(other, NuSeries):
            return NotImplemented
        return self.order == other.order and self.components == other.components

    __hash__ = None

    def __repr__(self):
        return f"NuSeries(order={self.order})"

    @staticmethod
    def convolve(a: "NuSeries", b: "NuSeries", mul: Callable, order: int) -> "NuSeries":
        """Cauchy product of two nu-series under the given multiplication."""
        comps = []
        for m in range(order + 1):
            acc = None
            for r in range(m + 1):
                s = m - r
                if r > a.order or s > b.order:
                    continue
                prod = mul(a[r], b[s])
                acc = prod if acc is None else acc + prod
            comps.append(acc)
        return NuSeries(comps, order)


def promote_to_series(f, order: int, zero_factory: Callable) -> NuSeries:
    """Promote a plain component into a nu-series padded with zeros."""
    if isinstance(f, NuSeries):
        if f.order >= order:
            return NuSeries(f.components[: order + 1], order)
        pad = [zero_factory() for _ in range(order - f.order)]
        return NuSeries(list(f.components) + pad, order)
    return NuSeries([f] + [zero_factory() for _ in range(order)], order)


# ------------------------------------------------------------------ Euler ops


def euler_apply(F: Symbol) -> Symbol:
    """E = etabar^l d/detabar^l: scales each term by its etabar-degree."""
    n = F.n
    return Symbol(
        n, {k: jet.scale(fiber_degree(k[2], n)) for k, jet in F.terms.items()}
    )


def euler_inverse(F: Symbol) -> Symbol:
    """Inverse of E on symbols vanishing at etabar = 0."""
    n = F.n
    out = {}
    for key, jet in F.terms.items():
        d = fiber_degree(key[2], n)
        if d == 0:
            raise ValueError("symbol not in the image of E")
        out[key] = jet.scale(Fraction(1, d))
    return Symbol(n, out)


# ------------------------------------------------------------------ Q operator


def _bounded_vectors(bound: tuple[int, ...], size: int):
    """All exponent vectors 0 <= v <= bound componentwise with sum(v) == size."""

    def rec(i: int, remaining: int, prefix: tuple):
        if i == len(bound):
            if remaining == 0:
                yield prefix
            return
        for take in range(min(bound[i], remaining) + 1):
            yield from rec(i + 1, remaining - take, prefix + (take,))

    yield from rec(0, size, ())


def q_apply(G: "GeometryCache", F: Symbol) -> Symbol:
    """Transport along the connection lift plus curvature corrections.

    Raises the etabar-degree of a term by at most one (the rank-r curvature
    correction changes it by 2 - r), and every output term has etabar-degree
    at least one, so E^-1 applies to the result.  The curvature sum
    terminates at the etabar-degree of F.
    """
    if F.has_zetabar():
        raise ValueError("Q is defined on symbols without zetabar part")
    n = F.n
    total = G.nabla_bar(F)
    acc: dict = {}

    def add(key, jet):
        if jet.is_zero:
            return
        prev = acc.get(key)
        acc[key] = jet if prev is None else prev + jet

    for (z, e, b), c in F.terms.items():
        bexp = tuple(fiber_exp(b, i) for i in range(1, n + 1))
        for r in range(2, sum(bexp) + 1):
            for vec in _bounded_vectors(bexp, r):
                factor = math.prod(math.comb(bexp[i], vec[i]) for i in range(n))
                uppers = tuple(i + 1 for i in range(n) for _ in range(vec[i]))
                removed = sum(vec[i] * fiber_unit(i + 1) for i in range(n))
                scaled = c.scale(factor)
                for l in range(1, n + 1):
                    for q in range(1, n + 1):
                        add(
                            (z, e, b - removed + fiber_unit(l) + fiber_unit(q)),
                            scaled * G.curvature_upper(r, l, q, uppers),
                        )
    return total + Symbol(n, acc)


# ------------------------------------------------------------------ composition


def compose(G: "GeometryCache", F: Symbol, H: Symbol) -> Symbol:
    """Operator composition of symbols via the terminating exponential formula."""
    if F.n != H.n:
        raise ValueError("chart dimension mismatch")
    if F.has_eta() or H.has_eta():
        raise ValueError("composition is defined for operator symbols (no eta part)")
    n = F.n
    acc: dict = {}

    def add(key, jet):
        if jet.is_zero:
            return
        prev = acc.get(key)
        acc[key] = jet if prev is None else prev + jet

    # chains of derivatives on the coefficients, shared across term pairs
    right_chains: dict = {}
    left_chains: dict = {}

    def dbar_upper_chain(h_key, cH, avec):
        memo_key = (h_key, avec)
        cached = right_chains.get(memo_key)
        if cached is None:
            if sum(avec) == 0:
                cached = cH
            else:
                i = next(j for j in range(n) if avec[j])
                prev = dbar_upper_chain(
                    h_key, cH, avec[:i] + (avec[i] - 1,) + avec[i + 1 :]
                )
                cached = G.dbar_upper(prev, i + 1)
            right_chains[memo_key] = cached
        return cached

    def dbar_lower_chain(f_key, cF, bvec):
        memo_key = (f_key, bvec)
        cached = left_chains.get(memo_key)
        if cached is None:
            if sum(bvec) == 0:
                cached = cF
            else:
                i = next(j for j in range(n) if bvec[j])
                prev = dbar_lower_chain(
                    f_key, cF, bvec[:i] + (bvec[i] - 1,) + bvec[i + 1 :]
                )
                cached = G.dbar_lower(prev, i + 1)
            left_chains[memo_key] = cached
        return cached

    for (zF, _, bF), cF in F.terms.items():
        bF_exp = tuple(fiber_exp(bF, i) for i in range(1, n + 1))
        for (zH, _, bH), cH in H.terms.items():
            zH_exp = tuple(fiber_exp(zH, i) for i in range(1, n + 1))
            for a in range(sum(bF_exp) + 1):
                for avec in _bounded_vectors(bF_exp, a):
                    fa = math.prod(math.comb(bF_exp[i], avec[i]) for i in range(n))
                    right = dbar_upper_chain((zH, bH), cH, avec)
                    removed_b = sum(avec[i] * fiber_unit(i + 1) for i in range(n))
                    for bsz in range(sum(zH_exp) + 1):
                        for bvec in _bounded_vectors(zH_exp, bsz):
                            fb = math.prod(
                                math.comb(zH_exp[i], bvec[i]) for i in range(n)
                            )
                            sign = -1 if bsz % 2 else 1
                            left = dbar_lower_chain((zF, bF), cF, bvec)
                            removed_z = sum(bvec[i] * fiber_unit(i + 1) for i in range(n))
                            key = (
                                zF + zH - removed_z,
                                0,
                                bF - removed_b + bH,
                            )
                            add(key, (left * right).scale(sign * fa * fb))
    return Symbol(n, acc)


# ------------------------------------------------------------------ application


def apply_symbol_operator(
    G: "GeometryCache", F: Symbol, g: Jet, out_order: int | None = None
) -> Jet:
    """Reconstruct the operator from its symbol in normal form and apply to g.

    zetabar factors act as left covariant derivatives after multiplication;
    etabar factors act as right contravariant derivatives on g first.  The
    right chains are shared between terms, and with `out_order` given they
    are truncated to out_order + (remaining chain depth), which cannot
    change any coefficient of the result up to out_order.
    """
    if F.has_eta():
        raise ValueError("operator symbols may not contain eta variables")
    if F.n != g.n:
        raise ValueError("chart dimension mismatch")
    max_depth = F.etabar_degree()
    base = g if out_order is None else g.truncated(min(g.order, out_order + max_depth))
    chains: dict[tuple[int, ...], Jet] = {(): base}

    def chain(multiset: tuple[int, ...]) -> Jet:
        cached = chains.get(multiset)
        if cached is not None:
            return cached
        jet = G.dbar_upper(chain(multiset[:-1]), multiset[-1])
        if out_order is not None:
            jet = jet.truncated(min(jet.order, out_order + max_depth - len(multiset)))
        chains[multiset] = jet
        return jet

    total = None
    for (z, _, b), c in F.terms.items():
        tmp = c * chain(fiber_unpack(b, F.n))
        for l in fiber_unpack(z, F.n):
            tmp = G.dbar_lower(tmp, l)
        total = tmp if total is None else total + tmp
    if total is None:
        return Jet.zero(g.n, g.order)
    if out_order is not None:
        total = total.truncated(min(total.order, out_order))
    return total


# ------------------------------------------------------------------ Theorem-1 recursion


def left_mult_symbol(
    G: "GeometryCache", f, N: int, out_order: int | None = None
) -> NuSeries:
    """Symbol of the left star-multiplication operator, component by component.

    Component r is E^-1 Q applied to component r-1 plus the r-th component of
    the input series; its etabar-degree never exceeds r.  When `out_order` is
    given, component r is truncated to out_order + (N - r), which is exactly
    the validity still needed by the remaining transport steps.
    """
    if N < 0:
        raise ValueError("nu order must be >= 0")
    n = G.n
    series = promote_to_series(f, N, lambda: Jet.zero(n, G.phi.order))
    comps: list[Symbol] = []
    prev: Symbol | None = None
    for r in range(N + 1):
        fr = series[r]
        current = Symbol.from_jet(fr) if isinstance(fr, Jet) else fr
        if prev is not None:
            current = current + euler_inverse(q_apply(G, prev))
        if out_order is not None:
            current = current.truncated(out_order + (N - r))
        assert current.etabar_degree() <= r, "etabar-degree bound violated"
        comps.append(current)
        prev = current
    return NuSeries(comps, N)
