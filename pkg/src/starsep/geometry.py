"""Metric, connection and curvature data derived from a potential jet.

Index conventions (all 1-based, chart dimension n):

    g_low(k, l)            g_{k lbar}      = d2 Phi / dz^k dzbar^l
    g_up(l, k)             g^{lbar k}      with  sum_l g_low(k,l) g_up(l,m) = delta_k^m
    dbar_upper(f, l)       Dbar^l f        = g^{lbar k} df/dz^k
    d_upper(f, k)          D^k f           = g^{lbar k} df/dzbar^l
    dbar_lower(f, l)       Dbar_l f        = df/dzbar^l - Phi_{lbar qbar} Dbar^q f
    christoffel_bar(t,l,q) Gamma^tbar_{lbar qbar} = g^{tbar s} g_{s lbar qbar}
    curvature_low(k,p,l,q) R_{k p lbar qbar}
    curvature_upper(r,l,q,uppers)  R^{lbar_1..lbar_r}_{lbar qbar}
                                   = -Dbar^{l_1}..Dbar^{l_r} Phi_{lbar qbar}

Everything is cached after first computation; a cache is immutable once
built for a given potential order and safe to share between readers.

The optional `work_order` caps the validity of derived tensors: callers
that only report coefficients up to some order M at nu-order N never need
tensors beyond M + N, and capping them there keeps intermediate jets small.
Chain levels keep `chain_margin` extra orders so deeper contravariant
derivatives still land on the cap.  The default (None) keeps the honest
orders implied by the potential.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Callable

from .jets import GaussRational, Jet, MultiIndex
from .symbols import Symbol, fiber_exp, fiber_unit


def _invert_constant_matrix(m: list[list[GaussRational]]) -> list[list[GaussRational]]:
    """Exact Gauss-Jordan inverse; raises on a singular matrix."""
    n = len(m)
    aug = [
        [m[i][j] for j in range(n)]
        + [GaussRational(1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        pivot_row = next(
            (r for r in range(col, n) if not aug[r][col].is_zero), None
        )
        if pivot_row is None:
            raise ValueError("degenerate metric at base point")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv = GaussRational(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def multiset_permutations_count(multiset: tuple[int, ...]) -> int:
    counts: dict[int, int] = {}
    for x in multiset:
        counts[x] = counts.get(x, 0) + 1
    return math.factorial(len(multiset)) // math.prod(
        math.factorial(c) for c in counts.values()
    )


class GeometryCache:
    """Derived tensors of a potential, computed lazily and cached."""

    def __init__(
        self,
        phi: Jet,
        work_order: int | None = None,
        chain_margin: int = 4,
        phi_source: Callable[[int], Jet] | None = None,
    ):
        if phi.order < 2:
            raise ValueError("potential must be a jet of order >= 2")
        self.phi = phi
        self.n = phi.n
        self.work_order = work_order
        self.chain_margin = chain_margin
        self.phi_source = phi_source
        self._derivs: dict[MultiIndex, Jet] = {MultiIndex(): phi}
        self._g_up: tuple[tuple[Jet, ...], ...] | None = None
        self._christoffel_bar: dict = {}
        self._christoffel_holo: dict = {}
        self._curv_low: dict = {}
        self._chains: dict = {}
        self._rho: dict = {}
        self._gamma: Symbol | None = None
        self._rho_tilde: Symbol | None = None
        # nondegeneracy at the base point, checked eagerly
        self._g0_inv = _invert_constant_matrix(
            [
                [self.g_low(k, l).constant_term() for l in range(1, self.n + 1)]
                for k in range(1, self.n + 1)
            ]
        )

    # ---------------------------------------------------------------- helpers

    def _cap(self, jet: Jet, extra: int = 0) -> Jet:
        if self.work_order is None:
            return jet
        return jet.truncated(min(jet.order, self.work_order + extra))

    def sibling(self, phi_order: int) -> "GeometryCache":
        """A cache for the same potential re-expanded to another order."""
        if self.phi_source is not None:
            phi = self.phi_source(phi_order)
        elif self.phi.degree() <= min(phi_order, self.phi.order):
            # an exact polynomial can be padded without new information
            phi = Jet(self.phi.n, phi_order, self.phi.den, self.phi.groups)
        else:
            raise ValueError("cannot re-expand potential: no source available")
        return GeometryCache(
            phi, self.work_order, self.chain_margin, self.phi_source
        )

    # ---------------------------------------------------------------- potential derivatives

    def potential_derivative(self, idx: MultiIndex) -> Jet:
        """Mixed partial of the potential by a multi-index, cached."""
        if idx.degree > self.phi.order:
            raise ValueError(
                f"derivative order {idx.degree} exceeds potential order {self.phi.order}"
            )
        cached = self._derivs.get(idx)
        if cached is not None:
            return cached
        if idx.antiholo:
            parent = MultiIndex(idx.holo, idx.antiholo[:-1])
            jet = self.potential_derivative(parent).partial_zbar(idx.antiholo[-1])
        else:
            parent = MultiIndex(idx.holo[:-1], ())
            jet = self.potential_derivative(parent).partial_z(idx.holo[-1])
        self._derivs[idx] = jet
        return jet

    def g_low(self, k: int, l: int) -> Jet:
        return self.potential_derivative(MultiIndex.make([k], [l]))

    # ---------------------------------------------------------------- inverse metric

    def invert_metric(self) -> tuple[tuple[Jet, ...], ...]:
        """Grid g^{lbar k}, exact constant inverse plus Neumann-series correction."""
        if self._g_up is not None:
            return self._g_up
        n = self.n
        order = self.phi.order - 2
        b0 = [
            [Jet.constant(n, order, self._g0_inv[i][j]) for j in range(n)]
            for i in range(n)
        ]
        glow = [[self.g_low(k + 1, l + 1) for l in range(n)] for k in range(n)]

        def mat_mul(a, b):
            return [
                [
                    sum((a[i][t] * b[t][j] for t in range(n)), Jet.zero(n, order))
                    for j in range(n)
                ]
                for i in range(n)
            ]

        identity = [
            [Jet.constant(n, order, 1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        # defect E = I - B0 * g_low has no constant term, so its powers vanish
        b0g = mat_mul(b0, glow)
        defect = [
            [identity[i][j] - b0g[i][j] for j in range(n)] for i in range(n)
        ]
        series = [row[:] for row in identity]
        power = defect
        while any(not power[i][j].is_zero for i in range(n) for j in range(n)):
            series = [
                [series[i][j] + power[i][j] for j in range(n)] for i in range(n)
            ]
            power = mat_mul(power, defect)
        inverse = mat_mul(series, b0)
        cap_extra = self.chain_margin
        self._g_up = tuple(
            tuple(self._cap(inverse[l][k], cap_extra) for k in range(n))
            for l in range(n)
        )
        return self._g_up

    def g_up(self, l: int, k: int) -> Jet:
        return self.invert_metric()[l - 1][k - 1]

    # ---------------------------------------------------------------- first-order operators

    def dbar_upper(self, f: Jet, l: int) -> Jet:
        """Dbar^l f = g^{lbar k} df/dz^k."""
        total = None
        for k in range(1, self.n + 1):
            piece = self.g_up(l, k) * f.partial_z(k)
            total = piece if total is None else total + piece
        return total

    def d_upper(self, f: Jet, k: int) -> Jet:
        """D^k f = g^{lbar k} df/dzbar^l."""
        total = None
        for l in range(1, self.n + 1):
            piece = self.g_up(l, k) * f.partial_zbar(l)
            total = piece if total is None else total + piece
        return total

    def dbar_lower(self, f: Jet, l: int) -> Jet:
        """Dbar_l f = df/dzbar^l - Phi_{lbar qbar} Dbar^q f."""
        total = f.partial_zbar(l)
        for q in range(1, self.n + 1):
            phi_lq = self.potential_derivative(MultiIndex.make([], [l, q]))
            total = total - phi_lq * self.dbar_upper(f, q)
        return total

    def contravariant_apply(self, f: Jet, index: int, orientation: str) -> Jet:
        if orientation == "antiholo":
            return self.dbar_upper(f, index)
        if orientation == "holo":
            return self.d_upper(f, index)
        raise ValueError(f"unknown orientation {orientation!r}")

    def dbar_upper_chain(self, f: Jet, uppers) -> Jet:
        for l in uppers:
            f = self.dbar_upper(f, l)
        return f

    def d_upper_chain(self, f: Jet, uppers) -> Jet:
        for k in uppers:
            f = self.d_upper(f, k)
        return f

    # ---------------------------------------------------------------- connection

    def christoffel_bar(self, t: int, l: int, q: int) -> Jet:
        """Gamma^tbar_{lbar qbar} = g^{tbar s} g_{s lbar qbar}, symmetric in (l, q)."""
        key = (t,) + tuple(sorted((l, q)))
        cached = self._christoffel_bar.get(key)
        if cached is None:
            total = None
            for s in range(1, self.n + 1):
                piece = self.g_up(t, s) * self.potential_derivative(
                    MultiIndex.make([s], [l, q])
                )
                total = piece if total is None else total + piece
            cached = self._cap(total)
            self._christoffel_bar[key] = cached
        return cached

    def christoffel_holo(self, t: int, k: int, p: int) -> Jet:
        """Gamma^t_{k p} = g^{lbar t} g_{k p lbar}, the holomorphic mirror."""
        key = (t,) + tuple(sorted((k, p)))
        cached = self._christoffel_holo.get(key)
        if cached is None:
            total = None
            for l in range(1, self.n + 1):
                piece = self.g_up(l, t) * self.potential_derivative(
                    MultiIndex.make([k, p], [l])
                )
                total = piece if total is None else total + piece
            cached = self._cap(total)
            self._christoffel_holo[key] = cached
        return cached

    # ---------------------------------------------------------------- curvature

    def curvature_low(self, k: int, p: int, l: int, q: int) -> Jet:
        """R_{k p lbar qbar} = g_{k p nbar} g^{nbar m} g_{m lbar qbar} - g_{k p lbar qbar}."""
        key = tuple(sorted((k, p))) + tuple(sorted((l, q)))
        cached = self._curv_low.get(key)
        if cached is None:
            total = None
            for nn in range(1, self.n + 1):
                left = self.potential_derivative(MultiIndex.make([k, p], [nn]))
                for m in range(1, self.n + 1):
                    piece = left * self.g_up(nn, m) * self.potential_derivative(
                        MultiIndex.make([m], [l, q])
                    )
                    total = piece if total is None else total + piece
            total = total - self.potential_derivative(MultiIndex.make([k, p], [l, q]))
            cached = self._cap(total)
            self._curv_low[key] = cached
        return cached

    def _chain(self, kind: str, a: int, b: int, uppers: tuple[int, ...]) -> Jet:
        """Iterated contravariant derivatives of Phi_{ab}, cached by sorted prefix.

        kind 'bar':  Dbar^{u_1}..Dbar^{u_r} Phi_{abar bbar}
        kind 'holo': D^{u_1}..D^{u_r} Phi_{a b}
        """
        uppers = tuple(sorted(uppers))
        key = (kind, a, b, uppers)
        cached = self._chains.get(key)
        if cached is not None:
            return cached
        if not uppers:
            idx = (
                MultiIndex.make([], [a, b]) if kind == "bar" else MultiIndex.make([a, b])
            )
            jet = self.potential_derivative(idx)
        else:
            prev = self._chain(kind, a, b, uppers[:-1])
            if kind == "bar":
                jet = self.dbar_upper(prev, uppers[-1])
            else:
                jet = self.d_upper(prev, uppers[-1])
        jet = self._cap(jet, max(0, self.chain_margin - len(uppers)))
        self._chains[key] = jet
        return jet

    def curvature_upper(self, r: int, l: int, q: int, uppers) -> Jet:
        """R^{lbar_1..lbar_r}_{lbar qbar} for r >= 2 (symmetric in uppers and in l,q)."""
        uppers = tuple(uppers)
        if r < 2 or len(uppers) != r:
            raise ValueError("curvature_upper needs r >= 2 upper indices")
        return -self._chain("bar", min(l, q), max(l, q), uppers)

    def curvature_upper_mirror(self, s: int, k: int, p: int, uppers) -> Jet:
        """-D^{k_1}..D^{k_s} Phi_{k p}, the holomorphic mirror of curvature_upper."""
        uppers = tuple(uppers)
        if s < 2 or len(uppers) != s:
            raise ValueError("curvature_upper_mirror needs s >= 2 upper indices")
        return -self._chain("holo", min(k, p), max(k, p), uppers)

    # ---------------------------------------------------------------- fiber tensors

    def gamma(self) -> Symbol:
        """gamma = g_{p qbar} eta^p etabar^q."""
        if self._gamma is None:
            total = Symbol.zero(self.n)
            for p in range(1, self.n + 1):
                for q in range(1, self.n + 1):
                    total = total + Symbol.monomial(
                        self.g_low(p, q), eta=[p], etabar=[q]
                    )
            self._gamma = total
        return self._gamma

    def rho(self, r: int, s: int) -> Symbol:
        """Canonical curvature polynomial rho_{r,s} for the (r,2) and (2,s) families."""
        if r < 2 or s < 2:
            raise ValueError("rho_{r,s} requires r >= 2 and s >= 2")
        if r != 2 and s != 2:
            raise ValueError(
                "canonical tensors are constructed for rho_{r,2} and rho_{2,s} only"
            )
        key = (r, s)
        cached = self._rho.get(key)
        if cached is not None:
            return cached
        n = self.n
        total = Symbol.zero(n)
        if s == 2:
            # lower the upper indices of R^{lbar_1..lbar_r}_{lbar qbar}
            for kmulti in combinations_with_replacement(range(1, n + 1), r):
                perm_k = multiset_permutations_count(kmulti)
                for l in range(1, n + 1):
                    for q in range(l, n + 1):
                        perm_l = 2 if l != q else 1
                        tensor = None
                        for us in product(range(1, n + 1), repeat=r):
                            piece = self.curvature_upper(r, l, q, us)
                            for ki, ui in zip(kmulti, us):
                                piece = piece * self.g_low(ki, ui)
                            tensor = piece if tensor is None else tensor + piece
                        total = total + Symbol.monomial(
                            self._cap(tensor).scale(perm_k * perm_l),
                            eta=kmulti,
                            etabar=[l, q],
                        )
        else:
            # mirror family: lower the upper indices of -D^{u_1}..D^{u_s} Phi_{k p}
            for lmulti in combinations_with_replacement(range(1, n + 1), s):
                perm_l = multiset_permutations_count(lmulti)
                for k in range(1, n + 1):
                    for p in range(k, n + 1):
                        perm_k = 2 if k != p else 1
                        tensor = None
                        for us in product(range(1, n + 1), repeat=s):
                            piece = self.curvature_upper_mirror(s, k, p, us)
                            for li, ui in zip(lmulti, us):
                                piece = piece * self.g_low(ui, li)
                            tensor = piece if tensor is None else tensor + piece
                        total = total + Symbol.monomial(
                            self._cap(tensor).scale(perm_k * perm_l),
                            eta=[k, p],
                            etabar=lmulti,
                        )
        self._rho[key] = total
        return total

    def rho_tilde(self) -> Symbol:
        """rho~ = R_{k1 k2 qbar1 qbar2} g^{qbar1 p1} g^{qbar2 p2} R_{p1 p2 lbar1 lbar2} eta^2 etabar^2."""
        if self._rho_tilde is not None:
            return self._rho_tilde
        n = self.n
        total = Symbol.zero(n)
        for k1 in range(1, n + 1):
            for k2 in range(k1, n + 1):
                perm_k = 2 if k1 != k2 else 1
                # raise both antiholomorphic indices of R_{k1 k2 . .}
                raised: dict[tuple[int, int], Jet] = {}
                for p1 in range(1, n + 1):
                    for p2 in range(1, n + 1):
                        acc = None
                        for q1 in range(1, n + 1):
                            for q2 in range(1, n + 1):
                                piece = (
                                    self.curvature_low(k1, k2, q1, q2)
                                    * self.g_up(q1, p1)
                                    * self.g_up(q2, p2)
                                )
                                acc = piece if acc is None else acc + piece
                        raised[(p1, p2)] = acc
                for l1 in range(1, n + 1):
                    for l2 in range(l1, n + 1):
                        perm_l = 2 if l1 != l2 else 1
                        tensor = None
                        for (p1, p2), mid in raised.items():
                            piece = mid * self.curvature_low(p1, p2, l1, l2)
                            tensor = piece if tensor is None else tensor + piece
                        total = total + Symbol.monomial(
                            self._cap(tensor).scale(perm_k * perm_l),
                            eta=[k1, k2],
                            etabar=[l1, l2],
                        )
        self._rho_tilde = total
        return total

    def rho_symbols(self, name_or_r, s: int | None = None) -> Symbol:
        """Spec surface: rho_symbols(r, s), rho_symbols('gamma'), rho_symbols('rho_tilde')."""
        if name_or_r == "gamma":
            return self.gamma()
        if name_or_r in ("rho_tilde", "rho~"):
            return self.rho_tilde()
        if s is None:
            raise ValueError("rho_symbols requires (r, s) or a reserved name")
        return self.rho(int(name_or_r), s)

    # ---------------------------------------------------------------- connection lifts

    def nabla_bar(self, S: Symbol) -> Symbol:
        """(0,1)-component of the connection lift acting on fiber polynomials."""
        n = self.n
        acc: dict = {}

        def add(key, jet):
            if jet.is_zero:
                return
            prev = acc.get(key)
            acc[key] = jet if prev is None else prev + jet

        for (z, e, b), c in S.terms.items():
            if z:
                raise ValueError("connection lift is defined on zetabar-free symbols")
            for l in range(1, n + 1):
                add((z, e, b + fiber_unit(l)), c.partial_zbar(l))
            for t in range(1, n + 1):
                mult = fiber_exp(b, t)
                if not mult:
                    continue
                base = b - fiber_unit(t)
                scaled = c.scale(-mult)
                for l in range(1, n + 1):
                    for q in range(1, n + 1):
                        add(
                            (z, e, base + fiber_unit(l) + fiber_unit(q)),
                            scaled * self.christoffel_bar(t, l, q),
                        )
        return Symbol(n, acc)

    def nabla_holo(self, S: Symbol) -> Symbol:
        """(1,0)-component of the connection lift (etabar indices inert)."""
        n = self.n
        acc: dict = {}

        def add(key, jet):
            if jet.is_zero:
                return
            prev = acc.get(key)
            acc[key] = jet if prev is None else prev + jet

        for (z, e, b), c in S.terms.items():
            if z:
                raise ValueError("connection lift is defined on zetabar-free symbols")
            for k in range(1, n + 1):
                add((z, e + fiber_unit(k), b), c.partial_z(k))
            for t in range(1, n + 1):
                mult = fiber_exp(e, t)
                if not mult:
                    continue
                base = e - fiber_unit(t)
                scaled = c.scale(-mult)
                for k in range(1, n + 1):
                    for p in range(1, n + 1):
                        add(
                            (z, base + fiber_unit(k) + fiber_unit(p), b),
                            scaled * self.christoffel_holo(t, k, p),
                        )
        return Symbol(n, acc)

    def symmetrized_covariant_derivative(self, S: Symbol, orientation: str) -> Symbol:
        """Fiber-polynomial form of the symmetrized covariant derivative."""
        if orientation == "antiholo":
            return self.nabla_bar(S)
        if orientation == "holo":
            return self.nabla_holo(S)
        raise ValueError(f"unknown orientation {orientation!r}")
