"""Executable verification suite for every identity the engine relies on.

Each operation returns a VerificationReport: a deterministic, ordered list
of named checks with pass/fail status and a textual witness for failures.
All comparisons are exact; random inputs come from a seeded generator so a
failure reproduces from (config, seed).

Random test functions are polynomials of total degree <= 3 with
small-integer Gaussian-rational coefficients.  Random potentials are the
flat potential plus a degree-<=4 polynomial with coefficients in
{-1,0,1}/4, with at least one mixed z/zbar term forced at each total
degree; the flat leading term keeps the metric invertible at the origin.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .geometry import GeometryCache
from .jets import GaussRational, Jet, MultiIndex, builtin_potential
from .star import closed_form_T_reference, star, star_via_T, tensor_T, wick_star
from .symbols import (
    NuSeries,
    Symbol,
    compose,
    euler_apply,
    fiber_unit,
    left_mult_symbol,
    q_apply,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "passed": self.passed,
            "checks": [
                {"name": c.name, "status": c.status, "witness": c.witness}
                for c in self.checks
            ],
        }

    @staticmethod
    def merge(*reports: "VerificationReport") -> "VerificationReport":
        checks = tuple(c for r in reports for c in r.checks)
        config = {}
        for r in reports:
            config.update(r.config)
        return VerificationReport(checks, config)


# ------------------------------------------------------------------ comparisons


def jets_match(a: Jet, b: Jet) -> str:
    """Empty string if the jets agree at their common valid order, else a witness."""
    common = min(a.order, b.order)
    at, bt = a.truncated(common), b.truncated(common)
    if at == bt:
        return ""
    diff = at - bt
    idx, coeff = next(iter(diff.coefficients().items()))
    return f"first difference at {idx.holo}|{idx.antiholo}: {coeff}"


def symbols_match(a: Symbol, b: Symbol) -> str:
    orders = [j.order for j in a.terms.values()] + [j.order for j in b.terms.values()]
    if not orders:
        return ""
    common = min(orders)
    at, bt = a.truncated(common), b.truncated(common)
    if at == bt:
        return ""
    diff = at - bt
    key = next(iter(diff.terms))
    return f"first difference at fiber key {key}: {diff.terms[key].to_text()}"


def series_match(a: NuSeries, b: NuSeries, upto: int | None = None) -> str:
    upto = min(a.order, b.order) if upto is None else upto
    for r in range(upto + 1):
        ca, cb = a[r], b[r]
        witness = (
            jets_match(ca, cb) if isinstance(ca, Jet) else symbols_match(ca, cb)
        )
        if witness:
            return f"nu^{r}: {witness}"
    return ""


# ------------------------------------------------------------------ random inputs


def _monomials(n: int, degree: int):
    for d in range(degree + 1):
        for h in range(d + 1):
            for holo in combinations_with_replacement(range(1, n + 1), h):
                for anti in combinations_with_replacement(range(1, n + 1), d - h):
                    yield MultiIndex.make(holo, anti)


def random_function(rng: random.Random, n: int, order: int, degree: int = 3,
                    kind: str = "mixed") -> Jet:
    """Seeded random polynomial jet with small Gaussian-rational coefficients."""
    coeffs = {}
    for idx in _monomials(n, degree):
        if kind == "holo" and idx.antiholo:
            continue
        if kind == "antiholo" and idx.holo:
            continue
        if rng.random() >= 0.45:
            continue
        coeff = GaussRational(
            Fraction(rng.randint(-2, 2), rng.choice((1, 2))),
            Fraction(rng.randint(-2, 2), rng.choice((1, 2))),
        )
        if not coeff.is_zero:
            coeffs[idx] = coeff
    if not coeffs:
        fallback = MultiIndex.make([1]) if kind != "antiholo" else MultiIndex.make([], [1])
        coeffs[fallback] = GaussRational(1)
    return Jet.from_coefficients(n, order, coeffs)


def random_potential(seed: int, n: int, order: int) -> Jet:
    """Flat potential plus a seeded degree-<=4 perturbation, {-1,0,1}/4 coefficients.

    The polynomial depends only on (seed, n), so re-expanding at a higher jet
    order reproduces the same potential (needed by the stability check).
    """
    rng = random.Random(seed)
    phi = builtin_potential("flat", n, order)
    extra = {}
    for d in (2, 3, 4):
        mixed_slots = []
        for h in range(d + 1):
            for holo in combinations_with_replacement(range(1, n + 1), h):
                for anti in combinations_with_replacement(range(1, n + 1), d - h):
                    idx = MultiIndex.make(holo, anti)
                    if holo and anti:
                        mixed_slots.append(idx)
                    c = rng.choice((-1, 0, 1))
                    if c:
                        extra[idx] = Fraction(c, 4)
        if not any(idx in extra for idx in mixed_slots):
            extra[rng.choice(mixed_slots)] = Fraction(rng.choice((-1, 1)), 4)
    return phi + Jet.from_coefficients(n, order, extra)


def random_potential_cache(
    seed: int, n: int, phi_order: int, work_order: int | None = None
) -> GeometryCache:
    return GeometryCache(
        random_potential(seed, n, phi_order),
        work_order=work_order,
        phi_source=lambda o: random_potential(seed, n, o),
    )


# ------------------------------------------------------------------ check bodies


def _append(checks: list, name: str, witness: str) -> None:
    checks.append(CheckResult(name, not witness, witness))


def verify_algebraic_identities(G: GeometryCache, seed: int) -> VerificationReport:
    """Jacobi identity, inverse-metric derivative rules, canonical relations,
    operator commutativity, symbol commutators, curvature lowering."""
    rng = random.Random(seed)
    n = G.n
    checks: list[CheckResult] = []
    test_order = max(2, min(G.phi.order - 6, 8))
    u = random_function(rng, n, test_order)
    v = random_function(rng, n, test_order)

    # Jacobi identity for the inverse metric, both displayed forms
    zero = Jet.zero(n, G.phi.order)
    witness = ""
    for l in range(1, n + 1):
        for q in range(1, n + 1):
            for p in range(1, n + 1):
                lhs = sum(
                    (G.g_up(l, k) * G.g_up(q, p).partial_z(k) for k in range(1, n + 1)),
                    zero,
                )
                rhs = sum(
                    (G.g_up(q, k) * G.g_up(l, p).partial_z(k) for k in range(1, n + 1)),
                    zero,
                )
                witness = witness or jets_match(lhs, rhs)
    for q in range(1, n + 1):
        for p in range(1, n + 1):
            for k in range(1, n + 1):
                lhs = sum(
                    (G.g_up(l, k) * G.g_up(q, p).partial_zbar(l) for l in range(1, n + 1)),
                    zero,
                )
                rhs = sum(
                    (G.g_up(l, p) * G.g_up(q, k).partial_zbar(l) for l in range(1, n + 1)),
                    zero,
                )
                witness = witness or jets_match(lhs, rhs)
    _append(checks, "jacobi_identity", witness)

    # derivative rules for the inverse metric
    witness = ""
    for l in range(1, n + 1):
        for k in range(1, n + 1):
            for p in range(1, n + 1):
                rhs = zero
                for s in range(1, n + 1):
                    for t in range(1, n + 1):
                        rhs = rhs - G.g_up(l, s) * G.potential_derivative(
                            MultiIndex.make([s, p], [t])
                        ) * G.g_up(t, k)
                witness = witness or jets_match(G.g_up(l, k).partial_z(p), rhs)
            for q in range(1, n + 1):
                rhs = zero
                for s in range(1, n + 1):
                    for t in range(1, n + 1):
                        rhs = rhs - G.g_up(l, s) * G.potential_derivative(
                            MultiIndex.make([s], [q, t])
                        ) * G.g_up(t, k)
                witness = witness or jets_match(G.g_up(l, k).partial_zbar(q), rhs)
    _append(checks, "derivative_rules", witness)

    # Lemma-1 canonical relations realized on a random jet, plus the
    # Christoffel consistency Gamma^t_{lq} = Dbar^t Phi_{lbar qbar}
    witness = ""
    for l in range(1, n + 1):
        for q in range(1, n + 1):
            phi_q = G.potential_derivative(MultiIndex.make([], [q]))
            delta = Jet.constant(n, u.order, 1 if l == q else 0)
            zq = Jet.monomial(n, u.order, MultiIndex.make([], [q]))
            witness = witness or jets_match(
                G.dbar_lower(phi_q * u, l), phi_q * G.dbar_lower(u, l)
            )
            witness = witness or jets_match(
                G.dbar_lower(G.dbar_upper(u, q), l), G.dbar_upper(G.dbar_lower(u, l), q)
            )
            witness = witness or jets_match(
                G.dbar_lower(zq * u, l) - zq * G.dbar_lower(u, l), delta * u
            )
            witness = witness or jets_match(
                G.dbar_upper(phi_q * u, l) - phi_q * G.dbar_upper(u, l), delta * u
            )
            for t in range(1, n + 1):
                witness = witness or jets_match(
                    G.christoffel_bar(t, l, q),
                    G.dbar_upper(G.potential_derivative(MultiIndex.make([], [l, q])), t),
                )
    _append(checks, "canonical_relations", witness)

    # pairwise commutation of the contravariant derivative operators
    witness = ""
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            witness = witness or jets_match(
                G.dbar_upper(G.dbar_upper(u, a), b), G.dbar_upper(G.dbar_upper(u, b), a)
            )
            witness = witness or jets_match(
                G.d_upper(G.d_upper(v, a), b), G.d_upper(G.d_upper(v, b), a)
            )
    _append(checks, "d_operator_commutativity", witness)

    # symmetry of third-order contravariant derivative chains (both kinds)
    witness = ""
    if G.phi.order >= 8:
        order_a = (1, 1, min(2, n))
        order_b = (min(2, n), 1, 1)
        witness = witness or jets_match(
            G.dbar_upper_chain(u, order_a), G.dbar_upper_chain(u, order_b)
        )
        witness = witness or jets_match(
            G.d_upper_chain(v, order_a), G.d_upper_chain(v, order_b)
        )
    _append(checks, "symmetric_tensor_chains", witness)

    # symbol commutators under composition
    witness = ""
    w_jet = random_function(rng, n, test_order)
    F = Symbol.from_jet(u) + Symbol.monomial(v, etabar=[1]) + Symbol.monomial(
        w_jet, etabar=[min(2, n), 1]
    )
    Fz = Symbol.from_jet(u) + Symbol.monomial(v, zetabar=[1])
    for l in range(1, n + 1):
        phi_l = Symbol.from_jet(G.potential_derivative(MultiIndex.make([], [l])))
        etabar_l = Symbol.monomial(Jet.constant(n, G.phi.order, 1), etabar=[l])
        zetabar_l = Symbol.monomial(Jet.constant(n, G.phi.order, 1), zetabar=[l])
        witness = witness or symbols_match(
            compose(G, F, phi_l) - compose(G, phi_l, F), F.partial_etabar(l)
        )
        witness = witness or symbols_match(
            compose(G, etabar_l, F) - compose(G, F, etabar_l),
            F.map_coefficients(lambda c: G.dbar_upper(c, l)),
        )
        witness = witness or symbols_match(
            compose(G, zetabar_l, Fz) - compose(G, Fz, zetabar_l),
            Fz.map_coefficients(lambda c: G.dbar_lower(c, l)),
        )
    _append(checks, "symbol_commutators", witness)

    # lowering the rank-2 upper curvature reproduces the direct tensor
    witness = ""
    for k in range(1, n + 1):
        for p in range(1, n + 1):
            for l in range(1, n + 1):
                for q in range(1, n + 1):
                    lowered = sum(
                        (
                            G.g_low(k, u1) * G.g_low(p, u2)
                            * G.curvature_upper(2, l, q, (u1, u2))
                            for u1 in range(1, n + 1)
                            for u2 in range(1, n + 1)
                        ),
                        zero,
                    )
                    witness = witness or jets_match(lowered, G.curvature_low(k, p, l, q))
    _append(checks, "curvature_lowering_consistency", witness)

    config = {"n": n, "phi_order": G.phi.order, "seed": seed}
    return VerificationReport(tuple(checks), config)


def verify_star_laws(G: GeometryCache, N: int, seed: int,
                     functions: tuple | None = None) -> VerificationReport:
    """Associativity, unit, separation, defining relation, governing equation,
    commutation with right-multiplication symbols, Poisson bracket, Wick oracle."""
    rng = random.Random(seed)
    n = G.n
    checks: list[CheckResult] = []
    out = max(G.phi.order - 2 * N - 4, 1)
    f_order = G.phi.order
    if functions is not None:
        f, g, h = functions
    else:
        f = random_function(rng, n, f_order)
        g = random_function(rng, n, f_order)
        h = random_function(rng, n, f_order)

    # associativity through nu^N
    fg = star(G, f, g, N, out_order=out + N)
    gh = star(G, g, h, N, out_order=out + N)
    left = star(G, fg.series, h, N, out_order=out)
    right = star(G, f, gh.series, N, out_order=out)
    _append(checks, "associativity", series_match(left.series, right.series))

    # unit law
    one = Jet.constant(n, f_order, 1)
    lhs = star(G, f, one, N, out_order=out)
    witness = ""
    for r in range(N + 1):
        expect = f.truncated(out) if r == 0 else Jet.zero(n, out)
        witness = witness or jets_match(lhs[r], expect)
    rhs = star(G, one, f, N, out_order=out)
    for r in range(N + 1):
        expect = f.truncated(out) if r == 0 else Jet.zero(n, out)
        witness = witness or jets_match(rhs[r], expect)
    _append(checks, "unit_law", witness)

    # separation of variables: L_a and R_b act by multiplication
    a = random_function(rng, n, f_order, kind="holo")
    b = random_function(rng, n, f_order, kind="antiholo")
    witness = ""
    res = star(G, a, g, N, out_order=out)
    witness = witness or jets_match(res[0], (a * g).truncated(out))
    for r in range(1, N + 1):
        witness = witness or jets_match(res[r], Jet.zero(n, out))
    res = star(G, f, b, N, out_order=out)
    witness = witness or jets_match(res[0], (f * b).truncated(out))
    for r in range(1, N + 1):
        witness = witness or jets_match(res[r], Jet.zero(n, out))
    _append(checks, "separation_of_variables", witness)

    # defining relation: left multiplication by dPhi/dz^k is Phi_k + nu d/dz^k
    witness = ""
    for k in range(1, n + 1):
        phi_k = G.potential_derivative(MultiIndex.make([k]))
        res = star(G, phi_k, g, N, out_order=out)
        witness = witness or jets_match(res[0], (phi_k * g).truncated(out))
        if N >= 1:
            witness = witness or jets_match(res[1], g.partial_z(k).truncated(out))
        for r in range(2, N + 1):
            witness = witness or jets_match(res[r], Jet.zero(n, out))
    _append(checks, "defining_relation", witness)

    # governing equation E(F_r) = Q(F_{r-1}) for the left symbol of f
    F = left_mult_symbol(G, f, N, out_order=out)
    witness = ""
    for r in range(1, N + 1):
        witness = witness or symbols_match(euler_apply(F[r]), q_apply(G, F[r - 1]))
    _append(checks, "governing_equation", witness)

    # the left symbol commutes with the symbol of R_{dPhi/dzbar^l};
    # inputs are truncated for speed, validity tracking keeps the check exact
    witness = ""
    cap = out + 2 * N
    Fser = left_mult_symbol(G, g, N, out_order=out + N)
    for l in range(1, n + 1):
        r_symbol = NuSeries(
            [
                Symbol.from_jet(
                    G.potential_derivative(MultiIndex.make([], [l]))
                ).truncated(cap),
                (
                    Symbol.monomial(Jet.constant(n, G.phi.order, 1), zetabar=[l])
                    + Symbol(
                        n,
                        {
                            (0, 0, fiber_unit(q)): G.potential_derivative(
                                MultiIndex.make([], [l, q])
                            )
                            for q in range(1, n + 1)
                        },
                    )
                ).truncated(cap),
            ],
            1,
        )
        lhs = NuSeries.convolve(Fser, r_symbol, lambda A, B: compose(G, A, B), N)
        rhs = NuSeries.convolve(r_symbol, Fser, lambda A, B: compose(G, A, B), N)
        witness = witness or series_match(lhs, rhs)
    _append(checks, "right_symbol_commutation", witness)

    # antisymmetrized first-order term is the Kähler-Poisson bracket
    if N >= 1:
        c1_fg = star(G, f, g, 1, out_order=out)[1]
        c1_gf = star(G, g, f, 1, out_order=out)[1]
        bracket = Jet.zero(n, out)
        for l in range(1, n + 1):
            for k in range(1, n + 1):
                bracket = bracket + G.g_up(l, k) * (
                    f.partial_zbar(l) * g.partial_z(k)
                    - g.partial_zbar(l) * f.partial_z(k)
                )
        _append(checks, "poisson_bracket", jets_match(c1_fg - c1_gf, bracket))

    # flat charts admit the independent Wick oracle
    if G.phi == builtin_potential("flat", n, G.phi.order):
        s_direct = star(G, f, g, N, out_order=out)
        s_wick = wick_star(f, g, N)
        _append(checks, "wick_oracle", series_match(s_direct.series, s_wick.series, N))

    config = {"n": n, "phi_order": G.phi.order, "nu_order": N, "seed": seed}
    return VerificationReport(tuple(checks), config)


def verify_cross_checks(G: GeometryCache, N: int, seed: int = 0) -> VerificationReport:
    """Closed-form tensor match, rho cross-derivations, star-vs-contraction,
    and stability of reported coefficients under raising the potential order."""
    rng = random.Random(seed)
    n = G.n
    checks: list[CheckResult] = []
    out = max(G.phi.order - 2 * N - 4, 1)

    T = tensor_T(G, N, out_order=out)
    upto = min(N, 4)
    ref = closed_form_T_reference(G, out_order=out)
    witness = ""
    for r in range(upto + 1):
        witness = witness or symbols_match(T[r], ref[r])
    _append(checks, "tensor_closed_form", witness)

    # rho_{2,3} and rho_{3,2} via the symmetrized covariant derivative
    rho22 = G.rho(2, 2)
    witness = symbols_match(
        G.symmetrized_covariant_derivative(rho22, "antiholo"), G.rho(2, 3)
    )
    witness = witness or symbols_match(
        G.symmetrized_covariant_derivative(rho22, "holo"), G.rho(3, 2)
    )
    _append(checks, "rho_cross_derivation", witness)

    # the tensor contraction reproduces the direct star product
    u = random_function(rng, n, G.phi.order)
    v = random_function(rng, n, G.phi.order)
    direct = star(G, u, v, N, out_order=out)
    contracted = star_via_T(G, tensor_T(G, N, out_order=out + N), u, v, N, out_order=out)
    _append(checks, "star_matches_tensor_contraction", series_match(direct.series, contracted.series))

    # raising the potential order must not change any reported coefficient
    try:
        G2 = G.sibling(G.phi.order + 1)
    except ValueError as exc:
        _append(checks, "phi_order_stability", str(exc))
    else:
        T2 = tensor_T(G2, N, out_order=out)
        witness = ""
        for r in range(N + 1):
            witness = witness or symbols_match(T[r], T2[r])
        direct2 = star(G2, u, v, N, out_order=out)
        witness = witness or series_match(direct.series, direct2.series)
        _append(checks, "phi_order_stability", witness)

    config = {"n": n, "phi_order": G.phi.order, "nu_order": N, "seed": seed}
    return VerificationReport(tuple(checks), config)
