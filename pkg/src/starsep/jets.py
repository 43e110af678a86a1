"""Exact truncated power-series (jet) arithmetic on a complex chart.

A Jet models a function germ at the origin of a chart with holomorphic
coordinates z^1..z^n, where z^k and zbar^k are treated as 2n independent
formal variables.  Coefficients are Gaussian rationals and stay exact at
every operation; internally a jet keeps integer numerator pairs over one
common positive denominator, so ring operations reduce to integer
arithmetic with a single gcd pass at the end.

Monomial keys pack all 2n exponents into one int, 6 bits per variable
(z^1..z^n first, then zbar^1..zbar^n), and terms are grouped by total
degree so truncated multiplication can skip degree pairs above the target
order without scanning them.

Every jet carries the `order` up to which its coefficients are
trustworthy: differentiation lowers it by one, binary operations take the
minimum of the operands, and `truncated` lowers it explicitly.  Terms of
degree above `order` are never stored, and zero coefficients are pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

_BITS = 6
_MASK = (1 << _BITS) - 1
MAX_ORDER = _MASK - 1  # keeps packed exponents collision-free under addition

Scalar = "GaussRational | Fraction | int"


class GaussRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRational is immutable")

    @staticmethod
    def coerce(value) -> "GaussRational":
        if isinstance(value, GaussRational):
            return value
        return GaussRational(value)

    def __add__(self, other):
        other = GaussRational.coerce(other)
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussRational.coerce(other))

    def __rsub__(self, other):
        return GaussRational.coerce(other) + (-self)

    def __mul__(self, other):
        other = GaussRational.coerce(other)
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero GaussRational")
        return self * GaussRational(other.re / norm, -other.im / norm)

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussRational(other)
        if not isinstance(other, GaussRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"

    def __repr__(self):
        return f"GaussRational({self.re!r}, {self.im!r})"


ONE = GaussRational(1)
I_UNIT = GaussRational(0, 1)


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Pair of sorted index multisets (holomorphic, antiholomorphic), 1-based."""

    holo: tuple[int, ...] = ()
    antiholo: tuple[int, ...] = ()

    @staticmethod
    def make(holo: Iterable[int] = (), antiholo: Iterable[int] = ()) -> "MultiIndex":
        return MultiIndex(tuple(sorted(holo)), tuple(sorted(antiholo)))

    @property
    def degree(self) -> int:
        return len(self.holo) + len(self.antiholo)

    def pack(self, n: int) -> int:
        key = 0
        for k in self.holo:
            if not 1 <= k <= n:
                raise ValueError(f"holomorphic index {k} outside 1..{n}")
            key += 1 << (_BITS * (k - 1))
        for l in self.antiholo:
            if not 1 <= l <= n:
                raise ValueError(f"antiholomorphic index {l} outside 1..{n}")
            key += 1 << (_BITS * (n + l - 1))
        return key

    @staticmethod
    def unpack(key: int, n: int) -> "MultiIndex":
        holo, antiholo = [], []
        for k in range(n):
            holo.extend([k + 1] * ((key >> (_BITS * k)) & _MASK))
        for l in range(n):
            antiholo.extend([l + 1] * ((key >> (_BITS * (n + l))) & _MASK))
        return MultiIndex(tuple(holo), tuple(antiholo))


def _exponents(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (_BITS * v)) & _MASK for v in range(nvars))


def _scalar_parts(value) -> tuple[int, int, int]:
    """Split a scalar into (den, re_num, im_num) with den > 0."""
    value = GaussRational.coerce(value)
    den = math.lcm(value.re.denominator, value.im.denominator)
    return den, int(value.re * den), int(value.im * den)


class Jet:
    """Immutable truncated power series with exact Gaussian-rational coefficients."""

    __slots__ = ("n", "order", "den", "groups", "_real")

    def __init__(self, n: int, order: int, den: int = 1, groups: tuple = ()):
        # Normalizing constructor: strips zeros, reduces the common denominator.
        if n < 1:
            raise ValueError("chart dimension must be >= 1")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must lie in 0..{MAX_ORDER}")
        clean: list[dict[int, tuple[int, int]]] = []
        g = den
        for d, grp in enumerate(groups):
            if d > order:
                break
            kept = {}
            for key, (re, im) in grp.items():
                if re or im:
                    kept[key] = (re, im)
                    if g != 1:
                        g = math.gcd(g, re, im)
            clean.append(kept)
        while clean and not clean[-1]:
            clean.pop()
        if not clean:
            den, g = 1, 1
        if g > 1:
            clean = [
                {k: (re // g, im // g) for k, (re, im) in grp.items()} for grp in clean
            ]
            den //= g
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "groups", tuple(clean))
        object.__setattr__(
            self, "_real", all(im == 0 for grp in clean for (_, im) in grp.values())
        )

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    # ---------------------------------------------------------------- factories

    @staticmethod
    def zero(n: int, order: int) -> "Jet":
        return Jet(n, order)

    @staticmethod
    def constant(n: int, order: int, value) -> "Jet":
        den, re, im = _scalar_parts(value)
        return Jet(n, order, den, ({0: (re, im)},))

    @staticmethod
    def monomial(n: int, order: int, idx: MultiIndex, coeff=1) -> "Jet":
        if idx.degree > order:
            raise ValueError("monomial degree exceeds jet order")
        den, re, im = _scalar_parts(coeff)
        groups = [dict() for _ in range(idx.degree + 1)]
        groups[idx.degree][idx.pack(n)] = (re, im)
        return Jet(n, order, den, tuple(groups))

    @staticmethod
    def variable(n: int, order: int, kind: str, k: int) -> "Jet":
        idx = MultiIndex.make([k]) if kind == "z" else MultiIndex.make([], [k])
        return Jet.monomial(n, order, idx)

    @staticmethod
    def from_coefficients(n: int, order: int, coeffs: Mapping[MultiIndex, object]) -> "Jet":
        total = Jet.zero(n, order)
        for idx, value in coeffs.items():
            total = total + Jet.monomial(n, order, idx, GaussRational.coerce(value))
        return total

    # ---------------------------------------------------------------- accessors

    @property
    def is_zero(self) -> bool:
        return not self.groups

    @property
    def is_real(self) -> bool:
        return self._real

    def coefficient(self, idx: MultiIndex) -> GaussRational:
        d = idx.degree
        if d > self.order:
            raise ValueError(f"degree {d} exceeds jet order {self.order}")
        if d >= len(self.groups):
            return GaussRational(0)
        re, im = self.groups[d].get(idx.pack(self.n), (0, 0))
        return GaussRational(Fraction(re, self.den), Fraction(im, self.den))

    def coefficients(self) -> dict[MultiIndex, GaussRational]:
        """All nonzero coefficients in graded-lexicographic key order."""
        out: dict[MultiIndex, GaussRational] = {}
        for d, grp in enumerate(self.groups):
            for key in sorted(grp, key=lambda k: _exponents(k, 2 * self.n), reverse=True):
                re, im = grp[key]
                out[MultiIndex.unpack(key, self.n)] = GaussRational(
                    Fraction(re, self.den), Fraction(im, self.den)
                )
        return out

    def constant_term(self) -> GaussRational:
        return self.coefficient(MultiIndex())

    def degree(self) -> int:
        """Highest total degree actually present (-1 for the zero jet)."""
        return len(self.groups) - 1

    def term_count(self) -> int:
        return sum(len(grp) for grp in self.groups)

    # ---------------------------------------------------------------- ring ops

    def _require_same_chart(self, other: "Jet") -> None:
        if self.n != other.n:
            raise ValueError(f"chart dimension mismatch: {self.n} != {other.n}")

    def __add__(self, other):
        if not isinstance(other, Jet):
            return self + Jet.constant(self.n, self.order, other)
        self._require_same_chart(other)
        order = min(self.order, other.order)
        den = math.lcm(self.den, other.den)
        fa, fb = den // self.den, den // other.den
        size = min(order + 1, max(len(self.groups), len(other.groups)))
        groups = []
        for d in range(size):
            merged: dict[int, tuple[int, int]] = {}
            if d < len(self.groups):
                for k, (re, im) in self.groups[d].items():
                    merged[k] = (re * fa, im * fa)
            if d < len(other.groups):
                for k, (re, im) in other.groups[d].items():
                    pre, pim = merged.get(k, (0, 0))
                    merged[k] = (pre + re * fb, pim + im * fb)
            groups.append(merged)
        return Jet(self.n, order, den, tuple(groups))

    __radd__ = __add__

    def __neg__(self):
        groups = tuple(
            {k: (-re, -im) for k, (re, im) in grp.items()} for grp in self.groups
        )
        return Jet(self.n, self.order, self.den, groups)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(self.n, self.order, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, value) -> "Jet":
        """Multiply by an exact scalar without reducing the validity order."""
        sden, sre, sim = _scalar_parts(value)
        if sre == 0 and sim == 0:
            return Jet.zero(self.n, self.order)
        if sim == 0:
            groups = tuple(
                {k: (re * sre, im * sre) for k, (re, im) in grp.items()}
                for grp in self.groups
            )
        else:
            groups = tuple(
                {
                    k: (re * sre - im * sim, re * sim + im * sre)
                    for k, (re, im) in grp.items()
                }
                for grp in self.groups
            )
        return Jet(self.n, self.order, self.den * sden, groups)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._require_same_chart(other)
        order = min(self.order, other.order)
        if self.is_zero or other.is_zero:
            return Jet.zero(self.n, order)
        ga, gb = self.groups, other.groups
        acc_r: list[dict[int, int]] = [dict() for _ in range(order + 1)]
        acc_i: list[dict[int, int]] = [dict() for _ in range(order + 1)]
        nb = len(gb)
        for d1, g1 in enumerate(ga):
            if d1 > order:
                break
            if not g1:
                continue
            top = min(order - d1, nb - 1)
            for d2 in range(top + 1):
                g2 = gb[d2]
                if not g2:
                    continue
                ar_ = acc_r[d1 + d2]
                ai_ = acc_i[d1 + d2]
                ar_get = ar_.get
                ai_get = ai_.get
                g2items = g2.items()
                for k1, (ar, ai) in g1.items():
                    if ai:
                        for k2, (br, bi) in g2items:
                            k = k1 + k2
                            ar_[k] = ar_get(k, 0) + ar * br - ai * bi
                            ai_[k] = ai_get(k, 0) + ar * bi + ai * br
                    else:
                        for k2, (br, bi) in g2items:
                            k = k1 + k2
                            ar_[k] = ar_get(k, 0) + ar * br
                            if bi:
                                ai_[k] = ai_get(k, 0) + ar * bi
        groups = []
        for d in range(order + 1):
            grp = {}
            rr, ii = acc_r[d], acc_i[d]
            for k, re in rr.items():
                grp[k] = (re, ii.pop(k, 0))
            for k, im in ii.items():
                grp[k] = (0, im)
            groups.append(grp)
        return Jet(self.n, order, self.den * other.den, tuple(groups))

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("jet powers must be non-negative integers")
        result = Jet.constant(self.n, self.order, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # ---------------------------------------------------------------- calculus

    def _partial(self, var: int) -> Jet:
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        shift = _BITS * var
        unit = 1 << shift
        groups = [dict() for _ in range(max(len(self.groups) - 1, 0))]
        for d in range(1, len(self.groups)):
            tgt = groups[d - 1]
            for key, (re, im) in self.groups[d].items():
                e = (key >> shift) & _MASK
                if e:
                    tgt[key - unit] = (re * e, im * e)
        return Jet(self.n, self.order - 1, self.den, tuple(groups))

    def partial_z(self, k: int) -> "Jet":
        """d/dz^k (1-based)."""
        if not 1 <= k <= self.n:
            raise ValueError(f"index {k} outside 1..{self.n}")
        return self._partial(k - 1)

    def partial_zbar(self, l: int) -> "Jet":
        """d/dzbar^l (1-based)."""
        if not 1 <= l <= self.n:
            raise ValueError(f"index {l} outside 1..{self.n}")
        return self._partial(self.n + l - 1)

    def partial_multi(self, idx: MultiIndex) -> "Jet":
        jet = self
        for k in idx.holo:
            jet = jet.partial_z(k)
        for l in idx.antiholo:
            jet = jet.partial_zbar(l)
        return jet

    def reciprocal(self) -> "Jet":
        """Multiplicative inverse up to this jet's order."""
        c0 = self.constant_term()
        if c0.is_zero:
            raise ValueError("jet has zero constant term, no reciprocal")
        c0_inv = ONE / c0
        # 1/a = c0^-1 * sum_m (1 - a/c0)^m; the defect has no constant term,
        # so each power raises the minimal degree and the sum terminates.
        defect = Jet.constant(self.n, self.order, 1) - self.scale(c0_inv)
        total = Jet.constant(self.n, self.order, 1)
        power = defect
        while not power.is_zero:
            total = total + power
            power = power * defect
        return total.scale(c0_inv)

    def conjugate(self) -> "Jet":
        """Formal complex conjugate: swaps z^k <-> zbar^k and conjugates coefficients."""
        n = self.n
        lowmask = (1 << (_BITS * n)) - 1
        groups = tuple(
            {
                ((key >> (_BITS * n)) | ((key & lowmask) << (_BITS * n))): (re, -im)
                for key, (re, im) in grp.items()
            }
            for grp in self.groups
        )
        return Jet(n, self.order, self.den, groups)

    def truncated(self, order: int) -> "Jet":
        """Explicitly lower the validity order (no-op if already lower)."""
        if order >= self.order:
            return self
        if order < 0:
            raise ValueError("cannot truncate to a negative order")
        return Jet(self.n, order, self.den, self.groups[: order + 1])

    # ---------------------------------------------------------------- protocol

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.n == other.n
            and self.order == other.order
            and self.den == other.den
            and self.groups == other.groups
        )

    __hash__ = None

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, terms={self.term_count()})"

    def __str__(self):
        return self.to_text()

    def _sorted_items(self) -> Iterator[tuple[int, int, tuple[int, int]]]:
        # Graded order, descending lexicographic inside each degree, so that
        # e.g. z1*zbar1 precedes zbar1^2 and z1 precedes z2.
        for d, grp in enumerate(self.groups):
            for key in sorted(grp, key=lambda k: _exponents(k, 2 * self.n), reverse=True):
                yield d, key, grp[key]

    def to_text(self) -> str:
        """Canonical polynomial rendering, e.g. '1 - 1/2*z1^2*zbar1^2'."""
        parts = []
        for _, key, (re, im) in self._sorted_items():
            coeff = GaussRational(Fraction(re, self.den), Fraction(im, self.den))
            mono = monomial_text(key, self.n)
            parts.append((coeff, mono))
        return render_terms(parts)


def monomial_text(key: int, n: int, fiber: tuple[int, int, int] | None = None) -> str:
    """Render a packed base monomial (optionally with fiber exponents) as text."""
    pieces = []
    for v in range(2 * n):
        e = (key >> (_BITS * v)) & _MASK
        if e:
            name = f"z{v + 1}" if v < n else f"zbar{v - n + 1}"
            pieces.append(name if e == 1 else f"{name}^{e}")
    if fiber is not None:
        zkey, ekey, bkey = fiber
        for fkey, name in ((ekey, "eta"), (bkey, "etabar"), (zkey, "zetabar")):
            for v in range(n):
                e = (fkey >> (_BITS * v)) & _MASK
                if e:
                    pieces.append(f"{name}{v + 1}" if e == 1 else f"{name}{v + 1}^{e}")
    return "*".join(pieces) if pieces else "1"


def render_terms(parts: list[tuple[GaussRational, str]]) -> str:
    """Join (coefficient, monomial) pairs into a canonical polynomial string."""
    if not parts:
        return "0"
    out = []
    for coeff, mono in parts:
        if coeff.is_real and coeff.re < 0:
            sign, body = "-", format_coeff_mono(-coeff, mono)
        else:
            sign, body = "+", format_coeff_mono(coeff, mono)
        if not out:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def format_coeff_mono(coeff: GaussRational, mono: str) -> str:
    if mono == "1":
        return str(coeff)
    if coeff == ONE:
        return mono
    return f"{coeff}*{mono}"


# ------------------------------------------------------------------ spec surface


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_partial(a: Jet, var) -> Jet:
    """Partial derivative; `var` is ('z', k), ('zbar', l), or a 'z2'/'zbar1' string."""
    if isinstance(var, str):
        if var.startswith("zbar"):
            var = ("zbar", int(var[4:]))
        elif var.startswith("z"):
            var = ("z", int(var[1:]))
        else:
            raise ValueError(f"unknown variable {var!r}")
    kind, k = var
    if kind == "z":
        return a.partial_z(k)
    if kind == "zbar":
        return a.partial_zbar(k)
    raise ValueError(f"unknown variable kind {kind!r}")


def jet_reciprocal(a: Jet) -> Jet:
    return a.reciprocal()


BUILTIN_POTENTIALS = ("flat", "fubini-study", "hyperbolic")


def builtin_potential(name: str, n: int, order: int) -> Jet:
    """Built-in Kähler potentials: flat, fubini-study (log(1+u)) and hyperbolic (-log(1-u))."""
    if order < 2:
        raise ValueError("potential order must be >= 2")
    u = Jet.zero(n, order)
    for k in range(1, n + 1):
        u = u + Jet.monomial(n, order, MultiIndex.make([k], [k]))
    if name == "flat":
        return u
    if name not in BUILTIN_POTENTIALS:
        raise ValueError(f"unknown builtin potential {name!r}")
    sign = -1 if name == "fubini-study" else 1
    total = Jet.zero(n, order)
    power = Jet.constant(n, order, 1)
    for m in range(1, order // 2 + 1):
        power = power * u
        if power.is_zero:
            break
        total = total + power.scale(Fraction(sign ** (m + 1), m))
    return total
