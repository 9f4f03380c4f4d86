"""Exact normal-ordered polynomials in q1..q3, p1..p3 with symbolic coefficients.

Every term is ``c * beta^a * T^b * kappa^k * m1^-u1 m2^-u2 m3^-u3 * q^e * p^f``
with ``c`` an exact Gaussian rational and all position operators to the left
of all momentum operators.  ``[q_i, p_j] = i delta_ij`` (hbar = 1) is applied
whenever a product has to be brought back into that order.

Positive powers of ``beta`` beyond ``beta_cut`` (and of ``T`` beyond
``t_cut``) are discarded on construction, so arithmetic is carried out in the
quotient ring where ``beta^(beta_cut+1) = 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Mapping

from ._scalars import GaussianRational, I, ONE

__all__ = [
    "OperatorMonomial",
    "OperatorPolynomial",
    "TruncationMismatch",
    "NonTerminatingSeries",
    "BCHNonTerminating",
    "multiply",
    "commutator",
    "nested_commutator",
    "exp_series",
    "bch_compose",
    "adjoint",
    "is_anti_hermitian",
    "q",
    "p",
    "T",
    "kappa",
    "beta",
    "inv_mass",
    "one",
    "zero",
]

# key layout: (beta, T, kappa, 1/m1, 1/m2, 1/m3, q1, q2, q3, p1, p2, p3)
_NSYM = 6
_SYMBOL_NAMES = ("beta", "T", "kappa", "im1", "im2", "im3")
_OP_NAMES = ("q1", "q2", "q3", "p1", "p2", "p3")
_NAMES = _SYMBOL_NAMES + _OP_NAMES
_ZERO_KEY = (0,) * 12


class TruncationMismatch(ValueError):
    """Operands were built with different beta/T truncation settings."""


class NonTerminatingSeries(ValueError):
    """An exponential series was requested for an operator with a T-free term."""


class BCHNonTerminating(ArithmeticError):
    """Commutators beyond the fifth BCH level survive the current truncation."""

    def __init__(self, word: str, residual: "OperatorPolynomial"):
        self.word = word
        self.residual = residual
        super().__init__(
            f"BCH series does not terminate: {word} = {residual.to_text(inline=True)}"
        )


@dataclass(frozen=True)
class OperatorMonomial:
    coeff: GaussianRational
    beta_pow: int = 0
    t_pow: int = 0
    kappa_pow: int = 0
    mass_pows: tuple[int, int, int] = (0, 0, 0)
    q_exps: tuple[int, int, int] = (0, 0, 0)
    p_exps: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        for e in (self.beta_pow, self.t_pow, self.kappa_pow, *self.q_exps, *self.p_exps):
            if e < 0:
                raise ValueError("operator and parameter exponents must be non-negative")

    @property
    def key(self) -> tuple[int, ...]:
        return (
            self.beta_pow,
            self.t_pow,
            self.kappa_pow,
            *self.mass_pows,
            *self.q_exps,
            *self.p_exps,
        )

    @classmethod
    def from_key(cls, key, coeff) -> "OperatorMonomial":
        return cls(
            coeff=coeff,
            beta_pow=key[0],
            t_pow=key[1],
            kappa_pow=key[2],
            mass_pows=tuple(key[3:6]),
            q_exps=tuple(key[6:9]),
            p_exps=tuple(key[9:12]),
        )

    @property
    def is_momentum_only(self) -> bool:
        return not any(self.q_exps)


class OperatorPolynomial:
    """Immutable sum of normal-ordered monomials."""

    __slots__ = ("_terms", "beta_cut", "t_cut")

    def __init__(
        self,
        terms: Mapping[tuple, GaussianRational] | Iterable[OperatorMonomial] = (),
        beta_cut: int = 1,
        t_cut: int | None = None,
    ):
        self.beta_cut = beta_cut
        self.t_cut = t_cut
        acc: dict[tuple, GaussianRational] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((m.key, m.coeff) for m in terms)
        for key, c in items:
            if not self._keep(key):
                continue
            c = GaussianRational.coerce(c)
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        self._terms = {k: v for k, v in acc.items() if v}

    def _keep(self, key) -> bool:
        if key[0] > self.beta_cut:
            return False
        return self.t_cut is None or key[1] <= self.t_cut

    @classmethod
    def _raw(cls, terms, beta_cut, t_cut) -> "OperatorPolynomial":
        # caller guarantees merged, non-zero, already-truncated terms
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.beta_cut = beta_cut
        obj.t_cut = t_cut
        return obj

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[tuple, GaussianRational]:
        return dict(self._terms)

    def monomials(self) -> Iterator[OperatorMonomial]:
        for key in sorted(self._terms):
            yield OperatorMonomial.from_key(key, self._terms[key])

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def coefficient(self, **exps) -> GaussianRational:
        key = [0] * 12
        for name, e in exps.items():
            key[_NAMES.index(name)] = e
        return self._terms.get(tuple(key), GaussianRational())

    def min_t_pow(self) -> int | None:
        return min((k[1] for k in self._terms), default=None)

    def is_momentum_only(self) -> bool:
        return all(not any(k[6:9]) for k in self._terms)

    def beta_part(self, order: int) -> "OperatorPolynomial":
        return OperatorPolynomial._raw(
            {k: v for k, v in self._terms.items() if k[0] == order},
            self.beta_cut,
            self.t_cut,
        )

    def with_cuts(self, beta_cut: int | None = None, t_cut: int | None = None) -> "OperatorPolynomial":
        return OperatorPolynomial(
            self._terms,
            beta_cut=self.beta_cut if beta_cut is None else beta_cut,
            t_cut=t_cut,
        )

    def substitute_zero(self, symbol: str) -> "OperatorPolynomial":
        """Set ``beta`` or ``kappa`` to zero."""
        idx = _SYMBOL_NAMES.index(symbol)
        return OperatorPolynomial._raw(
            {k: v for k, v in self._terms.items() if k[idx] == 0},
            self.beta_cut,
            self.t_cut,
        )

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "OperatorPolynomial"):
        if (self.beta_cut, self.t_cut) != (other.beta_cut, other.t_cut):
            raise TruncationMismatch(
                f"truncation settings differ: (beta_cut={self.beta_cut}, t_cut={self.t_cut}) "
                f"vs (beta_cut={other.beta_cut}, t_cut={other.t_cut})"
            )

    def _lift(self, other) -> "OperatorPolynomial":
        if isinstance(other, OperatorPolynomial):
            return other
        c = GaussianRational.coerce(other)
        return OperatorPolynomial({_ZERO_KEY: c}, self.beta_cut, self.t_cut)

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            s = acc.get(k)
            s = v if s is None else s + v
            if s:
                acc[k] = s
            else:
                acc.pop(k, None)
        return OperatorPolynomial._raw(acc, self.beta_cut, self.t_cut)

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial._raw(
            {k: -v for k, v in self._terms.items()}, self.beta_cut, self.t_cut
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "OperatorPolynomial":
        c = GaussianRational.coerce(c)
        if not c:
            return OperatorPolynomial._raw({}, self.beta_cut, self.t_cut)
        return OperatorPolynomial._raw(
            {k: v * c for k, v in self._terms.items()}, self.beta_cut, self.t_cut
        )

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(GaussianRational(1) / GaussianRational.coerce(other))

    def __pow__(self, n: int):
        out = self._lift(1)
        for _ in range(n):
            out = multiply(out, self)
        return out

    def __eq__(self, other):
        if isinstance(other, OperatorPolynomial):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"OperatorPolynomial({self.to_text(inline=True)})"

    # -- canonical text form ------------------------------------------------
    def to_text(self, inline: bool = False) -> str:
        """Sorted, exact, line-per-term text used for golden files."""
        if not self._terms:
            return "0"
        lines = []
        for key in sorted(self._terms):
            factors = [f"{n}^{e}" for n, e in zip(_NAMES, key) if e]
            lines.append(" ".join([self._terms[key].to_text(), *factors]))
        return " + ".join(lines) if inline else "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, beta_cut: int = 1, t_cut: int | None = None) -> "OperatorPolynomial":
        text = text.strip()
        if text == "0" or not text:
            return cls({}, beta_cut, t_cut)
        terms: dict[tuple, GaussianRational] = {}
        for line in text.splitlines():
            parts = line.split()
            coeff = GaussianRational.from_text(parts[0])
            key = [0] * 12
            for tok in parts[1:]:
                name, e = tok.split("^")
                key[_NAMES.index(name)] = int(e)
            key = tuple(key)
            terms[key] = terms.get(key, GaussianRational()) + coeff
        return cls(terms, beta_cut, t_cut)


@lru_cache(maxsize=None)
def _reorder(b: int, c: int) -> tuple[tuple[int, int, GaussianRational], ...]:
    """``p^b q^c = sum_k coeff_k q^(c-k) p^(b-k)`` for one canonical pair."""
    out = []
    minus_i_pow = ONE
    for k in range(min(b, c) + 1):
        coeff = GaussianRational(factorial(k) * comb(b, k) * comb(c, k)) * minus_i_pow
        out.append((c - k, b - k, coeff))
        minus_i_pow = minus_i_pow * (-I)
    return tuple(out)


def _mul_keys(ka, kb):
    """Normal-ordered product of two monomial keys -> list of (key, factor)."""
    sym = tuple(ka[i] + kb[i] for i in range(_NSYM))
    per_axis = []
    for ax in range(3):
        pa, qb = ka[9 + ax], kb[6 + ax]
        qa, pb = ka[6 + ax], kb[9 + ax]
        if pa == 0 or qb == 0:
            per_axis.append(((qa + qb, pa + pb, ONE),))
        else:
            per_axis.append(
                tuple((qa + qq, pp + pb, c) for qq, pp, c in _reorder(pa, qb))
            )
    if all(len(x) == 1 for x in per_axis):
        (a0,), (a1,), (a2,) = per_axis
        return [(sym + (a0[0], a1[0], a2[0], a0[1], a1[1], a2[1]), None)]
    out = []
    for a0, a1, a2 in itertools.product(*per_axis):
        c = a0[2] * a1[2] * a2[2]
        out.append((sym + (a0[0], a1[0], a2[0], a0[1], a1[1], a2[1]), c))
    return out


def multiply(lhs: OperatorPolynomial, rhs: OperatorPolynomial) -> OperatorPolynomial:
    """Product ``lhs * rhs`` rewritten in normal order and truncated."""
    lhs._check(rhs)
    beta_cut, t_cut = lhs.beta_cut, lhs.t_cut
    acc: dict[tuple, GaussianRational] = {}
    rterms = list(rhs._terms.items())
    for ka, ca in lhs._terms.items():
        for kb, cb in rterms:
            if ka[0] + kb[0] > beta_cut:
                continue
            if t_cut is not None and ka[1] + kb[1] > t_cut:
                continue
            base = ca * cb
            for key, c in _mul_keys(ka, kb):
                val = base if c is None else base * c
                prev = acc.get(key)
                acc[key] = val if prev is None else prev + val
    return OperatorPolynomial._raw({k: v for k, v in acc.items() if v}, beta_cut, t_cut)


def commutator(x: OperatorPolynomial, y: OperatorPolynomial) -> OperatorPolynomial:
    return multiply(x, y) - multiply(y, x)


def nested_commutator(word: str, x: OperatorPolynomial, y: OperatorPolynomial) -> OperatorPolynomial:
    """Right-nested bracket spelled by ``word`` over the letters X and Y.

    ``nested_commutator("YYX", X, Y)`` is ``[Y, [Y, X]]``.
    """
    ops = {"X": x, "Y": y}
    acc = ops[word[-1]]
    for letter in reversed(word[:-1]):
        acc = commutator(ops[letter], acc)
    return acc


def exp_series(x: OperatorPolynomial, t_order: int) -> OperatorPolynomial:
    """``sum_n x^n / n!`` truncated at ``T^t_order`` (and the beta cut)."""
    if any(k[1] == 0 for k in x._terms):
        offending = OperatorPolynomial._raw(
            {k: v for k, v in x._terms.items() if k[1] == 0}, x.beta_cut, x.t_cut
        )
        raise NonTerminatingSeries(
            f"exponent has T-independent terms: {offending.to_text(inline=True)}"
        )
    cut = t_order if x.t_cut is None else min(t_order, x.t_cut)
    xt = x.with_cuts(t_cut=cut)
    result = xt._lift(1)
    power = xt._lift(1)
    for n in range(1, cut + 1):
        power = multiply(power, xt).scale(Fraction(1, n))
        if power.is_zero():
            break
        result = result + power
    return result.with_cuts(t_cut=x.t_cut)


# BCH levels Gamma_0 .. Gamma_4 as (coefficient, word) pairs
_BCH_TERMS = (
    (Fraction(1), "X"),
    (Fraction(1), "Y"),
    (Fraction(1, 2), "XY"),
    (Fraction(1, 12), "XXY"),
    (Fraction(1, 12), "YYX"),
    (Fraction(1, 24), "XYYX"),
    (Fraction(-1, 720), "YYYYX"),
    (Fraction(-1, 720), "XXXXY"),
    (Fraction(1, 360), "XYYYX"),
    (Fraction(1, 360), "YXXXY"),
    (Fraction(1, 120), "YXYXY"),
    (Fraction(1, 120), "XYXYX"),
)


def bch_compose(x: OperatorPolynomial, y: OperatorPolynomial) -> OperatorPolynomial:
    """Return ``Z`` with ``e^X e^Y = e^Z``, using BCH terms through fifth degree.

    Every right-nested degree-six bracket is computed first; if any survives
    the truncation the series would not terminate and BCHNonTerminating is
    raised naming the offending bracket.
    """
    x._check(y)
    cache: dict[str, OperatorPolynomial] = {"X": x, "Y": y}

    def bracket(word: str) -> OperatorPolynomial:
        if word not in cache:
            cache[word] = commutator(cache[word[0]], bracket(word[1:]))
        return cache[word]

    for prefix in itertools.product("XY", repeat=4):
        word = "".join(prefix) + "XY"
        val = bracket(word)
        if not val.is_zero():
            raise BCHNonTerminating(word, val)

    z = x._lift(0)
    for coeff, word in _BCH_TERMS:
        z = z + bracket(word).scale(coeff)
    return z


def adjoint(x: OperatorPolynomial) -> OperatorPolynomial:
    """Hermitian adjoint, with T, kappa, beta and the masses treated as real."""
    acc = x._lift(0)
    for key, c in x._terms.items():
        sym = key[:_NSYM]
        pmono = OperatorPolynomial._raw({sym + (0, 0, 0) + key[9:12]: c.conjugate()}, x.beta_cut, x.t_cut)
        qmono = OperatorPolynomial._raw({(0,) * _NSYM + key[6:9] + (0, 0, 0): ONE}, x.beta_cut, x.t_cut)
        acc = acc + multiply(pmono, qmono)
    return acc


def is_anti_hermitian(x: OperatorPolynomial) -> bool:
    return (adjoint(x) + x).is_zero()


# -- constructors -----------------------------------------------------------
def _atom(index: int, beta_cut: int = 1, t_cut: int | None = None, power: int = 1) -> OperatorPolynomial:
    key = [0] * 12
    key[index] = power
    return OperatorPolynomial._raw({tuple(key): ONE}, beta_cut, t_cut)


def q(i: int, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return _atom(_NSYM + i - 1, beta_cut, t_cut)


def p(i: int, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return _atom(_NSYM + 3 + i - 1, beta_cut, t_cut)


def T(power: int = 1, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return OperatorPolynomial({tuple([0, power] + [0] * 10): ONE}, beta_cut, t_cut)


def kappa(power: int = 1, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return _atom(2, beta_cut, t_cut, power)


def beta(power: int = 1, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return OperatorPolynomial({tuple([power] + [0] * 11): ONE}, beta_cut, t_cut)


def inv_mass(i: int, power: int = 1, beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    key = [0] * 12
    key[2 + i] = power
    return OperatorPolynomial._raw({tuple(key): ONE}, beta_cut, t_cut)


def one(beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return OperatorPolynomial._raw({_ZERO_KEY: ONE}, beta_cut, t_cut)


def zero(beta_cut: int = 1, t_cut: int | None = None) -> OperatorPolynomial:
    return OperatorPolynomial._raw({}, beta_cut, t_cut)
