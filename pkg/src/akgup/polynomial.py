"""Sparse commutative polynomials with complex floating-point coefficients."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], complex] | None = None):
        self.nvars = nvars
        self.terms: dict[tuple[int, ...], complex] = {}
        for k, v in (terms or {}).items():
            if len(k) != nvars:
                raise ValueError(f"exponent {k} does not match {nvars} variables")
            if v != 0:
                self.terms[tuple(k)] = self.terms.get(tuple(k), 0) + complex(v)

    @classmethod
    def constant(cls, nvars: int, c: complex) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, index: int, c: complex = 1.0) -> "Poly":
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): c})

    @classmethod
    def linear(cls, coeffs: Sequence[complex], const: complex = 0.0) -> "Poly":
        n = len(coeffs)
        out = cls.constant(n, const)
        for i, c in enumerate(coeffs):
            out = out + cls.var(n, i, c)
        return out

    def copy(self) -> "Poly":
        return Poly(self.nvars, self.terms)

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.nvars, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.nvars, {k: v * other for k, v in self.terms.items()})
        out: dict[tuple[int, ...], complex] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.constant(self.nvars, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def diff(self, index: int) -> "Poly":
        out = {}
        for k, v in self.terms.items():
            if k[index]:
                kk = list(k)
                kk[index] -= 1
                out[tuple(kk)] = v * k[index]
        return Poly(self.nvars, out)

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def __call__(self, *values) -> complex:
        total = 0j
        for k, v in self.terms.items():
            term = v
            for x, e in zip(values, k):
                if e:
                    term = term * x**e
            total += term
        return total

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute variable ``i`` by the polynomial ``subs[i]``."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        nv = subs[0].nvars
        powers: list[dict[int, Poly]] = [{0: Poly.constant(nv, 1.0)} for _ in subs]

        def pw(i, e):
            cache = powers[i]
            if e not in cache:
                cache[e] = pw(i, e - 1) * subs[i]
            return cache[e]

        out = Poly(nv)
        for k, v in self.terms.items():
            term = Poly.constant(nv, v)
            for i, e in enumerate(k):
                if e:
                    term = term * pw(i, e)
            out = out + term
        return out

    def coefficient(self, exps: tuple[int, ...]) -> complex:
        return self.terms.get(tuple(exps), 0j)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms!r})"


def evaluate_many(poly: Poly, *grids: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over broadcastable arrays."""
    shape = np.broadcast_shapes(*(np.shape(g) for g in grids))
    out = np.zeros(shape, dtype=complex)
    cache: dict[tuple[int, int], np.ndarray] = {}
    for k, v in poly.terms.items():
        term = np.full(shape, v, dtype=complex)
        for i, e in enumerate(k):
            if e:
                if (i, e) not in cache:
                    cache[(i, e)] = np.asarray(grids[i]) ** e
                term = term * cache[(i, e)]
        out += term
    return out
