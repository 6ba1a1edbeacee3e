"""Exact Laurent polynomials over the rationals.

A :class:`LaurentPolynomial` in ``n`` variables is a finite map from integer
exponent vectors (entries may be negative) to nonzero :class:`~fractions.Fraction`
coefficients.  Values are immutable; every operation returns a new, normalized
polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

Exponent = tuple[int, ...]

__all__ = ["Exponent", "LaurentPolynomial", "as_fraction", "format_fraction"]


def as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


def format_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class LaurentPolynomial:
    """Element of Q[z1^{+-1}, ..., zn^{+-1}].

    >>> z1, z2 = LaurentPolynomial.gens(2)
    >>> str((z1 + z2) * (z1 - z2))
    '1*z1^2 - 1*z2^2'
    """

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | Iterable = ()):
        if nvars < 1:
            raise ValueError("a Laurent polynomial needs at least one variable")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exponent, Fraction] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has wrong length for {nvars} variables")
            c = as_fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
        self._n = nvars
        self._terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> "LaurentPolynomial":
        # terms must already be normalized (no zeros)
        obj = object.__new__(cls)
        obj._n = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "LaurentPolynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c=1) -> "LaurentPolynomial":
        c = as_fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def monomial(cls, exponent: Iterable[int], c=1) -> "LaurentPolynomial":
        exponent = tuple(int(e) for e in exponent)
        c = as_fraction(c)
        return cls._raw(len(exponent), {exponent: c} if c else {})

    @classmethod
    def variable(cls, nvars: int, i: int, power: int = 1) -> "LaurentPolynomial":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[i] = power
        return cls.monomial(exp)

    @classmethod
    def gens(cls, nvars: int) -> tuple["LaurentPolynomial", ...]:
        return tuple(cls.variable(nvars, i) for i in range(nvars))

    # -- accessors --------------------------------------------------------
    @property
    def nvars(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exponent, Fraction]]:
        return iter(self._terms.items())

    def exponents(self) -> list[Exponent]:
        return list(self._terms)

    def coefficient(self, exponent: Iterable[int]) -> Fraction:
        return self._terms.get(tuple(exponent), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and (0,) * self._n in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self._n, Fraction(0))

    def is_unit(self) -> bool:
        """True iff this is a single term ``c*z^a`` with ``c != 0``."""
        return len(self._terms) == 1

    def max_abs_exponent(self) -> int:
        return max((abs(e) for exp in self._terms for e in exp), default=0)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            if other._n != self._n:
                raise ValueError(
                    f"variable count mismatch: {self._n} vs {other._n}"
                )
            return other
        if isinstance(other, (int, Rational)):
            return LaurentPolynomial.constant(self._n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPolynomial._raw(self._n, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial._raw(self._n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, LaurentPolynomial):
            c = as_fraction(other)
            if not c:
                return LaurentPolynomial.zero(self._n)
            return LaurentPolynomial._raw(self._n, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPolynomial._raw(self._n, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = LaurentPolynomial.constant(self._n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "LaurentPolynomial":
        """Multiplicative inverse; defined only for units."""
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not a unit of the Laurent ring")
        (e, c), = self._terms.items()
        return LaurentPolynomial._raw(self._n, {tuple(-a for a in e): 1 / c})

    def diff(self, i: int) -> "LaurentPolynomial":
        """Formal partial derivative with respect to variable ``i`` (0-based)."""
        if not 0 <= i < self._n:
            raise IndexError(f"variable index {i} out of range for {self._n} variables")
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                out[e2] = c * k
        return LaurentPolynomial._raw(self._n, out)

    def shift(self, exponent: Iterable[int]) -> "LaurentPolynomial":
        """Multiply by the monomial ``z^exponent``."""
        exponent = tuple(exponent)
        return LaurentPolynomial._raw(
            self._n, {tuple(a + b for a, b in zip(e, exponent)): c for e, c in self._terms.items()}
        )

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, LaurentPolynomial):
            return self._n == other._n and self._terms == other._terms
        if isinstance(other, (int, Rational)):
            c = as_fraction(other)
            return self._terms == ({(0,) * self._n: c} if c else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, frozenset(self._terms.items())))
        return self._hash

    # -- text -------------------------------------------------------------
    def __repr__(self):
        return f"LaurentPolynomial({self._n}, {self!s})"

    def __str__(self):
        from .textio import format_terms, poly_terms

        return format_terms(poly_terms(self))
