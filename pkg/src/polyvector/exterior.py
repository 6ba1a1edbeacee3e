"""Graded exterior calculus with Laurent coefficients.

Two kinds of graded element share one representation: a map from strictly
increasing 0-based index tuples to :class:`LaurentPolynomial` coefficients.

* :class:`Multivector` -- the tuple ``(i1, ..., ik)`` stands for
  ``d/dz_{i1} ^ ... ^ d/dz_{ik}``.  Its grading in the polyvector algebra is
  ``-k`` (see :meth:`Multivector.signed_degree`); storage uses ``k``.
* :class:`DifferentialForm` -- the tuple stands for ``dz_{i1} ^ ... ^ dz_{ik}``,
  of degree ``+k``.

Contraction convention: for a decomposable multivector ``u1 ^ ... ^ uk`` the
interior product is ``i_{u1} o i_{u2} o ... o i_{uk}`` (the rightmost factor
is contracted first).  Hence ``i_{d1^d2}(dz1^dz2) = -1``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Iterable, Iterator, Mapping

from .coeff import LaurentPolynomial

Basis = tuple[int, ...]

__all__ = [
    "Basis",
    "DifferentialForm",
    "Multivector",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "sort_with_sign",
    "wedge",
]


def sort_with_sign(indices: Iterable[int]) -> tuple[int, Basis]:
    """Sort an index sequence, returning ``(sign, sorted)``; sign 0 on repeats."""
    idx = list(indices)
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(idx)):
        b = a
        while b > 0 and idx[b - 1] > idx[b]:
            idx[b - 1], idx[b] = idx[b], idx[b - 1]
            sign = -sign
            b -= 1
    for a in range(1, len(idx)):
        if idx[a] == idx[a - 1]:
            return 0, ()
    return sign, tuple(idx)


def _merge_sign(a: Basis, b: Basis) -> int:
    """Sign of the shuffle sorting ``a + b`` (both sorted); 0 if they overlap."""
    if not a or not b:
        return 1
    sb = set(b)
    if any(i in sb for i in a):
        return 0
    # parity of pairs (x in a, y in b) with x > y
    inversions = sum(1 for x in a for y in b if y < x)
    return -1 if inversions & 1 else 1


class _Graded:
    """Shared storage and linear structure for multivectors and forms."""

    __slots__ = ("_dim", "_comps", "_hash")
    _symbol = "?"

    def __init__(self, dim: int, components: Mapping[Iterable[int], object] | Iterable = ()):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        items = components.items() if isinstance(components, Mapping) else components
        comps: dict[Basis, LaurentPolynomial] = {}
        for idx, coeff in items:
            idx = tuple(idx)
            if any(not 0 <= i < dim for i in idx):
                raise IndexError(f"index tuple {idx} out of range for dimension {dim}")
            sign, key = sort_with_sign(idx)
            if not sign:
                continue
            coeff = _as_poly(coeff, dim)
            if sign < 0:
                coeff = -coeff
            total = comps[key] + coeff if key in comps else coeff
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
        self._dim = dim
        self._comps = comps
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, comps: dict[Basis, LaurentPolynomial]):
        obj = object.__new__(cls)
        obj._dim = dim
        obj._comps = comps
        obj._hash = None
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int):
        return cls._raw(dim, {})

    @classmethod
    def scalar(cls, dim: int, f=1):
        f = _as_poly(f, dim)
        return cls._raw(dim, {(): f} if f else {})

    @classmethod
    def basis(cls, dim: int, *indices: int, coeff=1):
        return cls(dim, {tuple(indices): coeff})

    # -- accessors --------------------------------------------------------
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def components(self) -> dict[Basis, LaurentPolynomial]:
        return dict(self._comps)

    def items(self) -> Iterator[tuple[Basis, LaurentPolynomial]]:
        return iter(self._comps.items())

    def __getitem__(self, idx) -> LaurentPolynomial:
        if isinstance(idx, int):
            idx = (idx,)
        sign, key = sort_with_sign(idx)
        if not sign:
            return LaurentPolynomial.zero(self._dim)
        c = self._comps.get(key)
        if c is None:
            return LaurentPolynomial.zero(self._dim)
        return c if sign > 0 else -c

    def is_zero(self) -> bool:
        return not self._comps

    def __bool__(self) -> bool:
        return bool(self._comps)

    def degrees(self) -> set[int]:
        """Unsigned degrees (tuple lengths) present."""
        return {len(k) for k in self._comps}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        """Unsigned degree of a homogeneous element (0 for zero)."""
        degs = self.degrees()
        if len(degs) > 1:
            raise ValueError(f"element is not homogeneous: degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def homogeneous_part(self, k: int):
        return type(self)._raw(self._dim, {b: c for b, c in self._comps.items() if len(b) == k})

    def homogeneous_parts(self) -> dict[int, "_Graded"]:
        return {k: self.homogeneous_part(k) for k in sorted(self.degrees())}

    def map_coefficients(self, fn):
        out = {}
        for b, c in self._comps.items():
            c2 = fn(c)
            if c2:
                out[b] = c2
        return type(self)._raw(self._dim, out)

    # -- linear structure -------------------------------------------------
    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"kind mismatch: {type(self).__name__} vs {type(other).__name__}")
        if other._dim != self._dim:
            raise ValueError(f"dimension mismatch: {self._dim} vs {other._dim}")

    def __add__(self, other):
        if isinstance(other, (int, Rational, LaurentPolynomial)):
            other = type(self).scalar(self._dim, other)
        self._check(other)
        out = dict(self._comps)
        for b, c in other._comps.items():
            s = out[b] + c if b in out else c
            if s:
                out[b] = s
            else:
                out.pop(b, None)
        return type(self)._raw(self._dim, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._raw(self._dim, {b: -c for b, c in self._comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, f):
        """Multiplication by a scalar function (rational or Laurent polynomial)."""
        if not isinstance(f, (int, Rational, LaurentPolynomial)):
            return NotImplemented
        f = _as_poly(f, self._dim)
        return self.map_coefficients(lambda c: c * f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Rational, LaurentPolynomial)):
            other = type(self).scalar(self._dim, other)
        if type(other) is not type(self):
            return NotImplemented
        return self._dim == other._dim and self._comps == other._comps

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, self._dim, frozenset(self._comps.items())))
        return self._hash

    def wedge(self, other):
        return wedge(self, other)

    def __repr__(self):
        return f"{type(self).__name__}({self._dim}, {self!s})"

    def __str__(self):
        from .textio import format_graded

        return format_graded(self)


class Multivector(_Graded):
    """Polyvector field; basis tuple ``(i1<...<ik)`` is ``d_{i1}^...^d_{ik}``."""

    __slots__ = ()
    _symbol = "d"

    def signed_degree(self) -> int:
        """Grading in the polyvector algebra: ``-k`` for a k-vector."""
        return -self.degree

    def is_vector_field(self) -> bool:
        return self.degrees() <= {1}

    def vector_components(self) -> list[LaurentPolynomial]:
        """Coefficients ``v_i`` of a vector field ``sum v_i d_i``."""
        if not self.is_vector_field():
            raise ValueError("not a vector field")
        return [self[(i,)] for i in range(self._dim)]

    @classmethod
    def vector_field(cls, comps: Iterable) -> "Multivector":
        comps = list(comps)
        dim = len(comps)
        return cls(dim, {(i,): c for i, c in enumerate(comps)})

    def apply(self, f: LaurentPolynomial) -> LaurentPolynomial:
        """Derivative of a function along a vector field."""
        out = LaurentPolynomial.zero(self._dim)
        for i, vi in enumerate(self.vector_components()):
            if vi:
                out = out + vi * f.diff(i)
        return out


class DifferentialForm(_Graded):
    """Differential form; basis tuple ``(i1<...<ik)`` is ``dz_{i1}^...^dz_{ik}``."""

    __slots__ = ()
    _symbol = "dz"

    @classmethod
    def one_form(cls, comps: Iterable) -> "DifferentialForm":
        comps = list(comps)
        return cls(len(comps), {(i,): c for i, c in enumerate(comps)})

    @classmethod
    def top(cls, dim: int, f=1) -> "DifferentialForm":
        return cls(dim, {tuple(range(dim)): f})


def _as_poly(f, dim: int) -> LaurentPolynomial:
    if isinstance(f, LaurentPolynomial):
        if f.nvars != dim:
            raise ValueError(f"coefficient has {f.nvars} variables, expected {dim}")
        return f
    return LaurentPolynomial.constant(dim, f)


def basis_elements(dim: int, k: int) -> list[Basis]:
    return list(combinations(range(dim), k))


def wedge(a: _Graded, b: _Graded) -> _Graded:
    """Exterior product of two elements of the same kind and dimension."""
    a._check(b)
    out: dict[Basis, LaurentPolynomial] = {}
    for ia, ca in a._comps.items():
        for ib, cb in b._comps.items():
            sign = _merge_sign(ia, ib)
            if not sign:
                continue
            key = tuple(sorted(ia + ib))
            c = ca * cb
            if sign < 0:
                c = -c
            s = out[key] + c if key in out else c
            if s:
                out[key] = s
            else:
                del out[key]
    return type(a)._raw(a._dim, out)


def _contract_index(i: int, form_basis: Basis) -> tuple[int, Basis]:
    """``i_{d_i}(dz_J)`` on a basis element: ``(sign, J minus i)``; sign 0 if absent."""
    try:
        m = form_basis.index(i)
    except ValueError:
        return 0, ()
    return (-1 if m & 1 else 1), form_basis[:m] + form_basis[m + 1:]


def _contract_basis(mv_basis: Basis, form_basis: Basis) -> tuple[int, Basis]:
    sign = 1
    rest = form_basis
    for i in reversed(mv_basis):
        s, rest = _contract_index(i, rest)
        if not s:
            return 0, ()
        sign *= s
    return sign, rest


def interior_product(v: Multivector, omega: DifferentialForm) -> DifferentialForm:
    """Contraction ``i_v omega`` (rightmost factor of ``v`` contracted first)."""
    if not isinstance(v, Multivector) or not isinstance(omega, DifferentialForm):
        raise TypeError("interior_product expects (Multivector, DifferentialForm)")
    if v.dim != omega.dim:
        raise ValueError(f"dimension mismatch: {v.dim} vs {omega.dim}")
    out: dict[Basis, LaurentPolynomial] = {}
    for iv, cv in v._comps.items():
        for iw, cw in omega._comps.items():
            if len(iv) > len(iw):
                continue
            sign, key = _contract_basis(iv, iw)
            if not sign:
                continue
            c = cv * cw
            if sign < 0:
                c = -c
            s = out[key] + c if key in out else c
            if s:
                out[key] = s
            else:
                del out[key]
    return DifferentialForm._raw(omega.dim, out)


def exterior_derivative(omega: DifferentialForm) -> DifferentialForm:
    if not isinstance(omega, DifferentialForm):
        raise TypeError("exterior_derivative expects a DifferentialForm")
    dim = omega.dim
    out: dict[Basis, LaurentPolynomial] = {}
    for idx, c in omega._comps.items():
        for j in range(dim):
            if j in idx:
                continue
            dc = c.diff(j)
            if not dc:
                continue
            sign, key = sort_with_sign((j,) + idx)
            term = dc if sign > 0 else -dc
            s = out[key] + term if key in out else term
            if s:
                out[key] = s
            else:
                del out[key]
    return DifferentialForm._raw(dim, out)


def lie_derivative(v: Multivector, omega: DifferentialForm) -> DifferentialForm:
    """Cartan's formula ``L_v = d i_v + i_v d`` for a vector field ``v``."""
    if not isinstance(v, Multivector) or not v.is_vector_field():
        raise ValueError("lie_derivative needs a vector field")
    return exterior_derivative(interior_product(v, omega)) + interior_product(
        v, exterior_derivative(omega)
    )
