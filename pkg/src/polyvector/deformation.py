"""H^1 exotic deformations and rank-2 unipotent local systems.

A local system ``0 -> C -> L -> C -> 0`` is represented by the flat
connection on the free module ``O^2``

    nabla(s1, s2) = (ds1 + omega s2, ds2),    d omega = 0,

so ``(1, 0)`` spans the sub-system.  From it we build the filtered bundles
``B^i = Omega^i + L (x) Omega^(i+1)`` (elements ``(a, b1, b2)``) with the
differential ``(a, b1, b2) -> (da, db1 + omega^b2, db2)``, and the algebra
with operator ``(E^0 + E^-1, delta)``:

* ``E^-1`` = pairs ``(g, u)``, ``g`` in O (the sub-module), ``u`` a vector field,
  acting on ``B^i`` by ``(i_u a, i_u b1 + s g a, i_u b2 + s delta(u) a)``,
  ``s = (-1)^i``;
* ``E^0`` = pairs ``(theta, f)``, ``theta`` a 1-form (the sub-module), acting by
  ``(f a, f b1 + s theta^a, f b2 + s df^a)``.

The operator is ``delta(phi, u) = ([phi, d] - (L_u - delta(u)), delta(u))``,
where ``L_u`` is the Lie derivative along ``u`` twisted by the connection;
the bracket alone is not O-linear.  Evaluating the remainder gives
``delta(g, u) = (dg + omega delta(u), delta(u))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .bv import VolumeForm, bv_delta, contract_volume, invert_contract
from .coeff import LaurentPolynomial
from .exterior import (
    DifferentialForm,
    Multivector,
    basis_elements,
    exterior_derivative,
    interior_product,
    lie_derivative,
    wedge,
)
from .homological import ExactnessReport, check_exactness
from .linalg import QMatrix, nullspace, rank, solve

__all__ = [
    "BElement",
    "ConnectionDatum",
    "Extraction",
    "DeformationDatum",
    "DeformationReport",
    "ExtractionError",
    "FilteredBundle",
    "FlatnessReport",
    "Intertwiner",
    "WindowError",
    "build_E_algebra",
    "build_extension_bundles",
    "act_e0",
    "canonical_delta",
    "commutator_remainder",
    "d_squared_defects",
    "class_dimension",
    "extract_local_system",
    "extraction_report",
    "find_intertwiner",
    "flatness_check",
    "is_exact",
    "solve_filtered_hom",
    "validate_deformation",
]


class WindowError(ValueError):
    """The exponent window is too small for the requested computation."""


class ExtractionError(ValueError):
    """The kernel of ``A^-1 -> A^0`` does not have rank 2."""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _function(form: DifferentialForm) -> LaurentPolynomial:
    return form[()]


# -- connections ------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectionDatum:
    """Unipotent connection ``[[0, omega], [0, 0]]`` on ``O^2``.

    ``ring`` is ``"laurent"`` (the torus) or ``"polynomial"`` (affine space).
    ``extension_class_marker`` names the chosen splitting of the underlying
    extension; only the standard one, ``"split"``, is produced here.
    """

    omega: DifferentialForm
    extension_class_marker: str = "split"
    ring: str = "laurent"

    def __post_init__(self):
        if self.omega.degrees() - {1}:
            raise ValueError("the connection form must be a 1-form")
        if self.ring not in ("laurent", "polynomial"):
            raise ValueError(f"unknown ring {self.ring!r}")
        if self.ring == "polynomial":
            for _, c in self.omega.items():
                if any(e < 0 for exp in c.exponents() for e in exp):
                    raise ValueError("negative exponent in a polynomial-ring connection")

    @classmethod
    def trivial(cls, n: int, ring: str = "laurent") -> "ConnectionDatum":
        return cls(DifferentialForm.zero(n), ring=ring)

    @property
    def n(self) -> int:
        return self.omega.dim

    def matrix(self) -> list[list[DifferentialForm]]:
        z = DifferentialForm.zero(self.n)
        return [[z, self.omega], [z, z]]

    def is_flat(self) -> bool:
        return not exterior_derivative(self.omega)

    def nabla(self, s1: DifferentialForm, s2: DifferentialForm):
        """Covariant derivative on ``L (x) Omega^k``."""
        return exterior_derivative(s1) + wedge(self.omega, s2), exterior_derivative(s2)


@dataclass
class FlatnessReport:
    defects: dict  # (row, col) -> nonzero curvature entry

    @property
    def passed(self) -> bool:
        return not self.defects

    def to_lines(self) -> list[str]:
        lines = [f"flat = {'pass' if self.passed else 'fail'}"]
        lines += [f"curvature.{i + 1}.{j + 1} = {v}" for (i, j), v in sorted(self.defects.items())]
        return lines


def flatness_check(a: Sequence[Sequence[DifferentialForm]]) -> FlatnessReport:
    """Curvature ``dA + A^A`` of a square matrix of 1-forms, entry by entry."""
    size = len(a)
    if any(len(row) != size for row in a):
        raise ValueError("connection matrix must be square")
    dims = {x.dim for row in a for x in row}
    if len(dims) != 1:
        raise ValueError("entries have different dimensions")
    for row in a:
        for x in row:
            if x and x.degrees() != {1}:
                raise ValueError("entries must be 1-forms")
    defects = {}
    for i in range(size):
        for k in range(size):
            curv = exterior_derivative(a[i][k])
            for j in range(size):
                curv = curv + wedge(a[i][j], a[j][k])
            if curv:
                defects[(i, k)] = curv
    return FlatnessReport(defects)


# -- filtered bundles --------------------------------------------------------------

@dataclass(frozen=True)
class BElement:
    """``(a, b1, b2)`` in ``B^i``; ``b1`` lies in the innermost filtration step."""

    a: DifferentialForm
    b1: DifferentialForm
    b2: DifferentialForm

    def __add__(self, o):
        return BElement(self.a + o.a, self.b1 + o.b1, self.b2 + o.b2)

    def __sub__(self, o):
        return BElement(self.a - o.a, self.b1 - o.b1, self.b2 - o.b2)

    def __mul__(self, f):
        return BElement(self.a * f, self.b1 * f, self.b2 * f)

    def is_zero(self) -> bool:
        return not (self.a or self.b1 or self.b2)


def _forms_basis(n: int, k: int) -> list:
    return basis_elements(n, k) if 0 <= k <= n else []


@dataclass(frozen=True)
class FilteredBundle:
    """``B^i = Omega^i + L (x) Omega^(i+1)`` with its three-step filtration flagged.

    ``labels`` lists the free basis as ``(part, form basis)`` with ``part`` in
    ``a``, ``b1``, ``b2``; ``steps`` gives the ranks of
    ``Omega^(i+1) c L (x) Omega^(i+1) c B^i``.
    """

    datum: ConnectionDatum
    index: int

    @property
    def n(self) -> int:
        return self.datum.n

    @property
    def labels(self) -> list[tuple[str, tuple]]:
        n, i = self.n, self.index
        return ([("a", b) for b in _forms_basis(n, i)]
                + [("b1", b) for b in _forms_basis(n, i + 1)]
                + [("b2", b) for b in _forms_basis(n, i + 1)])

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def steps(self) -> tuple[int, int, int]:
        r = len(_forms_basis(self.n, self.index + 1))
        return r, 2 * r, self.rank

    def zero(self) -> BElement:
        z = DifferentialForm.zero(self.n)
        return BElement(z, z, z)

    def element(self, label: tuple[str, tuple], f=1) -> BElement:
        part, b = label
        form = DifferentialForm.basis(self.n, *b, coeff=f)
        z = DifferentialForm.zero(self.n)
        return BElement(form if part == "a" else z, form if part == "b1" else z, form if part == "b2" else z)

    def to_vector(self, x: BElement) -> list[LaurentPolynomial]:
        parts = {"a": x.a, "b1": x.b1, "b2": x.b2}
        return [parts[p][b] for p, b in self.labels]

    def from_vector(self, vec: Sequence[LaurentPolynomial]) -> BElement:
        out = self.zero()
        for lab, f in zip(self.labels, vec):
            if f:
                out = out + self.element(lab, f)
        return out

    def d(self, x: BElement) -> BElement:
        """``(da, db1 + omega^b2, db2)``, landing in ``B^(i+1)``."""
        b1, b2 = self.datum.nabla(x.b1, x.b2)
        return BElement(exterior_derivative(x.a), b1, b2)

    def spanning_set(self, ring: str | None = None) -> list[BElement]:
        """Basis vectors times ``1`` and ``z_k^(+-1)`` (``z_k`` only for polynomials)."""
        ring = ring or self.datum.ring
        n = self.n
        mons = [LaurentPolynomial.constant(n, 1)]
        for k in range(n):
            mons.append(LaurentPolynomial.variable(n, k))
            if ring == "laurent":
                mons.append(LaurentPolynomial.variable(n, k, -1))
        return [self.element(lab, m) for lab in self.labels for m in mons]


def build_extension_bundles(datum: ConnectionDatum, i: int) -> FilteredBundle:
    """``B^i`` for ``-1 <= i <= n``; raises if the connection is not flat."""
    if not datum.is_flat():
        raise ValueError(f"connection is not flat: d omega = {exterior_derivative(datum.omega)}")
    if not -1 <= i <= datum.n:
        raise ValueError(f"index {i} outside [-1, {datum.n}]")
    return FilteredBundle(datum, i)


def d_squared_defects(bundle: FilteredBundle) -> list[BElement]:
    """Spanning elements of ``B^i`` whose image under ``d o d`` is nonzero."""
    nxt = FilteredBundle(bundle.datum, bundle.index + 1)
    return [x for x in bundle.spanning_set() if not nxt.d(bundle.d(x)).is_zero()]


# -- E^{-1}, E^0 acting on B ----------------------------------------------------------

def _box(n: int, lo: int, hi: int):
    return [tuple(e) for e in itertools.product(range(lo, hi + 1), repeat=n)]


@dataclass
class HomSolution:
    """Filtration-preserving O-linear maps ``B^i -> B^(i+j)`` with prescribed graded pieces."""

    particular: dict  # (row, col) -> LaurentPolynomial
    free_entries: list  # (row, col) positions left free
    free_dim: int  # dimension of the free part within the window

    def matrix(self, fill: dict | None = None) -> dict:
        m = dict(self.particular)
        for k, v in (fill or {}).items():
            if k not in self.free_entries:
                raise ValueError(f"entry {k} is not free")
            m[k] = m.get(k, LaurentPolynomial.zero(v.nvars)) + v
        return m


def _operator_block(src: list, tgt: list, fn, n: int) -> dict:
    """Matrix entries of an O-linear map on forms, given on basis forms."""
    out = {}
    tindex = {b: r for r, b in enumerate(tgt)}
    for c, b in enumerate(src):
        img = fn(DifferentialForm.basis(n, *b))
        for tb, coeff in img.items():
            out[(tindex[tb], c)] = coeff
    return out


def solve_filtered_hom(datum: ConnectionDatum, j: int, i: int, u, du: LaurentPolynomial,
                       window: tuple[int, int]) -> HomSolution:
    """Solve for ``phi: B^i -> B^(i+j)`` preserving the filtration, with the given graded pieces.

    For ``j = -1`` the pieces are ``i_u`` on ``L (x) Omega^(i+1)`` and
    ``i_u + (-1)^i du`` on ``B^i / Omega^(i+1)``; for ``j = 0``, ``u`` is a
    function and the pieces are multiplication by ``u`` and ``u + (-1)^i du^``.
    Each matrix entry is a Laurent polynomial with exponents in ``window``
    (per variable); the conditions are solved as a linear system over Q.
    """
    n = datum.n
    src, tgt = FilteredBundle(datum, i), FilteredBundle(datum, i + j)
    s_idx = {lab: c for c, lab in enumerate(src.labels)}
    t_idx = {lab: r for r, lab in enumerate(tgt.labels)}
    src_a, src_b = _forms_basis(n, i), _forms_basis(n, i + 1)
    tgt_a, tgt_b = _forms_basis(n, i + j), _forms_basis(n, i + j + 1)
    s = _sign(i)
    if j == -1:
        act = lambda form: interior_product(u, form)  # noqa: E731
    elif j == 0:
        act = lambda form: form * u  # noqa: E731
    else:
        raise ValueError("only j in {0, -1}")

    target: dict = {}

    def put(block: dict, spart: str, sbasis: list, tpart: str, tbasis: list):
        for (r, c), v in block.items():
            target[(t_idx[(tpart, tbasis[r])], s_idx[(spart, sbasis[c])])] = v

    put(_operator_block(src_a, tgt_a, act, n), "a", src_a, "a", tgt_a)
    put(_operator_block(src_b, tgt_b, act, n), "b1", src_b, "b1", tgt_b)
    put(_operator_block(src_b, tgt_b, act, n), "b2", src_b, "b2", tgt_b)
    if j == -1:
        extra = lambda form: form * du * s  # noqa: E731
    else:
        extra = lambda form: wedge(DifferentialForm.one_form([du.diff(k) for k in range(n)]), form) * s  # noqa: E731
    put(_operator_block(src_a, tgt_b, extra, n), "a", src_a, "b2", tgt_b)

    free = [(t_idx[("b1", tb)], s_idx[("a", sb)]) for sb in src_a for tb in tgt_b]
    free_set = set(free)
    entries = [(r, c) for r in range(tgt.rank) for c in range(src.rank)]
    mons = _box(n, *window)
    unknowns = {(r, c, m): k for k, ((r, c), m) in enumerate(itertools.product(entries, mons))}
    eqs: dict = {}
    rhs: dict = {}
    row = 0
    for (r, c) in entries:
        if (r, c) in free_set:
            continue
        val = target.get((r, c), LaurentPolynomial.zero(n))
        for e in val.exponents():
            if e not in set(mons):
                raise WindowError(f"entry ({r}, {c}) needs exponent {e} outside the window {window}")
        for m in mons:
            eqs[(row, unknowns[(r, c, m)])] = 1
            cval = val.coefficient(m)
            if cval:
                rhs[row] = cval
            row += 1
    system = QMatrix(row, len(unknowns), eqs)
    x = solve(system, rhs)
    if x is None:
        raise ValueError("filtration conditions are inconsistent")
    particular: dict = {}
    inv = {k: key for key, k in unknowns.items()}
    for k, v in x.items():
        r, c, m = inv[k]
        particular[(r, c)] = particular.get((r, c), LaurentPolynomial.zero(n)) + LaurentPolynomial.monomial(m, v)
    free_dim = len(nullspace(system))
    return HomSolution({k: v for k, v in particular.items() if v}, free, free_dim)


def _apply(matrix: dict, src: FilteredBundle, tgt: FilteredBundle, x: BElement) -> BElement:
    vec = src.to_vector(x)
    out = [LaurentPolynomial.zero(src.n) for _ in range(tgt.rank)]
    for (r, c), v in matrix.items():
        if vec[c]:
            out[r] = out[r] + v * vec[c]
    return tgt.from_vector(out)


def _entry_window(datum: ConnectionDatum, u, g) -> tuple[int, int]:
    exps = [e for c in ([g] + [c for _, c in u.items()]) for exp in c.exponents() for e in exp]
    lo, hi = min(exps, default=0) - 1, max(exps, default=0) + 1
    if datum.ring == "polynomial":
        lo = max(lo, 0)
    return lo, hi


def e_minus_one_matrix(datum: ConnectionDatum, phi: VolumeForm, g: LaurentPolynomial,
                       u: Multivector, i: int) -> dict:
    """Matrix of ``phi_(g,u): B^i -> B^(i-1)``, obtained from :func:`solve_filtered_hom`."""
    du = bv_delta(phi, u)[()] if u else LaurentPolynomial.zero(datum.n)
    sol = solve_filtered_hom(datum, -1, i, u, du, _entry_window(datum, u, g))
    tgt_b = _forms_basis(datum.n, i)
    # the natural (index independent) choice for the free block: (-1)^i g Id
    fill = {}
    for k, (r, c) in enumerate(sol.free_entries):
        if tgt_b and r - len(_forms_basis(datum.n, i - 1)) == c:
            fill[(r, c)] = g * _sign(i)
    return sol.matrix(fill)


def act_e0(datum: ConnectionDatum, theta: DifferentialForm, f: LaurentPolynomial,
           i: int, x: BElement) -> BElement:
    """Action of ``(theta, f)`` in ``E^0`` on ``B^i``."""
    s = _sign(i)
    df = DifferentialForm.one_form([f.diff(k) for k in range(datum.n)])
    return BElement(x.a * f, x.b1 * f + wedge(theta, x.a) * s, x.b2 * f + wedge(df, x.a) * s)


def twisted_lie(datum: ConnectionDatum, u: Multivector, x: BElement) -> BElement:
    """``L_u`` on ``B`` through the connection: ``(L_u a, L_u b1 + <omega,u> b2, L_u b2)``."""
    if not u:
        return BElement(x.a * 0, x.b1 * 0, x.b2 * 0)
    pairing = _function(interior_product(u, datum.omega)) if datum.omega else LaurentPolynomial.zero(datum.n)
    return BElement(lie_derivative(u, x.a), lie_derivative(u, x.b1) + x.b2 * pairing, lie_derivative(u, x.b2))


def commutator_remainder(datum: ConnectionDatum, phi: VolumeForm, g: LaurentPolynomial,
                         u: Multivector, i: int, x: BElement, cache: dict | None = None) -> BElement:
    """``([phi_(g,u), d] - L_u + delta(u)) x`` for ``x`` in ``B^i``.

    ``cache`` (keyed by index) may hold the matrices of ``phi_(g,u)`` for this
    ``(g, u)`` to avoid solving for them again.
    """
    n = datum.n
    cache = {} if cache is None else cache

    def matrix(k: int) -> dict:
        if k not in cache:
            cache[k] = e_minus_one_matrix(datum, phi, g, u, k)
        return cache[k]

    b_prev, b_i, b_next = (FilteredBundle(datum, k) for k in (i - 1, i, i + 1))
    m_i = matrix(i)
    m_next = matrix(i + 1) if b_next.rank else {}
    phid = _apply(m_next, b_next, b_i, b_i.d(x)) if b_next.rank else b_i.zero()
    dphi = b_prev.d(_apply(m_i, b_i, b_prev, x)) if b_prev.rank else b_i.zero()
    du = bv_delta(phi, u)[()] if u else LaurentPolynomial.zero(n)
    return phid + dphi - twisted_lie(datum, u, x) + x * du


def canonical_delta(datum: ConnectionDatum, phi: VolumeForm, g: LaurentPolynomial, u: Multivector):
    """Closed form ``(dg + omega delta(u), delta(u))``; independent route for tests."""
    du = bv_delta(phi, u)[()] if u else LaurentPolynomial.zero(datum.n)
    dg = DifferentialForm.one_form([g.diff(k) for k in range(datum.n)])
    return dg + datum.omega * du, du


# -- the deformation datum ----------------------------------------------------------

def _exponent_window(ring: str, window: int) -> tuple[int, int]:
    return (0, window) if ring == "polynomial" else (-window, window)


def _col_labels(n: int, ring: str, window: int) -> list:
    box = _box(n, *_exponent_window(ring, window))
    return [("g", e) for e in box] + [("u", k, e) for k in range(n) for e in box]


def _row_key(label):
    return (0 if label[0] == "theta" else 1, label[1:])


@dataclass
class DeformationDatum:
    """``(E^0 + E^-1, delta)`` on a window, with ``delta`` as a labelled sparse matrix.

    Columns are ``("g", e)`` for ``g = z^e`` and ``("u", k, e)`` for
    ``u = z^e d_k``; rows are ``("theta", k, e)`` for ``z^e dz_k`` and
    ``("f", e)`` for ``z^e``.  ``omega`` and ``phi`` are kept as header data.
    """

    n: int
    ring: str
    window: int
    phi: VolumeForm
    omega: DifferentialForm
    col_labels: list
    row_labels: list
    delta_matrix: QMatrix
    independence: dict = field(default_factory=dict)
    marker: str = "split"

    # -- element plumbing
    def _col_vector(self, g: LaurentPolynomial, u: Multivector) -> dict:
        idx = {lab: c for c, lab in enumerate(self.col_labels)}
        vec = {}
        for e, c in g.items():
            if ("g", e) not in idx:
                raise WindowError(f"z^{e} outside the datum window")
            vec[idx[("g", e)]] = c
        for (k,), f in u.homogeneous_part(1).items():
            for e, c in f.items():
                if ("u", k, e) not in idx:
                    raise WindowError(f"z^{e} d{k + 1} outside the datum window")
                vec[idx[("u", k, e)]] = c
        return vec

    def _row_element(self, vec: dict):
        n = self.n
        theta = [dict() for _ in range(n)]
        f: dict = {}
        for r, c in vec.items():
            lab = self.row_labels[r]
            if lab[0] == "theta":
                theta[lab[1]][lab[2]] = c
            else:
                f[lab[1]] = c
        form = DifferentialForm.one_form([LaurentPolynomial(n, t) for t in theta])
        return form, LaurentPolynomial(n, f)

    def delta(self, g: LaurentPolynomial, u: Multivector):
        """Apply the stored operator to ``(g, u)``; returns ``(theta, f)``."""
        return self._row_element(self.delta_matrix.apply(self._col_vector(g, u)))

    def column(self, label) -> tuple:
        return self._row_element(self.delta_matrix.column(self.col_labels.index(label)))

    @staticmethod
    def label_element(n: int, label) -> tuple[LaurentPolynomial, Multivector]:
        if label[0] == "g":
            return LaurentPolynomial.monomial(label[1]), Multivector.zero(n)
        _, k, e = label
        return LaurentPolynomial.zero(n), Multivector.basis(n, k, coeff=LaurentPolynomial.monomial(e))

    # -- algebra structure (trivial extension of Omega^{-.} by its shift)
    def product(self, x, y):
        """Product in ``E^0 + E^-1``; ``x`` in ``E^0`` and ``y`` in either degree.

        The sub-modules are identified with polyvectors by
        ``g -> i_Phi^-1(g)`` (n-vectors) and ``theta -> -i_Phi^-1(theta)``
        ((n-1)-vectors); products are wedge products there.
        """
        theta, f = x
        if isinstance(y[0], DifferentialForm):
            theta2, f2 = y
            return theta2 * f + theta * f2, f * f2
        g, u = y
        big_t = -invert_contract(self.phi, theta) if theta else Multivector.zero(self.n)
        big_g = invert_contract(self.phi, DifferentialForm.scalar(self.n, g))
        sub = contract_volume(self.phi, big_g * f + big_t.wedge(u))
        return _function(sub), u * f

    @staticmethod
    def quotient(x):
        """``E^0 -> O`` and ``E^-1 -> Theta``."""
        return x[1]

    def to_text(self) -> str:
        from .coeff import format_fraction

        lines = ["deformation",
                 f"# n = {self.n}", f"# ring = {self.ring}", f"# window = {self.window}",
                 f"# Phi = {self.phi}", f"# omega = {self.omega}", f"# marker = {self.marker}",
                 "cols " + " ".join(_label_text(c) for c in self.col_labels),
                 "rows " + " ".join(_label_text(r) for r in self.row_labels),
                 f"matrix delta {self.delta_matrix.nrows} {self.delta_matrix.ncols}"]
        lines += [" ".join(format_fraction(v) for v in row) for row in self.delta_matrix.to_dense()]
        lines.append("end")
        return "\n".join(lines) + "\n"


def _label_text(label) -> str:
    head, *rest = label
    parts = [head] + [str(x + 1) if isinstance(x, int) else ",".join(map(str, x)) for x in rest]
    return ":".join(parts)


def build_E_algebra(datum: ConnectionDatum, window: int = 2, phi: VolumeForm | None = None,
                    indices: tuple[int, int] = (0, 1)) -> DeformationDatum:
    """Construct ``(E^0 + E^-1, delta)`` from a flat unipotent connection.

    For each spanning element ``(g, u)`` of ``E^-1`` the map ``phi_(g,u)`` is
    solved for on ``B^i``, ``[phi, d]`` is evaluated, the remainder is read off
    as an element of ``E^0`` at ``i = indices[0]`` and then compared with the
    ``E^0`` action at both indices (the remainder must not depend on ``i``).
    """
    if not datum.is_flat():
        raise ValueError(f"connection is not flat: d omega = {exterior_derivative(datum.omega)}")
    n = datum.n
    phi = phi or VolumeForm.standard(n)
    if phi.dim != n:
        raise ValueError("volume form dimension differs from the connection")
    if window < 1:
        raise WindowError("window must be at least 1 to hold the vector fields z_k d_k")
    cols = _col_labels(n, datum.ring, window)
    columns = []
    row_index: dict = {}
    independence = {i: True for i in indices}
    one = LaurentPolynomial.constant(n, 1)
    b0 = FilteredBundle(datum, 0)
    base = b0.element(("a", ()), one)
    for lab in cols:
        g, u = DeformationDatum.label_element(n, lab)
        cache: dict = {}
        rem = commutator_remainder(datum, phi, g, u, 0, base, cache)
        f = _function(rem.a)
        theta = rem.b1
        for i in indices:
            bi = FilteredBundle(datum, i)
            for x in bi.spanning_set():
                if commutator_remainder(datum, phi, g, u, i, x, cache) != act_e0(datum, theta, f, i, x):
                    independence[i] = False
                    break
        col = {}
        for (k,), c in theta.items():
            for e, v in c.items():
                col[("theta", k, e)] = v
        for e, v in f.items():
            col[("f", e)] = v
        for key in col:
            row_index.setdefault(key, None)
        columns.append(col)
    rows = sorted(set(row_index) | {("f", e) for e in _box(n, *_exponent_window(datum.ring, window))},
                  key=_row_key)
    ridx = {lab: r for r, lab in enumerate(rows)}
    matrix = QMatrix.from_columns(len(rows), [{ridx[k]: v for k, v in col.items()} for col in columns])
    return DeformationDatum(n, datum.ring, window, phi, datum.omega, cols, rows, matrix,
                            independence, datum.extension_class_marker)


# -- exactness of forms and classes ----------------------------------------------------

def is_exact(eta: DifferentialForm, ring: str = "laurent") -> LaurentPolynomial | None:
    """A function ``F`` with ``dF = eta`` (exponents near those of ``eta``), or ``None``."""
    n = eta.dim
    if not eta:
        return LaurentPolynomial.zero(n)
    if eta.degrees() != {1}:
        raise ValueError("is_exact expects a 1-form")
    exps = {e for _, c in eta.items() for e in c.exponents()}
    cands = set()
    for e in exps:
        for k in range(n):
            m = list(e)
            m[k] += 1
            if ring == "polynomial" and min(m) < 0:
                continue
            cands.add(tuple(m))
    cands = sorted(cands)
    targets = sorted({(k, e) for (k,), c in eta.items() for e in c.exponents()}
                     | {(k, tuple(m[j] - (j == k) for j in range(n))) for m in cands for k in range(n)})
    tidx = {t: r for r, t in enumerate(targets)}
    cols = []
    for m in cands:
        col = {}
        for k in range(n):
            if m[k]:
                col[tidx[(k, tuple(m[j] - (j == k) for j in range(n)))]] = Fraction(m[k])
        cols.append(col)
    rhs = {tidx[(k, e)]: v for (k,), c in eta.items() for e, v in c.items()}
    x = solve(QMatrix.from_columns(len(targets), cols), rhs)
    if x is None:
        return None
    return LaurentPolynomial(n, {cands[j]: v for j, v in x.items()})


def class_dimension(forms: Iterable[DifferentialForm], window: int) -> int:
    """Dimension of the span of the classes of closed 1-forms, computed in a weight window."""
    from .homological import laurent_de_rham_complex

    forms = list(forms)
    if not forms:
        return 0
    n = forms[0].dim
    c = laurent_de_rham_complex(n, window)
    labels = {lab: r for r, lab in enumerate(c.space.labels(1))}
    vecs = []
    for form in forms:
        vec = {}
        for (k,), f in form.items():
            for e, v in f.items():
                if (e, (k,)) not in labels:
                    raise WindowError(f"{form} has weight outside the window")
                vec[labels[(e, (k,))]] = v
        vecs.append(vec)
    exact = c.d(0)
    exact_cols = [exact.column(j) for j in range(exact.ncols)]
    nrows = len(labels)
    return rank(QMatrix.from_columns(nrows, exact_cols + vecs)) - rank(QMatrix.from_columns(nrows, exact_cols))


# -- extraction ---------------------------------------------------------------------------

@dataclass
class Extraction:
    connection: ConnectionDatum | None
    u1: Multivector | None
    local_rank: int
    global_rank: int
    factorization_failures: list

    def to_lines(self) -> list[str]:
        out = [f"local_rank = {self.local_rank}", f"global_flat_sections = {self.global_rank}",
               f"factorizes = {'pass' if not self.factorization_failures else 'fail'}"]
        if self.connection is not None:
            out.append(f"omega = {self.connection.omega}")
        return out


def _series_kernel_rank(omega: DifferentialForm, order: int) -> int:
    """Rank of flat sections of ``nabla`` in formal power series at ``z = (1, ..., 1)``.

    Sections are truncated at total degree ``order`` and equations at
    ``order - 1``; the count is exact for flat connections.
    """
    n = omega.dim
    mons = [m for m in itertools.product(range(order + 1), repeat=n) if sum(m) <= order]
    midx = {m: k for k, m in enumerate(mons)}

    def expand(f: LaurentPolynomial) -> dict:
        # z_k = 1 + t_k, z_k^-1 = sum (-t_k)^j
        result: dict = {}
        for exp, c in f.items():
            term = {(0,) * n: Fraction(c)}
            for k, e in enumerate(exp):
                ser = {}
                if e >= 0:
                    for j in range(min(e, order) + 1):
                        ser[j] = Fraction(comb(e, j))
                else:
                    for j in range(order + 1):
                        ser[j] = Fraction(comb(-e + j - 1, j)) * (-1) ** j
                new = {}
                for m, v in term.items():
                    for j, w in ser.items():
                        mm = list(m)
                        mm[k] += j
                        if sum(mm) <= order:
                            new[tuple(mm)] = new.get(tuple(mm), 0) + v * w
                term = new
            for m, v in term.items():
                result[m] = result.get(m, 0) + v
        return {m: v for m, v in result.items() if v}

    om = [expand(omega[(k,)]) for k in range(n)]
    eq_mons = [m for m in mons if sum(m) <= order - 1]
    eidx = {m: r for r, m in enumerate(eq_mons)}
    # unknowns: s1 coefficients, then s2 coefficients; equations: 2 n |eq_mons|
    ent: dict = {}
    neq = len(eq_mons)
    for which in (0, 1):
        for m, col in midx.items():
            ucol = col + which * len(mons)
            for k in range(n):
                # d/dt_k of t^m
                if m[k]:
                    mm = list(m)
                    mm[k] -= 1
                    mm = tuple(mm)
                    if mm in eidx:
                        row = (which * n + k) * neq + eidx[mm]
                        ent[(row, ucol)] = ent.get((row, ucol), 0) + m[k]
                if which == 1:
                    # omega_k * s2 enters the s1 equation
                    for mo, v in om[k].items():
                        prod = tuple(a + b for a, b in zip(mo, m))
                        if prod in eidx:
                            row = k * neq + eidx[prod]
                            ent[(row, ucol)] = ent.get((row, ucol), 0) + v
    system = QMatrix(2 * n * neq, 2 * len(mons), ent)
    return 2 * len(mons) - rank(system)


def _global_flat_rank(omega: DifferentialForm, ring: str) -> int:
    """Flat sections with polynomial (Laurent) entries: 1, or 2 when omega is exact."""
    return 2 if is_exact(omega, ring) is not None else 1


def extraction_report(e: DeformationDatum, order: int = 4) -> Extraction:
    """Assemble ``E^-1 -> A^-1 -> E^0 -> A^0`` from the operator and take the kernel.

    ``A^-1 = L (x) O`` and ``A^0 = L (x) Omega^1``.  A vector field ``u1`` with
    ``delta(u1) = 1`` is found by a linear solve on the quotient rows; the
    connection form is the sub-part of ``delta(0, u1)``.  The factorization of
    ``delta`` through ``A^-1`` is then checked on every column.
    """
    n = e.n
    f_rows = [r for r, lab in enumerate(e.row_labels) if lab[0] == "f"]
    u_cols = [c for c, lab in enumerate(e.col_labels) if lab[0] == "u"]
    sub = e.delta_matrix.submatrix(f_rows, u_cols)
    target = {f_rows.index(r): Fraction(1) for r in f_rows if e.row_labels[r] == ("f", (0,) * n)}
    x = solve(sub, target)
    if x is None:
        return Extraction(None, None, 0, 0, ["no u with delta(u) = 1 in window"])
    u1 = Multivector.zero(n)
    for j, v in x.items():
        _, k, exp = e.col_labels[u_cols[j]]
        u1 = u1 + Multivector.basis(n, k, coeff=LaurentPolynomial.monomial(exp, v))
    omega, f1 = e.delta(LaurentPolynomial.zero(n), u1)
    failures = []
    for lab in e.col_labels:
        g, u = DeformationDatum.label_element(n, lab)
        theta, f = e.column(lab)
        dg = DifferentialForm.one_form([g.diff(k) for k in range(n)])
        if theta != dg + omega * f:
            failures.append(lab)
    local = _series_kernel_rank(omega, order)
    conn = ConnectionDatum(omega, e.marker, e.ring)
    return Extraction(conn, u1, local, _global_flat_rank(omega, e.ring), failures)


def extract_local_system(e: DeformationDatum, order: int = 4) -> ConnectionDatum:
    """The local system ``ker(A^-1 -> A^0)`` as a flat connection datum."""
    rep = extraction_report(e, order)
    if rep.connection is None:
        raise ExtractionError("operator has no vector field with delta(u) = 1 in the window", 0)
    if rep.factorization_failures:
        raise ExtractionError(f"delta does not factor through A^-1 at {rep.factorization_failures[:3]}",
                              rep.local_rank)
    if rep.local_rank != 2:
        raise ExtractionError(f"kernel of A^-1 -> A^0 has rank {rep.local_rank}, expected 2", rep.local_rank)
    return rep.connection


# -- validation ---------------------------------------------------------------------------

@dataclass
class DeformationReport:
    rows: list  # two ExactnessReports
    sub_square: list  # failing "g" columns
    quotient_square: list  # failing "u" columns
    ladder: list  # columns where E^-1 -> A^-1 -> E^0 differs from delta
    connection_square: list  # spanning elements where A^-1 -> E^0 -> A^0 differs from nabla
    multiplicativity: list
    independence: dict
    extraction: Extraction | None

    @property
    def passed(self) -> bool:
        return (all(r.exact for r in self.rows) and not self.sub_square and not self.quotient_square
                and not self.ladder and not self.connection_square and not self.multiplicativity
                and all(self.independence.values()) and self.extraction is not None
                and self.extraction.connection is not None)

    def to_lines(self) -> list[str]:
        def flag(bad):
            return "pass" if not bad else "fail"

        lines = [f"deformation = {'pass' if self.passed else 'fail'}",
                 f"row_minus_one_exact = {'pass' if self.rows[0].exact else 'fail'}",
                 f"row_zero_exact = {'pass' if self.rows[1].exact else 'fail'}",
                 f"square_sub = {flag(self.sub_square)}",
                 f"square_quotient = {flag(self.quotient_square)}",
                 f"ladder = {flag(self.ladder)}",
                 f"connection_square = {flag(self.connection_square)}",
                 f"multiplicative = {flag(self.multiplicativity)}"]
        lines += [f"independent_of_i.{i} = {'pass' if ok else 'fail'}" for i, ok in sorted(self.independence.items())]
        for name, bad in (("square_sub", self.sub_square), ("square_quotient", self.quotient_square),
                          ("ladder", self.ladder)):
            lines += [f"{name}.column = {_label_text(lab)}" for lab in bad]
        return lines


def _row_sequences(e: DeformationDatum) -> list[ExactnessReport]:
    n = e.n
    box = _box(n, *_exponent_window(e.ring, e.window))
    m = len(box)
    # 0 -> O -> E^-1 -> Theta -> 0, coordinates (g | u)
    inc = QMatrix(m + n * m, m, {(j, j): 1 for j in range(m)})
    proj = QMatrix(n * m, m + n * m, {(j, m + j): 1 for j in range(n * m)})
    top = check_exactness([m, m + n * m, n * m], [inc, proj])
    # 0 -> Omega -> E^0 -> O -> 0, coordinates (theta | f)
    inc0 = QMatrix(n * m + m, n * m, {(j, j): 1 for j in range(n * m)})
    proj0 = QMatrix(m, n * m + m, {(j, n * m + j): 1 for j in range(m)})
    bottom = check_exactness([n * m, n * m + m, m], [inc0, proj0])
    return [top, bottom]


def validate_deformation(e: DeformationDatum) -> DeformationReport:
    """Exact rows of the extension diagram, its two squares, the ladder and multiplicativity."""
    n = e.n
    phi = e.phi
    sub_fail, quot_fail = [], []
    for lab in e.col_labels:
        g, u = DeformationDatum.label_element(n, lab)
        theta, f = e.column(lab)
        if lab[0] == "g":
            # induced map O = Omega^{-n} -> Omega^{1-n} = Omega, transported delta
            big = invert_contract(phi, DifferentialForm.scalar(n, g))
            induced = -contract_volume(phi, bv_delta(phi, big))
            if f or theta != induced:
                sub_fail.append(lab)
        elif f != bv_delta(phi, u)[()]:
            quot_fail.append(lab)

    ext = extraction_report(e)
    ladder, conn_fail = [], []
    if ext.connection is not None:
        conn = ext.connection
        for lab in e.col_labels:
            g, u = DeformationDatum.label_element(n, lab)
            s1, s2 = g, (bv_delta(phi, u)[()] if u else LaurentPolynomial.zero(n))
            # A^-1 -> E^0: (s1, s2) -> (ds1 + omega s2, s2)
            ds1 = DifferentialForm.one_form([s1.diff(k) for k in range(n)])
            if (ds1 + conn.omega * s2, s2) != e.column(lab):
                ladder.append(lab)
        # A^-1 -> E^0 -> A^0 against the bundle differential on B^-1 = L (x) O
        b = build_extension_bundles(conn, -1) if conn.is_flat() else None
        if b is None:
            conn_fail.append("not flat")
        else:
            for x in b.spanning_set():
                s1, s2 = _function(x.b1), _function(x.b2)
                theta = DifferentialForm.one_form([s1.diff(k) for k in range(n)]) + conn.omega * s2
                via = BElement(DifferentialForm.zero(n), theta,
                               DifferentialForm.one_form([s2.diff(k) for k in range(n)]))
                if via != b.d(x):
                    conn_fail.append(x)

    mult = []
    samples_e0 = [(DifferentialForm.zero(n), LaurentPolynomial.variable(n, 0)),
                  (DifferentialForm.basis(n, 0), LaurentPolynomial.constant(n, 2))]
    samples_e1 = [DeformationDatum.label_element(n, lab) for lab in e.col_labels[:: max(1, len(e.col_labels) // 6)]]
    for x in samples_e0:
        for y in samples_e0 + samples_e1:
            if e.quotient(e.product(x, y)) != x[1] * e.quotient(y):
                mult.append((x, y))
    return DeformationReport(_row_sequences(e), sub_fail, quot_fail, ladder, conn_fail, mult,
                             dict(e.independence), ext)


# -- equivalence ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Intertwiner:
    """``T_0(theta, h) = (theta + f dh, h)``, ``T_-1(g, u) = (g + f delta(u) + <c, u>, u)``."""

    f: LaurentPolynomial
    c: DifferentialForm


def find_intertwiner(e1: DeformationDatum, e2: DeformationDatum, window: int = 1) -> Intertwiner | None:
    """Search for an algebra isomorphism ``T`` with ``delta_2 T_-1 = T_0 delta_1``.

    ``f`` and the coefficients of ``c`` range over monomials in ``window``;
    columns are the labels of ``e1`` whose image stays inside ``e2``'s window.
    Returns ``None`` when the linear system has no solution (no intertwiner
    of this shape within the window, which is not a proof of inequivalence).
    """
    if (e1.n, e1.ring) != (e2.n, e2.ring):
        raise ValueError("data live on different models")
    n, phi = e1.n, e1.phi
    mons = _box(n, *_exponent_window(e1.ring, window))
    unknowns = [("f", m) for m in mons] + [("c", k, m) for k in range(n) for m in mons]
    eq_cols: list[dict] = [dict() for _ in unknowns]
    rhs: dict = {}
    row_keys: dict = {}

    def row(key):
        return row_keys.setdefault(key, len(row_keys))

    def add_form(target: dict, prefix, form: DifferentialForm, h: LaurentPolynomial, scale=1):
        for (k,), c in form.items():
            for ex, v in c.items():
                r = row((prefix, "theta", k, ex))
                target[r] = target.get(r, 0) + scale * v
        for ex, v in h.items():
            r = row((prefix, "f", ex))
            target[r] = target.get(r, 0) + scale * v

    usable = 0
    for lab in e1.col_labels:
        g, u = DeformationDatum.label_element(n, lab)
        du = bv_delta(phi, u)[()] if u else LaurentPolynomial.zero(n)
        try:
            theta1, h1 = e1.column(lab)
            theta2, h2 = e2.delta(g, u)
            # delta_2 of the unknown shifts (g-direction): z^m du and <z^m dz_k, u>
            shifts = []
            for unk in unknowns:
                if unk[0] == "f":
                    shifts.append(LaurentPolynomial.monomial(unk[1]) * du)
                else:
                    form = DifferentialForm.basis(n, unk[1], coeff=LaurentPolynomial.monomial(unk[2]))
                    shifts.append(_function(interior_product(u, form)) if u else LaurentPolynomial.zero(n))
            images = [e2.delta(s, Multivector.zero(n)) if s else None for s in shifts]
        except WindowError:
            continue
        usable += 1
        # constant part: T_0 delta_1 - delta_2 at zero unknowns = theta1 - theta2, h1 - h2
        add_form(rhs, lab, theta1 - theta2, h1 - h2, -1)
        dh1 = DifferentialForm.one_form([h1.diff(k) for k in range(n)])
        for j, unk in enumerate(unknowns):
            contrib_theta = DifferentialForm.zero(n)
            if unk[0] == "f":
                contrib_theta = dh1 * LaurentPolynomial.monomial(unk[1])
            if images[j] is not None:
                contrib_theta = contrib_theta - images[j][0]
                add_form(eq_cols[j], lab, contrib_theta, -images[j][1])
            else:
                add_form(eq_cols[j], lab, contrib_theta, LaurentPolynomial.zero(n))
    if not usable:
        raise WindowError("no column of the first datum fits the second datum's window")
    system = QMatrix.from_columns(len(row_keys), eq_cols)
    x = solve(system, {r: v for r, v in rhs.items() if v})
    if x is None:
        return None
    f = LaurentPolynomial(n, {unknowns[j][1]: v for j, v in x.items() if unknowns[j][0] == "f"})
    comps = [dict() for _ in range(n)]
    for j, v in x.items():
        if unknowns[j][0] == "c":
            comps[unknowns[j][1]][unknowns[j][2]] = v
    c = DifferentialForm.one_form([LaurentPolynomial(n, t) for t in comps])
    return Intertwiner(f, c)
