"""Volume forms, the BV operator and the brackets derived from it.

For a volume form ``Phi = f dz1^...^dzn`` with ``f`` a unit of the Laurent
ring, contraction ``P -> i_P Phi`` is an additive isomorphism from k-vectors
onto (n-k)-forms.  Transporting the exterior derivative through it gives the
BV operator.  We fix its global sign as

    delta_Phi = -(i_Phi^{-1} o d o i_Phi)

so that, on vector fields, ``delta(v) = -div_Phi(v)`` and Koszul's formula

    [a, b] = (-1)^{deg a} (delta(a^b) - delta(a)^b - (-1)^{deg a deg b} delta(b)^a)

reproduces the Schouten bracket exactly (degrees are the signed ones, -k).
Without the minus sign the right-hand side is exactly ``-[a, b]``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .coeff import LaurentPolynomial
from .exterior import (
    DifferentialForm,
    Multivector,
    basis_elements,
    exterior_derivative,
    interior_product,
    lie_derivative,
)
from .schouten import AxiomReport, random_laurent, random_multivector, schouten_bracket

__all__ = [
    "RestrictedElement",
    "VolumeForm",
    "bv_delta",
    "contract_volume",
    "divergence",
    "invert_contract",
    "is_divergence_free",
    "koszul_bracket",
    "random_volume_form",
    "restrict",
    "transported_bracket",
    "verify_bv",
    "verify_koszul",
    "yukawa_bracket",
    "yukawa_product",
]


@dataclass(frozen=True)
class VolumeForm:
    """``Phi = coefficient * dz1^...^dzn`` with a unit coefficient."""

    dim: int
    coefficient: LaurentPolynomial

    def __post_init__(self):
        if self.coefficient.nvars != self.dim:
            raise ValueError("coefficient has the wrong number of variables")
        if not self.coefficient.is_unit():
            raise ValueError(f"{self.coefficient} is not a unit; Phi must be nowhere vanishing")

    @classmethod
    def standard(cls, dim: int) -> "VolumeForm":
        return cls(dim, LaurentPolynomial.constant(dim, 1))

    @classmethod
    def from_form(cls, form: DifferentialForm) -> "VolumeForm":
        if form.degrees() != {form.dim}:
            raise ValueError("a volume form must be a nonzero top-degree form")
        return cls(form.dim, form[tuple(range(form.dim))])

    def form(self) -> DifferentialForm:
        return DifferentialForm.top(self.dim, self.coefficient)

    def __str__(self):
        return str(self.form())


def _check_dim(phi: VolumeForm, x):
    if phi.dim != x.dim:
        raise ValueError(f"dimension mismatch: volume form has {phi.dim}, argument {x.dim}")


def contract_volume(phi: VolumeForm, p: Multivector) -> DifferentialForm:
    """``i_Phi(P) = i_P Phi``; k-vectors go to (n-k)-forms."""
    _check_dim(phi, p)
    return interior_product(p, phi.form())


def _basis_table(n: int) -> dict:
    # form basis J -> (multivector basis I, sign) with i_{d_I}(dz_1..n) = sign * dz_J
    table = {}
    top = DifferentialForm.top(n)
    for k in range(n + 1):
        for idx in basis_elements(n, k):
            (fb, c), = interior_product(Multivector.basis(n, *idx), top).items()
            table[fb] = (idx, int(c.constant_term()))
    return table


_TABLES: dict[int, dict] = {}


def invert_contract(phi: VolumeForm, omega: DifferentialForm) -> Multivector:
    """The multivector ``P`` with ``i_P Phi = omega``."""
    _check_dim(phi, omega)
    table = _TABLES.get(phi.dim)
    if table is None:
        table = _TABLES[phi.dim] = _basis_table(phi.dim)
    finv = phi.coefficient.inverse()
    comps = {}
    for fb, c in omega.items():
        idx, sign = table[fb]
        comps[idx] = c * finv * sign
    return Multivector(phi.dim, comps)


def bv_delta(phi: VolumeForm, p: Multivector) -> Multivector:
    """BV operator; raises the polyvector degree by one and squares to zero."""
    return -invert_contract(phi, exterior_derivative(contract_volume(phi, p)))


def divergence(phi: VolumeForm, v: Multivector) -> LaurentPolynomial:
    """``div_Phi(v)``, defined by ``L_v Phi = div_Phi(v) Phi``."""
    if not v.is_vector_field():
        raise ValueError("divergence needs a vector field")
    _check_dim(phi, v)
    lv = lie_derivative(v, phi.form())
    return lv[tuple(range(phi.dim))] * phi.coefficient.inverse()


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def koszul_bracket(phi: VolumeForm, a: Multivector, b: Multivector) -> Multivector:
    """Right-hand side of Koszul's formula, extended bilinearly."""
    _check_dim(phi, a)
    _check_dim(phi, b)
    out = Multivector.zero(phi.dim)
    for p, ap in a.homogeneous_parts().items():
        for q, bq in b.homogeneous_parts().items():
            # signed degrees -p, -q; parities agree with p, q
            term = (bv_delta(phi, ap.wedge(bq))
                    - bv_delta(phi, ap).wedge(bq)
                    - bv_delta(phi, bq).wedge(ap) * _sign(p * q))
            out = out + term * _sign(p)
    return out


def is_divergence_free(phi: VolumeForm, v: Multivector) -> bool:
    """True iff ``L_v Phi = 0``."""
    if not v.is_vector_field():
        raise ValueError("is_divergence_free needs a vector field")
    _check_dim(phi, v)
    return lie_derivative(v, phi.form()).is_zero()


@dataclass(frozen=True)
class RestrictedElement:
    """Element of the restricted Schouten algebra.

    The vector-field part must preserve ``Phi``; ``certificate`` holds
    ``L_v Phi`` for that part (always the zero form).
    """

    value: Multivector
    certificate: DifferentialForm


def restrict(phi: VolumeForm, p: Multivector) -> RestrictedElement:
    """Certify membership in the restricted algebra, or raise ``ValueError``."""
    _check_dim(phi, p)
    v = p.homogeneous_part(1)
    lv = lie_derivative(v, phi.form())
    if lv:
        raise ValueError(f"vector-field part does not preserve the volume form: L_v Phi = {lv}")
    return RestrictedElement(p, lv)


def yukawa_product(phi: VolumeForm, alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    """Wedge of polyvectors transported to forms: ``i(i^-1 alpha ^ i^-1 beta)``."""
    return contract_volume(
        phi, invert_contract(phi, alpha).wedge(invert_contract(phi, beta))
    )


def yukawa_bracket(phi: VolumeForm, alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    """Schouten bracket on forms, written with ``d`` and the Yukawa product.

    For ``alpha`` of degree ``n-k`` and ``beta`` of degree ``n-l``:

        [alpha, beta] = (-1)^(k+1) (d(alpha*beta) - d(alpha)*beta - (-1)^(kl) d(beta)*alpha)
    """
    _check_dim(phi, alpha)
    _check_dim(phi, beta)
    n = phi.dim
    out = DifferentialForm.zero(n)
    d = exterior_derivative
    for da, ap in alpha.homogeneous_parts().items():
        for db, bq in beta.homogeneous_parts().items():
            k, l = n - da, n - db
            term = (d(yukawa_product(phi, ap, bq))
                    - yukawa_product(phi, d(ap), bq)
                    - yukawa_product(phi, d(bq), ap) * _sign(k * l))
            out = out + term * _sign(k + 1)
    return out


def transported_bracket(phi: VolumeForm, alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    """``i(schouten(i^-1 alpha, i^-1 beta))``; independent route for :func:`yukawa_bracket`."""
    return contract_volume(
        phi, schouten_bracket(invert_contract(phi, alpha), invert_contract(phi, beta))
    )


# -- randomized verification -------------------------------------------------

def random_volume_form(rng: random.Random, n: int) -> VolumeForm:
    """``c z^m dz1^...^dzn`` with ``c`` a small nonzero rational and ``|m_i| <= 2``."""
    c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3]))
    m = tuple(rng.randint(-2, 2) for _ in range(n))
    return VolumeForm(n, LaurentPolynomial.monomial(m, c))


def _divergence_free(rng: random.Random, phi: VolumeForm) -> Multivector:
    # i_Phi^-1 of an exact (n-1)-form, or of a constant when n = 1
    n = phi.dim
    if n == 1:
        return invert_contract(phi, DifferentialForm.scalar(1, rng.choice([-2, -1, 1, 2])))
    while True:
        k = n - 2
        form = DifferentialForm(n, {idx: random_laurent(rng, n) for idx in rng.sample(basis_elements(n, k), 1)})
        v = invert_contract(phi, exterior_derivative(form))
        if v:
            return v


def verify_bv(n: int, trials: int, seed: int) -> list[AxiomReport]:
    """delta^2 = 0, the i_Phi round trip, ker delta = divergence-free, and Koszul's identity.

    Each trial draws its own volume form.  Vector-field trials alternate
    between generic fields and divergence-free ones, so both directions of the
    equivalence are exercised.
    """
    if not 1 <= n <= 3:
        raise ValueError("verify_bv supports n in {1, 2, 3}")
    rng = random.Random(seed)
    reports = {name: AxiomReport(name) for name in (
        "delta_squared", "contract_roundtrip", "kernel_is_divergence_free", "koszul_identity")}
    for t in range(trials):
        phi = random_volume_form(rng, n)
        a = random_multivector(rng, n, rng.randint(0, n))
        rep = reports["delta_squared"]
        rep.cases += 1
        dd = bv_delta(phi, bv_delta(phi, a))
        if dd:
            rep.record({"Phi": phi, "a": a}, dd, 0)

        rep = reports["contract_roundtrip"]
        rep.cases += 1
        back = invert_contract(phi, contract_volume(phi, a))
        if back != a:
            rep.record({"Phi": phi, "a": a}, back, a)

        rep = reports["kernel_is_divergence_free"]
        rep.cases += 1
        v = _divergence_free(rng, phi) if t % 2 else random_multivector(rng, n, 1)
        if (not bv_delta(phi, v)) != is_divergence_free(phi, v):
            rep.record({"Phi": phi, "v": v}, bv_delta(phi, v), lie_derivative(v, phi.form()))

        # delta(a^b) = delta(a)^b + (-1)^p a^delta(b) + (-1)^p [a, b], p the signed degree of a
        rep = reports["koszul_identity"]
        rep.cases += 1
        b = random_multivector(rng, n, rng.randint(0, n))
        p = a.signed_degree()
        lhs = bv_delta(phi, a.wedge(b))
        rhs = (bv_delta(phi, a).wedge(b) + a.wedge(bv_delta(phi, b)) * _sign(p)
               + schouten_bracket(a, b) * _sign(p))
        if lhs != rhs:
            rep.record({"Phi": phi, "a": a, "b": b}, lhs, rhs)
    return list(reports.values())


def verify_koszul(n: int, trials: int, seed: int, volumes: int = 5) -> list[AxiomReport]:
    """``schouten_bracket == koszul_bracket`` for the standard form, then Phi-independence."""
    rng = random.Random(seed)
    std = VolumeForm.standard(n)
    oracle = AxiomReport("koszul_oracle")
    indep = AxiomReport("phi_independence")
    phis = [random_volume_form(rng, n) for _ in range(volumes)]
    for t in range(trials):
        a = random_multivector(rng, n, rng.randint(0, n))
        b = random_multivector(rng, n, rng.randint(0, n))
        oracle.cases += 1
        lhs, rhs = schouten_bracket(a, b), koszul_bracket(std, a, b)
        if lhs != rhs:
            oracle.record({"a": a, "b": b}, lhs, rhs)
        phi = phis[t % volumes]
        indep.cases += 1
        other = koszul_bracket(phi, a, b)
        if other != rhs:
            indep.record({"Phi": phi, "a": a, "b": b}, other, rhs)
    return [oracle, indep]
