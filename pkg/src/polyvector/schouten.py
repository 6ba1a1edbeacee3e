"""The Schouten--Nijenhuis bracket on polyvector fields.

Gradings follow the polyvector algebra: a k-vector has degree ``-k``.  With
that grading the bracket satisfies

* ``deg [a, b] = deg a + deg b + 1``;
* ``[a, b] = -eps(a, b) [b, a]`` with ``eps(a, b) = (-1)^((deg a + 1)(deg b + 1))``
  (in unsigned degrees this is ``(-1)^((p - 1)(q - 1))``);
* ``[a, .]`` is a derivation of degree ``deg a + 1`` of the wedge product:
  ``[a, b^c] = [a, b]^c + (-1)^((deg a + 1) deg b) b^[a, c]``;
* on vector fields it is the Lie bracket, and ``[v, f] = v(f)``.

:func:`schouten_bracket` is built from these rules alone: the degree <= 1
cases are explicit and everything else is reduced to them through the
derivation law in the right slot and antisymmetry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .coeff import LaurentPolynomial
from .exterior import Basis, Multivector, basis_elements

__all__ = [
    "AxiomReport",
    "SchoutenElement",
    "adjoint_action",
    "epsilon",
    "lie_bracket",
    "random_laurent",
    "random_multivector",
    "schouten_bracket",
    "verify_graded_lie",
    "verify_nilpotency",
]


def epsilon(deg_a: int, deg_b: int) -> int:
    """Sign ``(-1)^((deg a + 1)(deg b + 1))`` on signed degrees."""
    return -1 if ((deg_a + 1) * (deg_b + 1)) & 1 else 1


@dataclass(frozen=True)
class SchoutenElement:
    """Homogeneous k-vector (k >= 1) viewed in the Schouten algebra, degree ``1 - k``."""

    value: Multivector

    def __post_init__(self):
        if self.value.is_zero():
            return
        k = self.value.degree
        if not 1 <= k <= self.value.dim:
            raise ValueError(f"Schouten algebra elements have 1 <= k <= n, got k={k}")

    @property
    def schouten_degree(self) -> int:
        return 1 - self.value.degree if self.value else 0


def lie_bracket(u: Multivector, v: Multivector) -> Multivector:
    """``[u, v]^i = sum_j (u_j d_j v_i - v_j d_j u_i)``."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    if not (u.is_vector_field() and v.is_vector_field()):
        raise ValueError("lie_bracket needs two vector fields")
    n = u.dim
    uc, vc = u.vector_components(), v.vector_components()
    comps = []
    for i in range(n):
        c = LaurentPolynomial.zero(n)
        for j in range(n):
            if uc[j]:
                c = c + uc[j] * vc[i].diff(j)
            if vc[j]:
                c = c - vc[j] * uc[i].diff(j)
        comps.append(c)
    return Multivector.vector_field(comps)


# A bracket of two "monomial" multivectors f*d_I and g*d_J is a sum of terms
# sign * (coefficient) * d_K where the coefficient is one of f*(d_i g) or
# g*(d_j f).  The recursion below works on these symbolic shapes, so its result
# depends only on (I, J) and is cached.
#   ("F", i) -> f * d_i(g)        ("G", j) -> g * d_j(f)


def _accumulate(acc: dict, sign: int, which: str, var: int, basis: Basis):
    key = (which, var, basis)
    acc[key] = acc.get(key, 0) + sign
    if not acc[key]:
        del acc[key]


def _wedge_shape(shape: dict, left: Basis | None, right: Basis | None) -> dict:
    """Wedge every term by a constant basis element on the left or right."""
    from .exterior import sort_with_sign

    out: dict = {}
    for (which, var, basis), sign in shape.items():
        combined = (left or ()) + basis + (right or ())
        s, key = sort_with_sign(combined)
        if s:
            _accumulate(out, sign * s, which, var, key)
    return out


def _swap_roles(shape: dict) -> dict:
    return {("G" if w == "F" else "F", v, b): s for (w, v, b), s in shape.items()}


@lru_cache(maxsize=None)
def _bracket_shape(I: Basis, J: Basis, const_g: bool = False) -> tuple:
    """Shape of ``[f d_I, g d_J]``; with ``const_g`` the second coefficient is 1."""
    k, l = len(I), len(J)
    acc: dict = {}
    if k == 0 and l == 0:
        pass
    elif k == 1 and l == 0:
        _accumulate(acc, 1, "F", I[0], ())                     # [f d_i, g] = f d_i g
    elif k == 0 and l == 1:
        _accumulate(acc, -1, "G", J[0], ())                    # [f, g d_j] = -g d_j f
    elif k == 1 and l == 1:
        _accumulate(acc, 1, "F", I[0], J)
        _accumulate(acc, -1, "G", J[0], I)
    elif l >= 2:
        # b = (g d_{j1}) ^ d_{J'}; derivation law in the right slot
        x, rest = J[:1], J[1:]
        s = 1 if (1 - k) % 2 == 0 else -1  # (-1)^((deg a + 1) * deg x), deg x = -1
        for key, sign in _wedge_shape(dict(_bracket_shape(I, x)), None, rest).items():
            _accumulate(acc, sign, *key)
        # [a, d_{J'}] has constant second coefficient; the g factor multiplies it
        inner = dict(_bracket_shape(I, rest, True))
        for (which, var, basis), sign in _wedge_shape(inner, x, None).items():
            _accumulate(acc, sign * s, which, var, basis)
    else:
        # l <= 1 < k: antisymmetry, [a, b] = -eps(a, b) [b, a]
        eps = epsilon(-k, -l)
        for key, sign in _swap_roles(dict(_bracket_shape(J, I))).items():
            _accumulate(acc, -eps * sign, *key)
    if const_g:
        # g = 1: terms f*d_i(g) vanish
        acc = {key: s for key, s in acc.items() if key[0] == "G"}
    return tuple(sorted(acc.items()))


def _monomial_bracket(f: LaurentPolynomial, I: Basis, g: LaurentPolynomial, J: Basis, out: dict):
    for (which, var, basis), sign in _bracket_shape(I, J):
        c = f * g.diff(var) if which == "F" else g * f.diff(var)
        if not c:
            continue
        if sign != 1:
            c = c * sign
        s = out[basis] + c if basis in out else c
        if s:
            out[basis] = s
        else:
            del out[basis]


def schouten_bracket(a: Multivector, b: Multivector) -> Multivector:
    """Schouten bracket, extended bilinearly over homogeneous components."""
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise TypeError("schouten_bracket expects multivectors")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    out: dict = {}
    for I, f in a.items():
        for J, g in b.items():
            _monomial_bracket(f, I, g, J, out)
    return Multivector._raw(a.dim, out)


def adjoint_action(a: Multivector, b: Multivector) -> Multivector:
    """``ad_a(b) = [a, b]``; the representation of the Schouten algebra on polyvectors."""
    return schouten_bracket(a, b)


# -- randomized verification -------------------------------------------------

def random_laurent(rng: random.Random, n: int, max_terms: int = 2, exp_bound: int = 2,
                   coeff_bound: int = 3) -> LaurentPolynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exp = tuple(rng.randint(-exp_bound, exp_bound) for _ in range(n))
        c = rng.randint(-coeff_bound, coeff_bound) or 1
        terms[exp] = terms.get(exp, 0) + c
    return LaurentPolynomial(n, terms)


def random_multivector(rng: random.Random, n: int, k: int, max_components: int = 2,
                       **coeff_kw) -> Multivector:
    """Random homogeneous k-vector with small Laurent coefficients (never zero)."""
    bases = basis_elements(n, k)
    while True:
        chosen = rng.sample(bases, min(len(bases), rng.randint(1, max_components)))
        mv = Multivector(n, {b: random_laurent(rng, n, **coeff_kw) for b in chosen})
        if mv:
            return mv


@dataclass
class AxiomReport:
    name: str
    cases: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def record(self, inputs: dict, lhs, rhs):
        self.counterexamples.append({"inputs": inputs, "lhs": lhs, "rhs": rhs})

    def to_lines(self) -> list[str]:
        """``key = value`` record, first counterexample in expression text."""
        lines = [
            f"axiom = {self.name}",
            f"trials = {self.cases}",
            f"failures = {len(self.counterexamples)}",
            f"pass = {'true' if self.passed else 'false'}",
        ]
        if self.counterexamples:
            ce = self.counterexamples[0]
            for key, val in ce["inputs"].items():
                lines.append(f"counterexample.{key} = {val}")
            lines.append(f"counterexample.lhs = {ce['lhs']}")
            lines.append(f"counterexample.rhs = {ce['rhs']}")
        return lines


def _faithful_witness(a: Multivector, bracket) -> Multivector | None:
    n = a.dim
    z = LaurentPolynomial.gens(n)
    candidates = [Multivector.scalar(n, zi) for zi in z]
    candidates += [Multivector.basis(n, i) for i in range(n)]
    candidates += [Multivector.basis(n, j, coeff=z[i]) for i in range(n) for j in range(n)]
    for b in candidates:
        if bracket(a, b):
            return b
    return None


def verify_graded_lie(
    n: int,
    degree_bound: int,
    trials: int,
    seed: int,
    eps: Callable[[int, int], int] = epsilon,
    bracket: Callable[[Multivector, Multivector], Multivector] = schouten_bracket,
) -> list[AxiomReport]:
    """Check the graded Lie axioms on pseudo-random homogeneous multivectors.

    ``eps`` and ``bracket`` are injectable so that faults can be planted; the
    defaults are the real ones.  Deterministic for a given ``seed``.
    """
    if not 1 <= n <= 3:
        raise ValueError("verify_graded_lie supports n in {1, 2, 3}")
    if not 1 <= degree_bound <= n:
        raise ValueError("degree_bound must satisfy 1 <= degree_bound <= n")
    rng = random.Random(seed)
    reports = {name: AxiomReport(name) for name in (
        "lie_agreement", "degree", "antisymmetry", "jacobi", "derivation", "faithfulness")}

    def draw(kmin=0):
        k = rng.randint(kmin, degree_bound)
        return random_multivector(rng, n, k)

    for _ in range(trials):
        a, b, c = draw(), draw(), draw()
        p, q, r = -a.degree, -b.degree, -c.degree
        ab = bracket(a, b)

        u, v = random_multivector(rng, n, 1), random_multivector(rng, n, 1)
        rep = reports["lie_agreement"]
        rep.cases += 1
        lhs, rhs = bracket(u, v), lie_bracket(u, v)
        if lhs != rhs:
            rep.record({"u": u, "v": v}, lhs, rhs)

        rep = reports["degree"]
        rep.cases += 1
        if ab and ab.degrees() != {-(p + q + 1)}:
            rep.record({"a": a, "b": b}, sorted(ab.degrees()), -(p + q + 1))

        rep = reports["antisymmetry"]
        rep.cases += 1
        rhs = bracket(b, a) * (-eps(p, q))
        if ab != rhs:
            rep.record({"a": a, "b": b}, ab, rhs)

        rep = reports["jacobi"]
        rep.cases += 1
        total = (bracket(a, bracket(b, c)) * eps(p, r)
                 + bracket(c, ab) * eps(r, q)
                 + bracket(b, bracket(c, a)) * eps(q, p))
        if total:
            rep.record({"a": a, "b": b, "c": c}, total, 0)

        rep = reports["derivation"]
        rep.cases += 1
        lhs = bracket(a, b.wedge(c))
        sign = -1 if ((p + 1) * q) & 1 else 1
        rhs = ab.wedge(c) + b.wedge(bracket(a, c)) * sign
        if lhs != rhs:
            rep.record({"a": a, "b": b, "c": c}, lhs, rhs)

        if n >= 2:
            rep = reports["faithfulness"]
            rep.cases += 1
            f = random_multivector(rng, n, rng.randint(1, n - 1))
            if _faithful_witness(f, bracket) is None:
                rep.record({"a": f}, "no witness", "some b with [a,b] != 0")
    return list(reports.values())


def _spanning_multivectors(n: int) -> list[Multivector]:
    """``z^m d_I`` for all ``I`` and ``m`` in ``{0, +-e_k}``."""
    exps = [(0,) * n] + [tuple(s if j == k else 0 for j in range(n)) for k in range(n) for s in (1, -1)]
    return [Multivector.basis(n, *idx, coeff=LaurentPolynomial.monomial(m))
            for k in range(n + 1) for idx in basis_elements(n, k) for m in exps]


def verify_nilpotency(n: int, trials: int, seed: int) -> AxiomReport:
    """``(ad_a)^(n+1) = 0`` on a spanning set, for random k-vectors ``a`` with k >= 2."""
    if not 2 <= n <= 3:
        raise ValueError("nilpotency needs n in {2, 3} (there are no k >= 2 vectors for n = 1)")
    rng = random.Random(seed)
    rep = AxiomReport("nilpotency")
    span = _spanning_multivectors(n)
    for _ in range(trials):
        a = random_multivector(rng, n, rng.randint(2, n))
        rep.cases += 1
        for b in span:
            x = b
            for _ in range(n + 1):
                if not x:
                    break
                x = schouten_bracket(a, x)
            if x:
                rep.record({"a": a, "b": b}, x, 0)
                break
    return rep
