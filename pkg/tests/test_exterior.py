from polyvector.coeff import LaurentPolynomial
from polyvector.exterior import (
    DifferentialForm,
    Multivector,
    exterior_derivative,
    interior_product,
    lie_derivative,
    sort_with_sign,
)
from polyvector.schouten import random_laurent, random_multivector

z1, z2 = LaurentPolynomial.gens(2)
d1, d2 = Multivector.basis(2, 0), Multivector.basis(2, 1)
dz1, dz2 = DifferentialForm.basis(2, 0), DifferentialForm.basis(2, 1)


def test_sort_with_sign():
    assert sort_with_sign((1, 0)) == (-1, (0, 1))
    assert sort_with_sign((0, 0))[0] == 0


def test_wedge_examples():
    w = d1.wedge(d2)
    assert w.components == {(0, 1): LaurentPolynomial.constant(2, 1)}
    assert not d1.wedge(d1)
    assert (d1 * z1).wedge(d2 * z2 + d1) == d1.wedge(d2) * (z1 * z2)


def test_exterior_derivative_examples():
    assert exterior_derivative(DifferentialForm.scalar(2, z1 * z2)) == dz1 * z2 + dz2 * z1
    f1 = DifferentialForm.basis(1, 0, coeff=LaurentPolynomial.gens(1)[0].inverse())
    assert not exterior_derivative(f1)
    assert exterior_derivative(dz2 * z1) == dz1.wedge(dz2)


def test_interior_product_examples():
    vol = dz1.wedge(dz2)
    assert interior_product(d1, vol) == dz2
    assert interior_product(d2, vol) == -dz1
    # rightmost factor first: i_{d1^d2} = i_{d1} o i_{d2}
    assert interior_product(d1.wedge(d2), vol) == interior_product(d1, interior_product(d2, vol))
    assert interior_product(d1.wedge(d2), vol) == DifferentialForm.scalar(2, -1)
    assert not interior_product(d1.wedge(d2), dz1)


def test_lie_derivative_examples():
    assert lie_derivative(d1 * z1, dz1) == dz1
    assert lie_derivative(d1, dz2 * z1) == dz2
    assert not lie_derivative(d1, dz1.wedge(dz2))


def test_d_squared_and_cartan(rng):
    for _ in range(40):
        f = DifferentialForm.scalar(3, random_laurent(rng, 3))
        assert not exterior_derivative(exterior_derivative(f))
        v = random_multivector(rng, 3, 1)
        w = exterior_derivative(f) * random_laurent(rng, 3)
        cartan = exterior_derivative(interior_product(v, w)) + interior_product(v, exterior_derivative(w))
        assert lie_derivative(v, w) == cartan


def test_wedge_graded_commutative(rng):
    for _ in range(40):
        a = random_multivector(rng, 3, rng.randint(0, 3))
        b = random_multivector(rng, 3, rng.randint(0, 3))
        sign = -1 if (a.degree * b.degree) % 2 else 1
        assert a.wedge(b) == b.wedge(a) * sign
