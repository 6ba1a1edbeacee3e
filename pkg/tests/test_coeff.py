from fractions import Fraction

import pytest

from polyvector.coeff import LaurentPolynomial, as_fraction, format_fraction

z1, z2 = LaurentPolynomial.gens(2)


def test_ring_examples():
    one = LaurentPolynomial.constant(2, 1)
    assert (z1 + 1) + (-z1) == one
    assert z1 * z1.inverse() == one
    assert (z1 + z2) * (z1 - z2) == z1 * z1 - z2 * z2


def test_derivative_examples():
    assert (z1 * z1).diff(0) == 2 * z1
    assert z1.inverse().diff(0) == -(z1.inverse() * z1.inverse())
    assert z1.diff(1).is_zero()
    with pytest.raises((IndexError, ValueError)):
        z1.diff(2)


def test_units():
    assert (3 * z1 * z2.inverse()).is_unit()
    assert not (1 + z1).is_unit()
    assert not LaurentPolynomial.zero(2).is_unit()


def test_variable_count_mismatch():
    with pytest.raises(ValueError):
        z1 + LaurentPolynomial.gens(1)[0]


def test_leibniz_on_random_polynomials(rng):
    from polyvector.schouten import random_laurent

    for _ in range(50):
        f, g = random_laurent(rng, 2), random_laurent(rng, 2)
        for i in range(2):
            assert (f * g).diff(i) == f.diff(i) * g + f * g.diff(i)


def test_fractions():
    assert as_fraction(3) == Fraction(3)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    assert format_fraction(Fraction(-1, 2)) == "-1/2"
    assert format_fraction(Fraction(5)) == "5"
