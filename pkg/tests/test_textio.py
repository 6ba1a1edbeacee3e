from fractions import Fraction

import pytest

from polyvector.coeff import LaurentPolynomial
from polyvector.exterior import DifferentialForm, Multivector
from polyvector.schouten import random_multivector
from polyvector.textio import ParseError, TypeMismatchError, parse


def test_grammar_examples():
    x = parse("d1^d2 + z1*d1^d2")
    z1 = LaurentPolynomial.gens(2)[0]
    assert x == Multivector.basis(2, 0, 1, coeff=1 + z1)
    assert not parse("dz1^dz1")
    assert isinstance(parse("dz1^dz1"), DifferentialForm)


def test_mixed_kinds_rejected():
    with pytest.raises(TypeMismatchError):
        parse("d1^dz1")


def test_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse("z1 + * d1")
    assert "column" in str(err.value)


def test_negative_exponents_and_rationals():
    x = parse("-3/2*z1^-2*dz1", 1)
    assert x == DifferentialForm.basis(1, 0, coeff=LaurentPolynomial.monomial((-2,), Fraction(-3, 2)))


def test_print_parse_roundtrip(rng):
    for _ in range(100):
        n = rng.randint(1, 3)
        a = random_multivector(rng, n, rng.randint(0, n))
        text = str(a)
        back = parse(text, n, "mv")
        assert back == a
        assert str(back) == text
