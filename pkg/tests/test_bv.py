import pytest

from polyvector.bv import (
    VolumeForm,
    bv_delta,
    contract_volume,
    divergence,
    invert_contract,
    is_divergence_free,
    koszul_bracket,
    random_volume_form,
    restrict,
    transported_bracket,
    verify_bv,
    verify_koszul,
    yukawa_bracket,
    yukawa_product,
)
from polyvector.exterior import DifferentialForm
from polyvector.schouten import random_multivector, schouten_bracket
from polyvector.textio import parse

STD = VolumeForm.standard(2)


def mv(text, n=2):
    return parse(text, n, "mv")


def form(text, n=2):
    return parse(text, n, "form")


def test_volume_form_must_be_a_unit():
    with pytest.raises(ValueError):
        VolumeForm.from_form(form("(1 + z1)*dz1^dz2"))
    with pytest.raises(ValueError):
        VolumeForm.from_form(form("dz1"))


def test_contraction_examples():
    assert contract_volume(STD, mv("1")) == STD.form()
    assert contract_volume(STD, mv("d1^d2")) == DifferentialForm.scalar(2, -1)
    assert contract_volume(STD, mv("z1*d2")) == -form("z1*dz1")
    assert invert_contract(STD, STD.form()) == mv("1")
    phi = VolumeForm.from_form(form("z1^-1*dz1", 1))
    p = invert_contract(phi, form("dz1", 1))
    assert p == mv("z1", 1)
    assert contract_volume(phi, p) == form("dz1", 1)


def test_contraction_roundtrip(rng):
    for _ in range(50):
        phi = random_volume_form(rng, 3)
        f = DifferentialForm.scalar(3, 1)
        w = contract_volume(phi, random_multivector(rng, 3, rng.randint(0, 3)))
        assert contract_volume(phi, invert_contract(phi, w)) == w
        assert contract_volume(phi, invert_contract(phi, f)) == f


def test_delta_examples():
    # delta(v) = -div v with the recorded sign
    assert bv_delta(STD, mv("z1*d1")) == mv("-1")
    assert divergence(STD, mv("z1*d1")) == mv("1")[()]
    assert not bv_delta(STD, mv("d1^d2"))
    assert bv_delta(STD, mv("z1*d1^d2")) == -mv("d2")


def test_koszul_examples():
    assert not koszul_bracket(STD, mv("d1"), mv("d2"))
    assert koszul_bracket(STD, mv("z1*d1"), mv("d1")) == -mv("d1")
    assert koszul_bracket(STD, mv("d1^d2"), mv("z1")) == schouten_bracket(mv("d1^d2"), mv("z1"))


def test_divergence_free_examples():
    assert is_divergence_free(STD, mv("z1*d1 - z2*d2"))
    assert not is_divergence_free(STD, mv("z1*d1"))
    assert is_divergence_free(STD, mv("d1"))
    assert restrict(STD, mv("z1*d1 - z2*d2")).certificate.is_zero()
    with pytest.raises(ValueError):
        restrict(STD, mv("z1*d1"))


def test_yukawa_examples():
    beta = form("z2*dz1")
    assert yukawa_product(STD, STD.form(), beta) == beta
    assert not yukawa_product(STD, form("dz1"), form("dz1"))
    assert yukawa_product(STD, form("dz1"), form("dz2")) == DifferentialForm.scalar(2, -1)
    assert not yukawa_bracket(STD, STD.form(), STD.form())
    alpha, b = contract_volume(STD, mv("z1*d1")), contract_volume(STD, mv("d1"))
    assert yukawa_bracket(STD, alpha, b) == contract_volume(STD, -mv("d1"))


def test_yukawa_bracket_matches_transport(rng):
    for _ in range(100):
        phi = random_volume_form(rng, 2)
        a = contract_volume(phi, random_multivector(rng, 2, rng.randint(0, 2)))
        b = contract_volume(phi, random_multivector(rng, 2, rng.randint(0, 2)))
        assert yukawa_bracket(phi, a, b) == transported_bracket(phi, a, b)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bv_suites(n):
    for rep in verify_bv(n, 60, 3) + verify_koszul(n, 60, 3):
        assert rep.passed and rep.cases == 60, rep.to_lines()
