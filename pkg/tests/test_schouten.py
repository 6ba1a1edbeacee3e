import pytest

from polyvector.bv import VolumeForm, koszul_bracket
from polyvector.schouten import (
    adjoint_action,
    epsilon,
    lie_bracket,
    random_multivector,
    schouten_bracket,
    verify_graded_lie,
    verify_nilpotency,
)
from polyvector.textio import parse


def mv(text, n=2):
    return parse(text, n, "mv")


def test_lie_bracket_examples():
    assert not lie_bracket(mv("d1"), mv("d2"))
    assert lie_bracket(mv("z1*d1"), mv("d1")) == -mv("d1")
    assert lie_bracket(mv("d1"), mv("z1*d2")) == mv("d2")
    with pytest.raises(ValueError):
        lie_bracket(mv("d1^d2"), mv("d1"))


def test_schouten_examples():
    assert not schouten_bracket(mv("d1^d2"), mv("d1"))
    # sign fixed by the contraction convention; the Koszul route must agree
    assert schouten_bracket(mv("d1^d2"), mv("z1")) == -mv("d2")
    assert schouten_bracket(mv("d1^d2"), mv("z1")) == koszul_bracket(VolumeForm.standard(2), mv("d1^d2"), mv("z1"))
    assert schouten_bracket(mv("z2*d1"), mv("z1")) == mv("z2")


def test_adjoint_examples():
    assert adjoint_action(mv("d1"), mv("z1*z2")) == mv("z2")
    assert not adjoint_action(mv("d1^d2"), mv("1"))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        schouten_bracket(mv("d1", 1), mv("d1", 2))


def test_epsilon_values():
    # vector fields have signed degree -1: shifted degree 0, so the sign is +1
    assert epsilon(-1, -1) == 1
    assert epsilon(0, 0) == -1
    assert epsilon(-2, 0) == -1
    assert epsilon(-2, -1) == 1


def test_bracket_agrees_with_lie_on_vector_fields(rng):
    for _ in range(50):
        u, v = random_multivector(rng, 3, 1), random_multivector(rng, 3, 1)
        assert schouten_bracket(u, v) == lie_bracket(u, v)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_graded_lie_suite_passes(n):
    reports = verify_graded_lie(n, n, 100, 7)
    assert {r.name for r in reports} >= {"antisymmetry", "jacobi", "derivation"}
    for r in reports:
        assert r.passed, r.to_lines()


def test_flipped_sign_produces_jacobi_counterexample():
    reports = {r.name: r for r in verify_graded_lie(2, 2, 100, 7, eps=lambda p, q: (-1) ** (p * q))}
    jac = reports["jacobi"]
    assert not jac.passed
    lines = jac.to_lines()
    assert "pass = false" in lines
    assert any(line.startswith("counterexample.a = ") for line in lines)


def test_report_is_deterministic():
    a = [r.to_lines() for r in verify_graded_lie(2, 2, 30, 11)]
    b = [r.to_lines() for r in verify_graded_lie(2, 2, 30, 11)]
    assert a == b


def test_nilpotency():
    for n in (2, 3):
        rep = verify_nilpotency(n, 30, 7)
        assert rep.passed and rep.cases == 30
    with pytest.raises(ValueError):
        verify_nilpotency(1, 5, 7)


def test_nilpotency_fails_for_vector_fields():
    # sanity: (ad_u)^(n+1) is not zero for u = z1 d1 acting on z1, so the check is not vacuous
    u, x = mv("z1*d1", 1), mv("z1", 1)
    for _ in range(2):
        x = schouten_bracket(u, x)
    assert x
