import random
from fractions import Fraction
from pathlib import Path

import pytest

from polyvector.bv import VolumeForm
from polyvector.homological import (
    Bicomplex,
    Complex,
    Complexification,
    GradedSpace,
    SubArray,
    bicomplex_to_text,
    check_exactness,
    cohomology_dims,
    complex_from_text,
    complex_to_text,
    far_diagonal_perturbation,
    filtration_quotient,
    filtration_truncate,
    is_standard_on,
    laurent_de_rham_complex,
    random_bicomplex,
    random_complex,
    schouten_complex,
    standard_complexification,
    total_object,
    validate_complexification,
    verify_complexification,
)
from polyvector.linalg import QMatrix, rank

DATA = Path(__file__).parent / "data"


def test_cohomology_of_identity_is_zero():
    c = Complex(GradedSpace.from_dims({0: 1, 1: 1}), {0: QMatrix.identity(1)})
    assert cohomology_dims(c) == {0: 0, 1: 0}


def test_d_squared_enforced():
    m = QMatrix.identity(1)
    with pytest.raises(ValueError):
        Complex(GradedSpace.from_dims({0: 1, 1: 1, 2: 1}), {0: m, 1: m})


@pytest.mark.parametrize("seed", range(5))
def test_euler_characteristic_and_basis_change(seed):
    rng = random.Random(seed)
    c = random_complex(rng, [rng.randint(1, 4) for _ in range(4)])
    h = cohomology_dims(c)
    assert c.euler_characteristic() == sum((-1) ** i * d for i, d in h.items())
    # conjugate by random invertible triangular changes of basis
    changes = {}
    for i, dim in c.space.dims().items():
        ent = {(r, r): Fraction(rng.choice([1, 2, -3])) for r in range(dim)}
        ent.update({(r, s): Fraction(rng.randint(-2, 2)) for r in range(dim) for s in range(r + 1, dim)})
        changes[i] = QMatrix(dim, dim, ent)

    def inverse(p):
        n = p.nrows
        cols = []
        from polyvector.linalg import solve
        for j in range(n):
            cols.append(solve(p, {j: Fraction(1)}))
        return QMatrix.from_columns(n, cols)

    diffs = {i: changes[i + 1] @ m @ inverse(changes[i]) for i, m in c.differentials.items()}
    assert cohomology_dims(Complex(c.space, diffs)) == h


def test_exactness_examples():
    assert check_exactness([1, 1], [QMatrix.identity(1)]).exact
    inc = QMatrix.from_dense([[1], [0]])
    proj = QMatrix.from_dense([[0, 1]])
    assert check_exactness([1, 2, 1], [inc, proj]).exact
    rep = check_exactness([1, 2, 1], [inc, QMatrix.zeros(1, 2)])
    assert not rep.exact
    assert rep.failures[0] == (2, 1)
    assert "exact.defect.2 = 1" in rep.to_lines()


def test_composition_failure_reported_separately():
    rep = check_exactness([1, 1, 1], [QMatrix.identity(1), QMatrix.identity(1)])
    assert rep.composition_failures == [1]


def test_truncation_examples():
    c = laurent_de_rham_complex(1, 2)
    assert filtration_truncate(c, -5).space == c.space
    assert not filtration_truncate(c, 5).space.dims()
    top = filtration_truncate(c, 1)
    assert top.degrees == [1]
    assert cohomology_dims(top)[1] == top.space.dim(1)


def test_truncation_short_exact_sequence():
    c = random_complex(random.Random(3), [2, 3, 2])

    def coord(rows, cols):
        return QMatrix(rows, cols, {(k, k): 1 for k in range(min(rows, cols))})

    for p in range(4):
        sub, quo = filtration_truncate(c, p), filtration_quotient(c, p)
        for i in c.degrees:
            n_sub, n, n_quo = sub.space.dim(i), c.space.dim(i), quo.space.dim(i)
            inc, proj = coord(n, n_sub), coord(n_quo, n)
            assert check_exactness([n_sub, n, n_quo], [inc, proj]).exact
            # inclusion and projection are chain maps
            inc_next = coord(c.space.dim(i + 1), sub.space.dim(i + 1))
            proj_next = coord(quo.space.dim(i + 1), c.space.dim(i + 1))
            assert c.d(i) @ inc == inc_next @ sub.d(i)
            assert proj_next @ c.d(i) == quo.d(i) @ proj


@pytest.mark.parametrize("window", [2, 3])
def test_de_rham_dimensions(window):
    assert cohomology_dims(laurent_de_rham_complex(1, window)) == {0: 1, 1: 1}
    assert cohomology_dims(laurent_de_rham_complex(2, window)) == {0: 1, 1: 2, 2: 1}


def test_de_rham_n3_small_window():
    assert cohomology_dims(laurent_de_rham_complex(3, 1)) == {0: 1, 1: 3, 2: 3, 3: 1}


def test_de_rham_h1_generated_by_log_form():
    c = laurent_de_rham_complex(1, 2)
    idx = c.space.index(1)
    log = {idx[((-1,), (0,))]: Fraction(1)}
    exact = c.d(0)
    cols = [exact.column(j) for j in range(exact.ncols)]
    assert rank(QMatrix.from_columns(c.space.dim(1), cols + [log])) == rank(exact) + 1


@pytest.mark.parametrize("n,expected", [(1, {0: 1}), (2, {-1: 1, 0: 2})])
def test_schouten_complex_is_shifted_de_rham(n, expected):
    for window in (2, 3):
        c = schouten_complex(VolumeForm.standard(n), n, window)
        assert cohomology_dims(c) == expected
        derham = cohomology_dims(laurent_de_rham_complex(n, window))
        for k, d in cohomology_dims(c).items():
            assert derham[k + n - 1] == d


def test_empty_window_reports_note():
    c = schouten_complex(VolumeForm.standard(2), 2, -1)
    assert "no divergence-free" in c.notes[0]
    assert not any(cohomology_dims(c).values())


def test_text_format_golden_and_roundtrip():
    c = laurent_de_rham_complex(1, 1)
    text = complex_to_text(c, {"model": "laurent-derham", "n": "1", "window": "1"})
    assert text == (DATA / "derham_n1_w1.txt").read_text()
    back = complex_from_text(text)
    assert back.space.dims() == c.space.dims()
    assert back.d(0) == c.d(0)


# -- bicomplexes ----------------------------------------------------------------

def _cech():
    """Three columns (A = Q -1-> Q -0-> Q) against the difference complex Q -> Q^2 -> Q."""
    a = [QMatrix.identity(1), QMatrix.zeros(1, 1)]
    b = [QMatrix.from_dense([[1], [1]]), QMatrix.from_dense([[-1, 1]])]
    dims_b = [1, 2, 1]
    objects, d1, d2 = {}, {}, {}
    for p in range(3):
        for q in range(3):
            objects[(p, q)] = dims_b[q]
            if p < 2:
                d1[(p, q)] = a[p] * 1 if dims_b[q] == 1 else QMatrix.identity(2) * (a[p][0, 0])
            if q < 2:
                d2[(p, q)] = b[q] * (-1) ** p
    return Bicomplex(objects, d1, d2)


def test_total_object_dimensions():
    k = Bicomplex({(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4}, strict=False)
    assert total_object(k).space.dims() == {0: 1, 1: 5, 2: 4}
    single = Bicomplex({(0, 0): 1, (1, 0): 1}, {(0, 0): QMatrix.identity(1)})
    assert total_object(single).space.dims() == {0: 1, 1: 1}
    assert not total_object(Bicomplex({})).space.dims()


def test_cech_standard_complexification_twist():
    k = _cech()
    c = standard_complexification(k)
    assert validate_complexification(c).passed
    for p in range(3):
        assert c.component((p, 0), (p, 1)) == k.vertical(p, 0)
        assert c.component((p, 1), (p, 2)) == k.vertical(p, 1) * -1
    assert "bicomplex" in bicomplex_to_text(k)


def test_zero_differentials_give_zero_d():
    k = Bicomplex({(0, 0): 2, (1, 0): 1, (0, 1): 1})
    c = standard_complexification(k)
    assert all(m.is_zero() for m in c.D.values())


def test_bicomplex_axioms_enforced():
    m = QMatrix.identity(1)
    with pytest.raises(ValueError):
        Bicomplex({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
                  {(0, 0): m, (0, 1): m}, {(0, 0): m, (1, 0): m})


@pytest.mark.parametrize("seed", range(20))
def test_standard_complexifications_validate(seed):
    k = random_bicomplex(random.Random(seed))
    c = standard_complexification(k)
    assert validate_complexification(c).passed
    assert cohomology_dims(c.as_complex())  # D^2 = 0 checked by the Complex constructor
    assert is_standard_on(c, SubArray.full(k))
    assert is_standard_on(c, SubArray.zero(k))


def test_far_diagonal_perturbation():
    rng = random.Random(1)
    for _ in range(20):
        k = random_bicomplex(rng, cols=3, rows=3)
        try:
            c = far_diagonal_perturbation(k, rng)
        except ValueError:
            continue
        assert validate_complexification(c).passed
        assert not is_standard_on(c, SubArray.full(k))
        assert is_standard_on(c, SubArray.zero(k))
        return
    pytest.fail("no perturbation found")


def test_sign_mutation_rejected():
    k = _cech()
    std = standard_complexification(k)
    tot = std.total
    d = dict(std.D)
    # flip the sign of the q = 1 vertical piece at p = 0
    rows, cols = tot.block(0, 2), tot.block(0, 1)
    m = d[1]
    ent = m.entries()
    for r in rows:
        for cidx in cols:
            if (r, cidx) in ent:
                ent[(r, cidx)] = -ent[(r, cidx)]
    d[1] = QMatrix(m.nrows, m.ncols, ent)
    rep = validate_complexification(Complexification(k, d))
    assert not rep.passed
    assert ("d2", (0, 1)) in rep.near_diagonal_failures
    assert any(line.startswith("complexification.near_diagonal.d2") for line in rep.to_lines())


def test_is_standard_on_rejects_non_subarray():
    k = _cech()
    c = standard_complexification(k)
    j = SubArray({(0, 0): QMatrix.identity(1)})
    with pytest.raises(ValueError):
        is_standard_on(c, j)


def test_complexification_suite():
    for rep in verify_complexification(20, 7):
        assert rep.passed and rep.cases >= 1, rep.to_lines()
