import dataclasses
from math import comb

import pytest

from polyvector.coeff import LaurentPolynomial
from polyvector.deformation import (
    ConnectionDatum,
    ExtractionError,
    WindowError,
    build_E_algebra,
    build_extension_bundles,
    canonical_delta,
    class_dimension,
    d_squared_defects,
    extract_local_system,
    extraction_report,
    find_intertwiner,
    flatness_check,
    is_exact,
    validate_deformation,
)
from polyvector.exterior import DifferentialForm
from polyvector.linalg import QMatrix
from polyvector.textio import parse

def binom(n, k):
    return comb(n, k) if 0 <= k <= n else 0


OMEGAS = ["0", "z1^-1*dz1", "2*z1^-1*dz1 + dz1"]


def one_form(text, n=1):
    return parse(text, n, "form")


def datum(text, n=1, ring="laurent"):
    return ConnectionDatum(one_form(text, n), ring=ring)


@pytest.fixture(scope="module")
def built():
    return {s: build_E_algebra(datum(s), window=2) for s in OMEGAS + ["dz1"]}


def test_flatness_examples():
    zero = DifferentialForm.zero(1)
    assert flatness_check([[zero, one_form("3*z1^-1*dz1")], [zero, zero]]).passed
    assert flatness_check([[zero, zero], [zero, zero]]).passed
    z2 = DifferentialForm.zero(2)
    rep = flatness_check([[z2, one_form("z2*dz1", 2)], [z2, z2]])
    assert not rep.passed
    assert rep.defects[(0, 1)] == one_form("dz2^dz1", 2)
    with pytest.raises(ValueError):
        flatness_check([[zero, zero]])


def test_non_flat_input_rejected():
    with pytest.raises(ValueError):
        build_extension_bundles(datum("z2*dz1", 2), 0)
    with pytest.raises(ValueError):
        build_E_algebra(datum("z2*dz1", 2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bundle_ranks_and_d_squared(n):
    d = datum("z1^-1*dz1", n)
    for i in range(-1, n + 1):
        b = build_extension_bundles(d, i)
        assert b.rank == binom(n, i) + 2 * binom(n, i + 1)
        assert not d_squared_defects(b)


def test_bundle_rank_examples():
    assert build_extension_bundles(datum("0"), 0).rank == 3
    assert build_extension_bundles(datum("0"), 1).rank == 1
    assert build_extension_bundles(datum("0", 2), 0).rank == 5


@pytest.mark.parametrize("omega", OMEGAS)
def test_roundtrip(built, omega):
    e = built[omega]
    rep = validate_deformation(e)
    assert rep.passed, rep.to_lines()
    assert all(e.independence.values())
    back = extract_local_system(e)
    assert is_exact(back.omega - one_form(omega)) is not None


def test_trivial_input_gives_trivial_datum(built):
    back = extract_local_system(built["0"])
    assert back.omega == DifferentialForm.zero(1)
    assert back.extension_class_marker == "split"


def test_essential_part(built):
    # u = z d/dz has delta(u) = -1 with the recorded sign, so the sub-part is omega * delta(u)
    e = built["z1^-1*dz1"]
    theta, f = e.delta(LaurentPolynomial.zero(1), parse("z1*d1", 1, "mv"))
    assert f == LaurentPolynomial.constant(1, -1)
    assert theta == -one_form("z1^-1*dz1")


def test_matrix_matches_closed_form(built):
    e = built["2*z1^-1*dz1 + dz1"]
    d = ConnectionDatum(e.omega)
    for lab in e.col_labels:
        g, u = e.label_element(1, lab)
        assert e.column(lab) == canonical_delta(d, e.phi, g, u)


def test_class_count_matches_h1():
    forms = [one_form(s) for s in ("z1^-1*dz1", "2*z1^-1*dz1 + dz1", "dz1", "z1^-2*dz1")]
    assert class_dimension(forms, 2) == 1


def test_exact_input_equivalent_to_trivial(built):
    t = find_intertwiner(built["dz1"], built["0"])
    assert t is not None
    assert t.f == LaurentPolynomial.gens(1)[0]
    assert find_intertwiner(built["z1^-1*dz1"], built["0"]) is None


def test_polynomial_model():
    e = build_E_algebra(datum("dz1", ring="polynomial"), window=2)
    assert validate_deformation(e).passed
    back = extract_local_system(e)
    assert back.omega == one_form("dz1")
    assert is_exact(back.omega, "polynomial") == LaurentPolynomial.gens(1)[0]
    with pytest.raises(ValueError):
        datum("z1^-1*dz1", ring="polynomial")


def test_corrupted_entry_is_localized(built):
    e = built["z1^-1*dz1"]
    col = e.col_labels.index(("u", 0, (2,)))
    ent = e.delta_matrix.entries()
    row = next(r for (r, c) in ent if c == col)
    ent[(row, col)] += 1
    bad = dataclasses.replace(e, delta_matrix=QMatrix(*e.delta_matrix.shape, ent))
    rep = validate_deformation(bad)
    assert not rep.passed
    assert rep.ladder == [("u", 0, (2,))]
    assert "ladder.column = u:1:2" in rep.to_lines()


def test_extraction_reports_rank(built):
    ext = extraction_report(built["z1^-1*dz1"])
    assert ext.local_rank == 2
    assert ext.global_rank == 1
    assert extraction_report(built["dz1"]).global_rank == 2


def test_extraction_fails_without_vector_fields(built):
    e = built["0"]
    empty = dataclasses.replace(e, delta_matrix=QMatrix.zeros(*e.delta_matrix.shape))
    with pytest.raises(ExtractionError):
        extract_local_system(empty)


def test_window_too_small():
    with pytest.raises(WindowError):
        build_E_algebra(datum("z1^-1*dz1"), window=0)


def test_two_variables():
    e = build_E_algebra(datum("z1^-1*dz1 + 3*z2^-1*dz2", 2), window=1)
    assert validate_deformation(e).passed
    assert extract_local_system(e).omega == one_form("z1^-1*dz1 + 3*z2^-1*dz2", 2)


def test_text_output(built):
    text = built["z1^-1*dz1"].to_text()
    assert text.startswith("deformation\n")
    assert "# omega = 1*z1^-1*dz1" in text
    assert text.endswith("end\n")
