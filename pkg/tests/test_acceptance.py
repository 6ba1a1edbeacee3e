"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with pytest (lines are collected into the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""

import subprocess
import sys
from math import comb

import pytest

from polyvector.bv import VolumeForm, verify_bv, verify_koszul
from polyvector.cli import main
from polyvector.deformation import (
    ConnectionDatum,
    build_E_algebra,
    build_extension_bundles,
    class_dimension,
    d_squared_defects,
    extract_local_system,
    is_exact,
    validate_deformation,
)
from polyvector.exterior import DifferentialForm
from polyvector.homological import cohomology_dims, laurent_de_rham_complex, schouten_complex, verify_complexification
from polyvector.schouten import verify_graded_lie, verify_nilpotency
from polyvector.textio import parse

SEED = 7
RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    RESULTS.append(line)
    print(line)
    return ok


def _quiet_main(argv) -> int:
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        return main(argv)


def criterion_1() -> bool:
    codes = [_quiet_main(["verify", "lie", "--n", "2", "--trials", "500", "--seed", str(SEED)]),
             _quiet_main(["verify", "lie", "--n", "3", "--trials", "200", "--seed", str(SEED)])]
    flipped = {r.name: r for r in verify_graded_lie(2, 2, 200, SEED, eps=lambda p, q: (-1) ** (p * q))}
    jacobi = flipped["jacobi"]
    mutation_caught = not jacobi.passed and any(l.startswith("counterexample.") for l in jacobi.to_lines())
    return report(1, "graded Lie suite (n=2 x500, n=3 x200) and flipped-sign mutation",
                  codes == [0, 0] and mutation_caught,
                  f"exit codes {codes}, jacobi counterexamples under mutation {len(jacobi.counterexamples)}")


def criterion_2() -> bool:
    bad = []
    for n in (1, 2, 3):
        for rep in verify_koszul(n, 500, SEED, volumes=5):
            if not rep.passed or rep.cases != 500:
                bad.append(f"n={n}:{rep.name}")
    return report(2, "Koszul oracle and Phi-independence, 500 pairs per n", not bad, ", ".join(bad))


def criterion_3() -> bool:
    bad = []
    for n in (1, 2, 3):
        for rep in verify_bv(n, 500, SEED):
            if not rep.passed or rep.cases < 200:
                bad.append(f"n={n}:{rep.name}")
    return report(3, "BV suite: delta^2, round trip, kernel, nonderivation identity", not bad, ", ".join(bad))


def criterion_4() -> bool:
    reps = [verify_nilpotency(n, 100, SEED) for n in (2, 3)]
    return report(4, "(ad_a)^(n+1) = 0 for 100 random a of degree <= -2",
                  all(r.passed and r.cases == 100 for r in reps))


def criterion_5() -> bool:
    ok = True
    details = []
    for window in (2, 3):
        sch = cohomology_dims(schouten_complex(VolumeForm.standard(2), 2, window))
        dr = cohomology_dims(laurent_de_rham_complex(2, window))
        shifted = {k: dr[k + 1] for k in sch}
        ok = ok and sch == shifted == {-1: 1, 0: 2}
        details.append(f"D={window}: {sch}")
    return report(5, "Schouten complex quasi-isomorphic to shifted de Rham on (C*)^2", ok, "; ".join(details))


def criterion_6() -> bool:
    ok = all(cohomology_dims(laurent_de_rham_complex(1, w)) == {0: 1, 1: 1}
             and cohomology_dims(laurent_de_rham_complex(2, w)) == {0: 1, 1: 2, 2: 1} for w in (2, 3))
    return report(6, "Laurent de Rham dims (1,1) and (1,2,1), windows 2 and 3", ok)


def criterion_7() -> bool:
    reps = verify_complexification(20, SEED)
    bad = [r.name for r in reps if not r.passed or not r.cases]
    counts = {r.name: r.cases for r in reps}
    return report(7, "complexification validator suite", not bad and counts["standard_accepted"] == 20,
                  ", ".join(bad) or f"cases {counts}")


def criterion_8() -> bool:
    ok = True
    extracted = []
    for text in ("0", "z1^-1*dz1", "2*z1^-1*dz1 + dz1"):
        omega = parse(text, 1, "form")
        e = build_E_algebra(ConnectionDatum(omega), window=2)
        back = extract_local_system(e)
        ok = ok and validate_deformation(e).passed and is_exact(back.omega - omega) is not None
        extracted.append(back.omega)
    trivial = extracted[0] == DifferentialForm.zero(1)
    h1 = cohomology_dims(laurent_de_rham_complex(1, 2))[1]
    count = class_dimension(extracted, 2)
    return report(8, "deformation round trip on C*", ok and trivial and count == h1 == 1,
                  f"distinguishable classes {count}, H1 {h1}")


def criterion_9() -> bool:
    bad = []
    for n in (1, 2, 3):
        for text in ("0", "z1^-1*dz1"):
            d = ConnectionDatum(parse(text, n, "form"))
            for i in range(-1, n + 1):
                b = build_extension_bundles(d, i)
                want = (comb(n, i) if i >= 0 else 0) + 2 * comb(n, i + 1)
                if b.rank != want or d_squared_defects(b):
                    bad.append(f"n={n},i={i},omega={text}")
    return report(9, "rank B^i = C(n,i) + 2C(n,i+1) and d^2 = 0", not bad, ", ".join(bad))


def criterion_10() -> bool:
    cmd = [sys.executable, "-m", "polyvector.cli", "verify", "all", "--n", "2", "--seed", "7", "--trials", "200"]
    runs = [subprocess.run(cmd, capture_output=True) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and runs[0].stdout
    return report(10, "verify all --n 2 --seed 7 --trials 200 is byte-identical across runs",
                  bool(same) and all(r.returncode == 0 for r in runs),
                  f"{len(runs[0].stdout)} bytes, exit codes {[r.returncode for r in runs]}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 11)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    sys.exit(0 if all(results) else 1)
