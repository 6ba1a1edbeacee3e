"""Command-line front end: ``polyvector <command> ...``.

Every command writes a line-oriented ``key = value`` report to stdout and
exits 0 iff all of its checks pass.  Input errors go to stderr with exit
code 2.  Random suites are seeded from ``--seed``, else ``SCHOUTEN_SEED``,
else 7, and use Python's Mersenne Twister, so reports are byte-stable.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .bv import (
    VolumeForm,
    bv_delta,
    koszul_bracket,
    transported_bracket,
    verify_bv,
    verify_koszul,
    yukawa_bracket,
    yukawa_product,
)
from .deformation import (
    ConnectionDatum,
    ExtractionError,
    WindowError,
    build_E_algebra,
    class_dimension,
    extract_local_system,
    extraction_report,
    is_exact,
    validate_deformation,
)
from .exterior import DifferentialForm, Multivector
from .homological import (
    cohomology_dims,
    complex_to_text,
    laurent_de_rham_complex,
    schouten_complex,
    verify_complexification,
)
from .schouten import schouten_bracket, verify_graded_lie, verify_nilpotency
from .textio import ParseError, TypeMismatchError, parse

MAX_N = 3


class UsageError(ValueError):
    pass


def default_seed() -> int:
    raw = os.environ.get("SCHOUTEN_SEED")
    if raw is None:
        return 7
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SCHOUTEN_SEED must be an integer, got {raw!r}") from None


def _check_n(n: int):
    if not 1 <= n <= MAX_N:
        raise UsageError(f"n = {n} is out of the supported range 1..{MAX_N}")


def _dim_of(texts: Sequence[str], n: int | None) -> int:
    if n is not None:
        _check_n(n)
        return n
    parsed = [parse(t) for t in texts]
    n = max((getattr(x, "dim", getattr(x, "nvars", 1)) for x in parsed), default=1)
    _check_n(n)
    return n


def _volume(text: str | None, n: int) -> VolumeForm:
    if text is None:
        return VolumeForm.standard(n)
    form = parse(text, n, "form")
    if not isinstance(form, DifferentialForm):
        raise UsageError("--volume must be a top-degree form such as 'z1*dz1^dz2'")
    return VolumeForm.from_form(form)


def _multivector(text: str, n: int) -> Multivector:
    x = parse(text, n, "mv")
    if not isinstance(x, Multivector):
        raise UsageError(f"expected a multivector, got {text!r}")
    return x


def _form(text: str, n: int) -> DifferentialForm:
    x = parse(text, n, "form")
    if not isinstance(x, DifferentialForm):
        raise UsageError(f"expected a differential form, got {text!r}")
    return x


def _header(out: list, command: str, **fields):
    out.append(f"command = {command}")
    out.extend(f"{k} = {v}" for k, v in fields.items())


# -- commands ---------------------------------------------------------------------

def cmd_bracket(args, out: list) -> bool:
    n = _dim_of([args.a, args.b], args.n)
    a, b = _multivector(args.a, n), _multivector(args.b, n)
    phi = _volume(args.volume, n)
    _header(out, "bracket", via=args.via, n=n, Phi=phi)
    result = schouten_bracket(a, b) if args.via == "axioms" else koszul_bracket(phi, a, b)
    out.append(f"result = {result}")
    return True


def cmd_delta(args, out: list) -> bool:
    n = _dim_of([args.x] + ([args.volume] if args.volume else []), args.n)
    phi = _volume(args.volume, n)
    x = _multivector(args.x, n)
    _header(out, "delta", n=n, Phi=phi)
    out.append(f"result = {bv_delta(phi, x)}")
    return True


def cmd_yukawa(args, out: list) -> bool:
    n = _dim_of([args.alpha, args.beta] + ([args.volume] if args.volume else []), args.n)
    phi = _volume(args.volume, n)
    alpha, beta = _form(args.alpha, n), _form(args.beta, n)
    _header(out, "yukawa", n=n, Phi=phi)
    bracket = yukawa_bracket(phi, alpha, beta)
    oracle = transported_bracket(phi, alpha, beta)
    out.append(f"product = {yukawa_product(phi, alpha, beta)}")
    out.append(f"bracket = {bracket}")
    out.append(f"bracket_matches_transported = {'pass' if bracket == oracle else 'fail'}")
    return bracket == oracle


def _suite(name: str, n: int, trials: int, seed: int) -> list:
    if name == "lie":
        reports = verify_graded_lie(n, n, trials, seed)
        if n >= 2:
            reports.append(verify_nilpotency(n, min(trials, 100), seed))
        return reports
    if name == "bv":
        return verify_bv(n, trials, seed) + verify_koszul(n, trials, seed)
    if name == "complexification":
        return verify_complexification(trials, seed)
    raise UsageError(f"unknown suite {name!r}")


def cmd_verify(args, out: list) -> bool:
    _check_n(args.n)
    seed = default_seed() if args.seed is None else args.seed
    suites = ["lie", "bv", "complexification"] if args.suite == "all" else [args.suite]
    _header(out, "verify", suite=args.suite, n=args.n, seed=seed, trials=args.trials, rng="mt19937")
    ok = True
    for name in suites:
        for rep in _suite(name, args.n, args.trials, seed):
            out.append("")
            out.append(f"suite = {name}")
            out.extend(rep.to_lines())
            ok = ok and rep.passed
    out.append("")
    out.append(f"result = {'pass' if ok else 'fail'}")
    return ok


def cmd_cohomology(args, out: list) -> bool:
    _check_n(args.n)
    if args.window > 3:
        raise UsageError("window must be at most 3")
    if args.model == "laurent-derham":
        c = laurent_de_rham_complex(args.n, args.window)
    else:
        c = schouten_complex(VolumeForm.standard(args.n), args.n, args.window)
    dims = cohomology_dims(c)
    _header(out, "cohomology", model=args.model, n=args.n, window=args.window)
    for note in c.notes:
        out.append(f"note = {note}")
    if args.emit_complex:
        out.append(complex_to_text(c, {"model": args.model, "n": str(args.n), "window": str(args.window)}).rstrip("\n"))
    out.append(" ".join(f"H{k}={dims[k]}" for k in sorted(dims)))
    return True


def _omega(args) -> ConnectionDatum:
    n = _dim_of([args.omega], args.n)
    omega = parse(args.omega, n, "form")
    if not isinstance(omega, DifferentialForm):
        raise UsageError("--omega must be a 1-form")
    if omega.degrees() - {1}:
        raise UsageError("--omega must be a 1-form")
    datum = ConnectionDatum(omega, ring=args.ring)
    if not datum.is_flat():
        raise UsageError("omega is not closed, so the connection is not flat")
    return datum


def cmd_deform(args, out: list) -> bool:
    datum = _omega(args)
    _header(out, "deform", action=args.action, n=datum.n, ring=datum.ring, window=args.window,
            omega=datum.omega)
    e = build_E_algebra(datum, window=args.window)
    report = validate_deformation(e)
    if args.action == "build":
        out.extend(report.to_lines())
        if args.emit_datum:
            out.append(e.to_text().rstrip("\n"))
        return report.passed
    if args.action == "extract":
        out.extend(extraction_report(e).to_lines())
        try:
            extract_local_system(e)
        except ExtractionError as exc:
            out.append("extract = fail")
            out.append(f"reason = {exc}")
            return False
        out.append("extract = pass")
        return True
    # roundtrip: build, validate, extract and compare classes
    out.extend(report.to_lines())
    try:
        back = extract_local_system(e)
    except ExtractionError as exc:
        out.append("extract = fail")
        out.append(f"reason = {exc}")
        return False
    diff = back.omega - datum.omega
    primitive = is_exact(diff, datum.ring)
    out.append(f"extracted_omega = {back.omega}")
    out.append(f"cohomologous = {'pass' if primitive is not None else 'fail'}")
    if primitive is not None:
        out.append(f"primitive = {primitive}")
    if datum.ring == "laurent" and datum.n == 1:
        out.append(f"class_dimension = {class_dimension([datum.omega, back.omega], args.window)}")
    return report.passed and primitive is not None


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyvector", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bracket", help="Schouten bracket of two multivectors")
    b.add_argument("a")
    b.add_argument("b")
    b.add_argument("--via", choices=["axioms", "koszul"], default="axioms")
    b.add_argument("--volume", help="volume form for --via koszul (default dz1^...^dzn)")
    b.add_argument("--n", type=int)
    b.set_defaults(func=cmd_bracket)

    d = sub.add_parser("delta", help="BV operator of a multivector")
    d.add_argument("x")
    d.add_argument("--volume")
    d.add_argument("--n", type=int)
    d.set_defaults(func=cmd_delta)

    y = sub.add_parser("yukawa", help="Yukawa product and bracket of two forms")
    y.add_argument("alpha")
    y.add_argument("beta")
    y.add_argument("--volume")
    y.add_argument("--n", type=int)
    y.set_defaults(func=cmd_yukawa)

    v = sub.add_parser("verify", help="randomized property suites")
    v.add_argument("suite", choices=["lie", "bv", "complexification", "all"])
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--seed", type=int)
    v.add_argument("--trials", type=int, default=200)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cohomology", help="cohomology dimensions of a windowed Laurent model")
    c.add_argument("--model", choices=["laurent-derham", "schouten"], required=True)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--window", type=int, default=2)
    c.add_argument("--emit-complex", action="store_true", help="also print the complex in text format")
    c.set_defaults(func=cmd_cohomology)

    f = sub.add_parser("deform", help="deformation data from a unipotent flat connection")
    f.add_argument("action", choices=["build", "extract", "roundtrip"])
    f.add_argument("--omega", required=True, help="closed 1-form, e.g. 'z1^-1*dz1'")
    f.add_argument("--n", type=int)
    f.add_argument("--ring", choices=["laurent", "polynomial"], default="laurent")
    f.add_argument("--window", type=int, default=2)
    f.add_argument("--emit-datum", action="store_true", help="also print the delta matrix")
    f.set_defaults(func=cmd_deform)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out: list[str] = []
    try:
        ok = args.func(args, out)
    except (UsageError, ParseError, TypeMismatchError, WindowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write("\n".join(out) + "\n")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
