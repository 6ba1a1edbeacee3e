"""Text form of polynomials, multivectors and forms, and its parser.

Grammar (``^`` is the wedge and binds tighter than ``*``)::

    expr   := term (('+' | '-') term)*
    term   := wedge ('*' wedge)*
    wedge  := factor ('^' factor)*
    factor := rational | 'z' INT ('^' SINT)? | 'd' INT | 'dz' INT | '(' expr ')'
            | '-' factor

Printed terms look like ``c*z1^k1*z2^k2*d1^d2``: the coefficient is always
written, factors with exponent 0 are omitted and ``^1`` is dropped.  Terms are
ordered by basis tuple (shorter first, then lexicographic) and then by
descending lexicographic exponent vector.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .coeff import LaurentPolynomial, format_fraction

__all__ = [
    "ParseError",
    "TypeMismatchError",
    "format_graded",
    "format_terms",
    "parse",
]


class ParseError(ValueError):
    """Syntax error, with 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class TypeMismatchError(TypeError):
    """Combination of a multivector with a differential form."""

    def __init__(self, left: str, right: str, op: str):
        super().__init__(f"cannot combine {left} and {right} with '{op}'")
        self.kinds = (left, right)


def _monomial_text(exp: tuple[int, ...]) -> str:
    parts = []
    for i, k in enumerate(exp):
        if k == 0:
            continue
        parts.append(f"z{i + 1}" if k == 1 else f"z{i + 1}^{k}")
    return "*".join(parts)


def format_terms(terms: Iterable[tuple[str, tuple[int, ...], Fraction]]) -> str:
    """Join ``(basis_text, exponent, coeff)`` triples, already in print order."""
    pieces = []
    for basis, exp, c in terms:
        body = "*".join(p for p in (format_fraction(abs(c)), _monomial_text(exp), basis) if p)
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces) if pieces else "0"


def _sorted_poly_items(p: LaurentPolynomial):
    return sorted(p.items(), key=lambda t: t[0], reverse=True)


def poly_terms(p: LaurentPolynomial, basis: str = ""):
    for e, c in _sorted_poly_items(p):
        yield basis, e, c


def format_graded(x) -> str:
    sym = x._symbol
    terms = []
    for idx in sorted(x._comps, key=lambda b: (len(b), b)):
        basis = "^".join(f"{sym}{i + 1}" for i in idx)
        terms.extend(poly_terms(x._comps[idx], basis))
    return format_terms(terms)


# -- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rational>\d+(?:/\d+)?)
  | (?P<dz>dz(?P<dzi>\d+))
  | (?P<d>d(?P<di>\d+))
  | (?P<z>z(?P<zi>\d+))
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    value: object
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.group("ws") is not None:
            for k, ch in enumerate(m.group()):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        elif m.group("rational") is not None:
            num, _, den = m.group("rational").partition("/")
            if den and int(den) == 0:
                raise ParseError("zero denominator", line, col)
            toks.append(_Tok("num", m.group(), Fraction(int(num), int(den or 1)), line, col))
        elif m.group("dz") is not None:
            toks.append(_Tok("dz", m.group(), int(m.group("dzi")), line, col))
        elif m.group("d") is not None:
            toks.append(_Tok("d", m.group(), int(m.group("di")), line, col))
        elif m.group("z") is not None:
            toks.append(_Tok("z", m.group(), int(m.group("zi")), line, col))
        else:
            toks.append(_Tok(m.group(), m.group(), None, line, col))
        pos = m.end()
    toks.append(_Tok("end", "", None, line, len(text) - line_start + 1))
    return toks


# Intermediate values carry an explicit kind so that a polynomial can be
# promoted to either graded kind lazily, once the dimension is known.
@dataclass(frozen=True)
class _Val:
    kind: str  # "poly" | "mv" | "form"
    terms: dict  # (basis tuple, exponent dict items) -> Fraction

    @staticmethod
    def const(c: Fraction) -> "_Val":
        return _Val("poly", {((), ()): c} if c else {})


def _normalize(terms: dict) -> dict:
    return {k: v for k, v in terms.items() if v}


def _add(a: _Val, b: _Val, op: str) -> _Val:
    kind = _join_kind(a, b, op)
    out = dict(a.terms)
    for k, v in b.terms.items():
        out[k] = out.get(k, 0) + (v if op == "+" else -v)
    return _Val(kind, _normalize(out))


def _join_kind(a: _Val, b: _Val, op: str) -> str:
    if a.kind == "poly":
        return b.kind
    if b.kind == "poly" or a.kind == b.kind:
        return a.kind
    raise TypeMismatchError(_KIND_NAMES[a.kind], _KIND_NAMES[b.kind], op)


_KIND_NAMES = {"poly": "polynomial", "mv": "multivector", "form": "differential form"}


def _mul_exp(e1, e2):
    d = dict(e1)
    for i, k in e2:
        d[i] = d.get(i, 0) + k
    return tuple(sorted((i, k) for i, k in d.items() if k))


def _product(a: _Val, b: _Val, op: str) -> _Val:
    from .exterior import sort_with_sign

    if op == "*" and a.kind != "poly" and b.kind != "poly":
        raise TypeMismatchError(_KIND_NAMES[a.kind], _KIND_NAMES[b.kind], op)
    kind = _join_kind(a, b, op)
    out: dict = {}
    for (ba, ea), ca in a.terms.items():
        for (bb, eb), cb in b.terms.items():
            sign, basis = sort_with_sign(ba + bb)
            if not sign:
                continue
            key = (basis, _mul_exp(ea, eb))
            out[key] = out.get(key, 0) + sign * ca * cb
    return _Val(kind, _normalize(out))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def parse(self) -> _Val:
        if self.peek().kind == "end":
            self.fail("empty expression")
        val = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected token {self.peek().text!r}")
        return val

    def expr(self) -> _Val:
        val = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            val = _add(val, self.term(), op)
        return val

    def term(self) -> _Val:
        val = self.wedge()
        while self.peek().kind == "*":
            self.take()
            val = _product(val, self.wedge(), "*")
        return val

    def wedge(self) -> _Val:
        val = self.factor()
        while self.peek().kind == "^":
            self.take()
            val = _product(val, self.factor(), "^")
        return val

    def factor(self) -> _Val:
        tok = self.take()
        if tok.kind == "num":
            return _Val.const(tok.value)
        if tok.kind == "-":
            inner = self.factor()
            return _Val(inner.kind, {k: -v for k, v in inner.terms.items()})
        if tok.kind == "z":
            self._check_index(tok)
            power = 1
            if self.peek().kind == "^" and self._exponent_follows():
                self.take()
                sign = 1
                if self.peek().kind in ("-", "+"):
                    sign = -1 if self.take().kind == "-" else 1
                num = self.take()
                if num.kind != "num" or num.value.denominator != 1:
                    self.fail("expected an integer exponent", num)
                power = sign * num.value.numerator
            exp = ((tok.value - 1, power),) if power else ()
            return _Val("poly", {((), exp): Fraction(1)})
        if tok.kind in ("d", "dz"):
            self._check_index(tok)
            return _Val("mv" if tok.kind == "d" else "form", {((tok.value - 1,), ()): Fraction(1)})
        if tok.kind == "(":
            val = self.expr()
            if self.take().kind != ")":
                self.fail("expected ')'", self.toks[self.pos - 1])
            return val
        self.fail(f"unexpected token {tok.text!r}" if tok.kind != "end" else "unexpected end", tok)

    def _exponent_follows(self) -> bool:
        nxt = self.toks[self.pos + 1]
        if nxt.kind == "num":
            return True
        return nxt.kind in ("-", "+") and self.toks[self.pos + 2].kind == "num"

    def _check_index(self, tok: _Tok):
        if tok.value < 1:
            self.fail(f"index in {tok.text!r} must be >= 1", tok)


def _max_index(val: _Val) -> int:
    m = 0
    for basis, exp in val.terms:
        for i in basis:
            m = max(m, i + 1)
        for i, _ in exp:
            m = max(m, i + 1)
    return m


def parse(text: str, dim: int | None = None, kind: str | None = None):
    """Parse ``text`` into a LaurentPolynomial, Multivector or DifferentialForm.

    ``dim`` defaults to the largest index mentioned (at least 1).  ``kind``
    ("mv" or "form") promotes a pure polynomial to that graded kind.
    """
    from .exterior import DifferentialForm, Multivector

    val = _Parser(text).parse()
    need = _max_index(val)
    if dim is None:
        dim = max(need, 1)
    elif need > dim:
        raise ValueError(f"expression uses index {need} but dimension is {dim}")
    target = val.kind if val.kind != "poly" else (kind or "poly")
    if kind and val.kind != "poly" and kind != val.kind:
        raise TypeMismatchError(_KIND_NAMES[val.kind], _KIND_NAMES[kind], "as")
    if target == "poly":
        terms = {}
        for (_, exp), c in val.terms.items():
            e = [0] * dim
            for i, k in exp:
                e[i] = k
            terms[tuple(e)] = c
        return LaurentPolynomial(dim, terms)
    comps: dict = {}
    for (basis, exp), c in val.terms.items():
        e = [0] * dim
        for i, k in exp:
            e[i] = k
        comps.setdefault(basis, {})[tuple(e)] = c
    cls = Multivector if target == "mv" else DifferentialForm
    return cls(dim, {b: LaurentPolynomial(dim, t) for b, t in comps.items()})
