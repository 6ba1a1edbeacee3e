"""Sparse exact matrices over Q with fraction-free row reduction.

Rows are stored as ``{column: Fraction}`` dicts.  Reduction scales each row to
integers and eliminates with integer combinations, dividing out the content
of every new row, so intermediate numbers stay small.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

__all__ = ["QMatrix", "free_columns", "nullspace", "rank", "solve"]


class QMatrix:
    """Immutable sparse rational matrix of shape ``(nrows, ncols)``."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, entries: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        rows: list[dict[int, Fraction]] = [dict() for _ in range(nrows)]
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i}, {j}) outside {nrows}x{ncols}")
            v = Fraction(v)
            if v:
                rows[i][j] = rows[i].get(j, 0) + v
        self._rows = [{j: v for j, v in r.items() if v} for r in rows]

    @classmethod
    def from_rows(cls, nrows: int, ncols: int, rows: list[dict]) -> "QMatrix":
        m = cls(nrows, ncols)
        m._rows = [{j: Fraction(v) for j, v in r.items() if v} for r in rows]
        return m

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[dict]) -> "QMatrix":
        rows: list[dict] = [dict() for _ in range(nrows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rows[i][j] = Fraction(v)
        return cls.from_rows(nrows, len(columns), rows)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence]) -> "QMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        return cls.from_rows(nrows, ncols, [{j: v for j, v in enumerate(r) if v} for r in data])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def row(self, i: int) -> dict[int, Fraction]:
        return dict(self._rows[i])

    def column(self, j: int) -> dict[int, Fraction]:
        return {i: r[j] for i, r in enumerate(self._rows) if j in r}

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._rows[i].get(j, Fraction(0))

    def entries(self) -> dict[tuple[int, int], Fraction]:
        return {(i, j): v for i, r in enumerate(self._rows) for j, v in r.items()}

    def to_dense(self) -> list[list[Fraction]]:
        return [[r.get(j, Fraction(0)) for j in range(self.ncols)] for r in self._rows]

    def is_zero(self) -> bool:
        return not any(self._rows)

    def transpose(self) -> "QMatrix":
        return QMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries().items()})

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for r in self._rows:
            acc: dict[int, Fraction] = {}
            for k, v in r.items():
                for j, w in other._rows[k].items():
                    acc[j] = acc.get(j, 0) + v * w
            out.append({j: v for j, v in acc.items() if v})
        return QMatrix.from_rows(self.nrows, other.ncols, out)

    def apply(self, vec: dict[int, Fraction]) -> dict[int, Fraction]:
        out = {}
        for i, r in enumerate(self._rows):
            s = sum((v * vec[j] for j, v in r.items() if j in vec), Fraction(0))
            if s:
                out[i] = s
        return out

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        e = self.entries()
        for k, v in other.entries().items():
            e[k] = e.get(k, 0) + v
        return QMatrix(self.nrows, self.ncols, e)

    def __neg__(self) -> "QMatrix":
        return self * -1

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return self + (-other)

    def __mul__(self, c) -> "QMatrix":
        c = Fraction(c)
        return QMatrix.from_rows(self.nrows, self.ncols, [{j: v * c for j, v in r.items()} for r in self._rows])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "QMatrix":
        rows, cols = list(rows), list(cols)
        cmap = {c: k for k, c in enumerate(cols)}
        return QMatrix.from_rows(len(rows), len(cols), [
            {cmap[j]: v for j, v in self._rows[i].items() if j in cmap} for i in rows
        ])

    def rank(self) -> int:
        return rank(self)

    def nullspace(self) -> list[dict[int, Fraction]]:
        return nullspace(self)

    def __repr__(self):
        return f"QMatrix({self.nrows}x{self.ncols}, nnz={sum(map(len, self._rows))})"


def _integer_row(row: dict[int, Fraction]) -> dict[int, int]:
    den = reduce(lcm, (v.denominator for v in row.values()), 1)
    ints = {j: int(v * den) for j, v in row.items()}
    g = reduce(gcd, ints.values(), 0)
    if g > 1:
        ints = {j: v // g for j, v in ints.items()}
    return ints


def _eliminate(target: dict[int, int], pivot: dict[int, int], col: int) -> dict[int, int]:
    """``pivot[col]*target - target[col]*pivot``, content removed."""
    a, b = pivot[col], target[col]
    out = {j: a * v for j, v in target.items()}
    for j, v in pivot.items():
        out[j] = out.get(j, 0) - b * v
    out = {j: v for j, v in out.items() if v}
    g = reduce(gcd, out.values(), 0)
    if g > 1:
        out = {j: v // g for j, v in out.items()}
    return out


def _echelon(m: QMatrix, reduced: bool) -> tuple[list[dict[int, int]], list[int]]:
    """Row echelon form (integer rows) and pivot columns, in pivot order."""
    pending = [_integer_row(r) for r in m._rows if r]
    pivots: list[int] = []
    done: list[dict[int, int]] = []
    by_col: dict[int, dict[int, int]] = {}
    for row in pending:
        # reduce against existing pivots until a new leading column appears
        while row:
            lead = min(row)
            p = by_col.get(lead)
            if p is None:
                break
            row = _eliminate(row, p, lead)
        if not row:
            continue
        lead = min(row)
        if reduced:
            for other in done:
                if lead in other:
                    idx = done.index(other)
                    done[idx] = _eliminate(other, row, lead)
                    by_col[pivots[idx]] = done[idx]
        by_col[lead] = row
        done.append(row)
        pivots.append(lead)
    if reduced:
        # finish back-substitution so every pivot column is clean
        for k, col in enumerate(pivots):
            for idx in range(len(done)):
                if idx != k and col in done[idx]:
                    done[idx] = _eliminate(done[idx], done[k], col)
                    by_col[pivots[idx]] = done[idx]
    return done, pivots


def rank(m: QMatrix) -> int:
    return len(_echelon(m, reduced=False)[1])


def free_columns(m: QMatrix) -> list[int]:
    """Non-pivot columns; coordinates of a kernel vector in the :func:`nullspace` basis."""
    pivots = set(_echelon(m, reduced=False)[1])
    return [j for j in range(m.ncols) if j not in pivots]


def nullspace(m: QMatrix) -> list[dict[int, Fraction]]:
    """Kernel basis; vector ``k`` is 1 at the k-th free column and 0 at the others."""
    rows, pivots = _echelon(m, reduced=True)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.ncols):
        if f in pivot_set:
            continue
        vec = {f: Fraction(1)}
        for row, p in zip(rows, pivots):
            if f in row:
                vec[p] = Fraction(-row[f], row[p])
        basis.append(vec)
    return basis


def solve(m: QMatrix, rhs: dict[int, Fraction]) -> dict[int, Fraction] | None:
    """One solution ``x`` of ``m x = rhs`` (free variables 0), or ``None``."""
    aug_rows = []
    for i, r in enumerate(m._rows):
        row = dict(r)
        if rhs.get(i):
            row[m.ncols] = Fraction(rhs[i])
        aug_rows.append(row)
    aug = QMatrix.from_rows(m.nrows, m.ncols + 1, aug_rows)
    rows, pivots = _echelon(aug, reduced=True)
    if m.ncols in pivots:
        return None
    x = {}
    for row, p in zip(rows, pivots):
        v = row.get(m.ncols, 0)
        if v:
            x[p] = Fraction(v, row[p])
    return x
