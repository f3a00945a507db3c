"""Exact integer and rational linear algebra.

Determinants and adjugates use fraction-free (Bareiss) elimination, so
every intermediate value stays an integer.  Rational solves go through
Cramer's rule.  Norm values are kept exactly comparable by storing the
squared value for the Euclidean norm.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exactnum import Rat, format_int, lcd, parse_int


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Square integer matrix with immutable rows."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        if n == 0 or any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square with dimension >= 1")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(v) for v in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        )

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> list[list[int]]:
        return [list(self.column(j)) for j in range(self.n)]

    def mul_vec(self, v: Sequence[int | Rat]) -> tuple:
        if len(v) != self.n:
            raise ValueError("dimension mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def mul_mat(self, other: "IntMatrix") -> "IntMatrix":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        n = self.n
        cols = [other.column(j) for j in range(n)]
        return IntMatrix.from_rows(
            [[sum(row[k] * col[k] for k in range(n)) for col in cols] for row in self.rows]
        )

    def max_abs_entry(self) -> int:
        return max(abs(v) for row in self.rows for v in row)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.rows for v in row)

    def to_json(self) -> list[list[str]]:
        return [[format_int(v) for v in row] for row in self.rows]

    @classmethod
    def from_json(cls, rows: Sequence[Sequence[str]]) -> "IntMatrix":
        return cls.from_rows([[parse_int(v) for v in row] for row in rows])


def det(m: IntMatrix) -> int:
    """Exact determinant by fraction-free elimination."""
    n = m.n
    a = [list(row) for row in m.rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                a[i][j] = (pivot * a[i][j] - aik * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def _minor(m: IntMatrix, drop_row: int, drop_col: int) -> IntMatrix:
    rows = [
        tuple(v for j, v in enumerate(row) if j != drop_col)
        for i, row in enumerate(m.rows)
        if i != drop_row
    ]
    return IntMatrix(tuple(rows))


def cofactor(m: IntMatrix, i: int, j: int) -> int:
    """Signed minor determinant with rows/columns 0-indexed."""
    if m.n == 1:
        return 1
    sign = -1 if (i + j) % 2 else 1
    return sign * det(_minor(m, i, j))


def adjugate(m: IntMatrix) -> IntMatrix:
    """Matrix adj(m) with m * adj(m) = det(m) * identity, exactly."""
    n = m.n
    if n == 1:
        return IntMatrix.from_rows([[1]])
    return IntMatrix.from_rows(
        [[cofactor(m, j, i) for j in range(n)] for i in range(n)]
    )


def adjugate_entry(m: IntMatrix, i: int, j: int) -> int:
    """Entry (i, j) of adj(m) with 1-indexed positions."""
    return cofactor(m, j - 1, i - 1)


def solve_rational(m: IntMatrix, v: Sequence[Rat | int]) -> tuple[Rat, ...]:
    """Solve m * x = v exactly over the rationals (Cramer's rule)."""
    n = m.n
    if len(v) != n:
        raise ValueError("dimension mismatch")
    d = det(m)
    if d == 0:
        raise SingularMatrixError("matrix is singular")
    scale = lcd(v)
    w = [int(Fraction(x) * scale) for x in v]
    out = []
    for j in range(n):
        repl = IntMatrix.from_rows(
            [
                [w[i] if k == j else m.rows[i][k] for k in range(n)]
                for i in range(n)
            ]
        )
        out.append(Fraction(det(repl), d * scale))
    return tuple(out)


class NormKind(enum.Enum):
    L1 = "1"
    L2 = "2"
    LINF = "inf"

    @classmethod
    def parse(cls, s: str) -> "NormKind":
        for kind in cls:
            if kind.value == s:
                return kind
        raise ValueError(f"unknown norm {s!r}; expected one of 1, 2, inf")


@dataclass(frozen=True)
class NormValue:
    """Exact norm of a rational vector.

    ``value`` is the norm itself for the 1- and sup-norms and the
    *squared* norm for the Euclidean norm, so comparisons stay within
    the rationals.  Values of different kinds are not comparable.
    """

    kind: NormKind
    value: Rat

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("norm value must be nonnegative")

    def _check(self, other: "NormValue") -> None:
        if self.kind != other.kind:
            raise TypeError("cannot compare norms of different kinds")

    def __lt__(self, other: "NormValue") -> bool:
        self._check(other)
        return self.value < other.value

    def __le__(self, other: "NormValue") -> bool:
        self._check(other)
        return self.value <= other.value

    def is_zero(self) -> bool:
        return self.value == 0


def norm(v: Sequence[Rat | int], kind: NormKind) -> NormValue:
    vals = [Fraction(x) for x in v]
    if kind is NormKind.L1:
        return NormValue(kind, sum(abs(x) for x in vals))
    if kind is NormKind.LINF:
        return NormValue(kind, max(abs(x) for x in vals))
    return NormValue(kind, sum(x * x for x in vals))


def int_norm_key(v: Sequence[int], kind: NormKind) -> int:
    """Integer comparison key for the norm of an integer vector.

    Equals the norm for L1/LINF and the squared norm for L2; ordering
    matches NormValue ordering of the same kind.
    """
    if kind is NormKind.L1:
        return sum(abs(x) for x in v)
    if kind is NormKind.LINF:
        return max(abs(x) for x in v)
    return sum(x * x for x in v)


@dataclass(frozen=True)
class PivotNormalization:
    """Signed row permutation and column permutation moving the entry of
    maximal magnitude to position (n, 1) with positive sign.

    ``matrix[i][j] = row_signs[i] * original[row_perm[i]][col_perm[j]]``,
    and a solution q' for ``matrix`` maps back through ``map_solution``.
    """

    matrix: IntMatrix
    row_perm: tuple[int, ...]
    row_signs: tuple[int, ...]
    col_perm: tuple[int, ...]

    def map_solution(self, q: Sequence[int]) -> tuple[int, ...]:
        out = [0] * len(q)
        for j, qj in enumerate(q):
            out[self.col_perm[j]] = qj
        return tuple(out)


def normalize_pivot(m: IntMatrix) -> PivotNormalization:
    """Move the first entry of maximal magnitude to (n, 1), made positive
    by negating its row; row moves are an isometry for every norm kind."""
    if m.is_zero():
        raise ValueError("zero matrix has no pivot")
    n = m.n
    best = (0, 0)
    best_val = 0
    for i in range(n):
        for j in range(n):
            if abs(m.rows[i][j]) > best_val:
                best_val = abs(m.rows[i][j])
                best = (i, j)
    row_perm = list(range(n))
    col_perm = list(range(n))
    bi, bj = best
    row_perm[n - 1], row_perm[bi] = row_perm[bi], row_perm[n - 1]
    col_perm[0], col_perm[bj] = col_perm[bj], col_perm[0]
    row_signs = [1] * n
    if m.rows[row_perm[n - 1]][col_perm[0]] < 0:
        row_signs[n - 1] = -1
    rows = [
        tuple(row_signs[i] * m.rows[row_perm[i]][col_perm[j]] for j in range(n))
        for i in range(n)
    ]
    return PivotNormalization(
        IntMatrix(tuple(rows)),
        tuple(row_perm),
        tuple(row_signs),
        tuple(col_perm),
    )


def op_norm_bound(m: IntMatrix, kind: NormKind) -> Rat:
    """Operator norm of m: exact for L1 (max column abs-sum) and LINF
    (max row abs-sum); for L2 a valid upper bound, the squared Frobenius
    value (callers compare against its square root by squaring)."""
    if kind is NormKind.L1:
        return Fraction(
            max(sum(abs(row[j]) for row in m.rows) for j in range(m.n))
        )
    if kind is NormKind.LINF:
        return Fraction(max(sum(abs(v) for v in row) for row in m.rows))
    return Fraction(sum(v * v for row in m.rows for v in row))
