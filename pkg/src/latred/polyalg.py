"""Integer polynomial arithmetic and coefficient-matrix machinery.

Covers checking coprimality of two integer polynomials through the
determinant of their shifted-coefficient matrix (never by polynomial
long division, whose coefficient growth is exponential), and exact
determinants/adjugate entries of matrices whose entries are degree <= 1
polynomials, computed by fraction-free elimination over Z[x].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .exactlinalg import IntMatrix, det
from .exactnum import format_int


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with integer coefficients, constant term first.

    Coefficients are kept canonical: no trailing zeros, the zero
    polynomial is the empty tuple (degree -1).
    """

    coeffs: tuple[int, ...]

    @classmethod
    def of(cls, *coeffs: int) -> "IntPoly":
        return cls.from_coeffs(coeffs)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "IntPoly":
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls.from_coeffs([c])

    @classmethod
    def linear(cls, slope: int, constant: int) -> "IntPoly":
        return cls.from_coeffs([constant, slope])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> int:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def __add__(self, other: "IntPoly") -> "IntPoly":
        m = max(len(self.coeffs), len(other.coeffs))
        return IntPoly.from_coeffs(
            [self.coeff(k) + other.coeff(k) for k in range(m)]
        )

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        m = max(len(self.coeffs), len(other.coeffs))
        return IntPoly.from_coeffs(
            [self.coeff(k) - other.coeff(k) for k in range(m)]
        )

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        if self.is_zero() or other.is_zero():
            return IntPoly(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPoly.from_coeffs(out)

    def scale(self, c: int) -> "IntPoly":
        return IntPoly.from_coeffs([c * v for v in self.coeffs])

    def divexact(self, other: "IntPoly") -> "IntPoly":
        """Exact division in Z[x]; raises if the quotient is not exact."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return IntPoly(())
        rem = list(self.coeffs)
        dlead = other.coeffs[-1]
        dd = other.degree
        qd = self.degree - dd
        if qd < 0:
            raise ValueError("division is not exact")
        q = [0] * (qd + 1)
        for k in range(qd, -1, -1):
            c = rem[k + dd]
            if c % dlead:
                raise ValueError("division is not exact")
            q[k] = c // dlead
            for i, b in enumerate(other.coeffs):
                rem[k + i] -= q[k] * b
        if any(rem):
            raise ValueError("division is not exact")
        return IntPoly.from_coeffs(q)

    def evaluate(self, v: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def to_json(self) -> list[str]:
        return [format_int(c) for c in self.coeffs]

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            parts.append(f"{c}" if k == 0 else f"{c}*x^{k}")
        return " + ".join(parts)


def evaluate(f: IntPoly, v: int) -> int:
    return f.evaluate(v)


@dataclass(frozen=True)
class LinPolyMatrix:
    """Square matrix whose (i, j) entry is linear[i][j]*x + constant[i][j]."""

    linear: IntMatrix
    constant: IntMatrix

    def __post_init__(self) -> None:
        if self.linear.n != self.constant.n:
            raise ValueError("linear and constant parts must match in size")

    @property
    def n(self) -> int:
        return self.linear.n

    def entry(self, i: int, j: int) -> IntPoly:
        """Entry at 0-indexed position (i, j)."""
        return IntPoly.linear(self.linear.rows[i][j], self.constant.rows[i][j])

    def add_constant(self, i: int, j: int, delta: int) -> "LinPolyMatrix":
        """New matrix with delta added to the constant part at 0-indexed (i, j)."""
        rows = [list(r) for r in self.constant.rows]
        rows[i][j] += delta
        return LinPolyMatrix(self.linear, IntMatrix.from_rows(rows))

    def top_left(self, k: int) -> list[list[IntPoly]]:
        return [[self.entry(i, j) for j in range(k)] for i in range(k)]

    def evaluate(self, v: int) -> IntMatrix:
        n = self.n
        return IntMatrix.from_rows(
            [
                [
                    self.linear.rows[i][j] * v + self.constant.rows[i][j]
                    for j in range(n)
                ]
                for i in range(n)
            ]
        )


def polymat_det(rows: Sequence[Sequence[IntPoly]]) -> IntPoly:
    """Exact determinant of a matrix of integer polynomials.

    Fraction-free elimination over Z[x]: every division is exact in the
    polynomial ring, so coefficients stay integral throughout.
    """
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("matrix must be square with dimension >= 1")
    a = [list(r) for r in rows]
    sign = 1
    prev = IntPoly.const(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return IntPoly(())
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                a[i][j] = (pivot * a[i][j] - aik * a[k][j]).divexact(prev)
            a[i][k] = IntPoly(())
        prev = pivot
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


def linpoly_minor_det(m: LinPolyMatrix, deleted_row: int, deleted_col: int) -> IntPoly:
    """Determinant of the minor of m with the given row and column removed.

    ``deleted_row`` and ``deleted_col`` are 1-indexed, matching the usual
    cofactor notation; the matrix must be at least 2 x 2.
    """
    n = m.n
    if not (1 <= deleted_row <= n and 1 <= deleted_col <= n):
        raise ValueError("deleted row/column out of range")
    if n < 2:
        raise ValueError("minor requires dimension >= 2")
    rows = [
        [m.entry(i, j) for j in range(n) if j != deleted_col - 1]
        for i in range(n)
        if i != deleted_row - 1
    ]
    return polymat_det(rows)


def adj_entry(m: LinPolyMatrix, i: int, j: int) -> IntPoly:
    """Entry (i, j) of the adjugate of m, 1-indexed:
    (-1)**(i+j) times the minor with row j and column i deleted."""
    d = linpoly_minor_det(m, j, i)
    return -d if (i + j) % 2 else d


def coeff_matrix(f1: IntPoly, f2: IntPoly) -> IntMatrix:
    """The 2d x 2d matrix of shifted coefficient columns of f1 and f2,
    where d = max(deg f1, deg f2) >= 1.

    Column k (0-indexed, k < d) holds the coefficients of x**(d-1-k) * f1
    laid out from degree 2d-1 down to 0; columns d..2d-1 do the same for
    f2.  Its determinant vanishes exactly when f1 and f2 share a root
    over the algebraic closure of the rationals.
    """
    d = max(f1.degree, f2.degree)
    if d < 1:
        raise ValueError("at least one polynomial must be nonconstant")
    size = 2 * d
    rows = []
    for i in range(size):
        row = [f1.coeff(d - i + k) for k in range(d)]
        row += [f2.coeff(d - i + k) for k in range(d)]
        rows.append(row)
    return IntMatrix.from_rows(rows)


def det_coeff_matrix(f1: IntPoly, f2: IntPoly) -> int:
    """Determinant of coeff_matrix(f1, f2); nonzero iff f1, f2 share no
    root over the algebraic closure of the rationals."""
    return det(coeff_matrix(f1, f2))


def det_coeff_matrix_with_cofactors(
    f1: IntPoly, f2: IntPoly
) -> tuple[int, IntPoly, IntPoly]:
    """Determinant D of coeff_matrix(f1, f2) together with g1, g2 of
    degree <= d-1 satisfying f1*g1 + f2*g2 = D identically.

    The witnesses come from the last column of the adjugate of the
    coefficient matrix; the identity is verified before returning.
    """
    c = coeff_matrix(f1, f2)
    size = c.n
    d = size // 2
    value = det(c)
    w = []
    for i in range(size):
        sign = -1 if (size - 1 + i) % 2 else 1
        w.append(sign * det(_drop(c, size - 1, i)))
    g1 = IntPoly.from_coeffs(list(reversed(w[:d])))
    g2 = IntPoly.from_coeffs(list(reversed(w[d:])))
    if f1 * g1 + f2 * g2 != IntPoly.const(value):
        raise AssertionError("cofactor identity failed")
    return value, g1, g2


def _drop(m: IntMatrix, drop_row: int, drop_col: int) -> IntMatrix:
    rows = [
        tuple(v for j, v in enumerate(row) if j != drop_col)
        for i, row in enumerate(m.rows)
        if i != drop_row
    ]
    return IntMatrix(tuple(rows))
