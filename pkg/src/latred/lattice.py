"""Exact search for short vectors in integer lattices.

Everything here is exact: basis preprocessing uses the all-integer
variant of LLL (delta = 3/4), and the depth-first enumeration keeps its
Gram-Schmidt data as rationals.  LLL only speeds the search up; the
enumeration itself certifies minimality, so results are exact whatever
the basis quality.  No floating point anywhere.

Bases are lists of columns (each a list of ints).  The callers in
``problems`` translate between problem statements and lattices.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .exactlinalg import NormKind, NormValue, int_norm_key


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def hnf_from_generators(gens: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Column basis (lower triangular, positive diagonal) of the lattice
    generated by the given columns; the span must have full rank n."""
    work = [list(g) for g in gens]
    basis: list[list[int]] = []
    for r in range(n):
        while True:
            nz = [c for c in work if c[r] != 0]
            if not nz:
                raise ValueError("generators do not have full rank")
            if len(nz) == 1:
                piv = nz[0]
                break
            nz.sort(key=lambda c: abs(c[r]))
            piv = nz[0]
            for c in nz[1:]:
                q = c[r] // piv[r]
                for i in range(n):
                    c[i] -= q * piv[i]
        if piv[r] < 0:
            for i in range(n):
                piv[i] = -piv[i]
        basis.append(piv)
        work = [c for c in work if c is not piv and any(c)]
    return basis


def lll_reduce(
    cols: Sequence[Sequence[int]],
) -> tuple[list[list[int]], list[list[int]]]:
    """All-integer LLL reduction (delta = 3/4) of an independent basis.

    Returns (reduced columns, transform), where transform[j] gives the
    coefficients of reduced column j in terms of the input columns.
    """
    n = len(cols)
    b = [list(c) for c in cols]
    u = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    lam = [[0] * n for _ in range(n)]
    d = [1] * (n + 1)
    for i in range(n):
        for j in range(i + 1):
            val = _dot(b[i], b[j])
            for k in range(j):
                val = (d[k + 1] * val - lam[i][k] * lam[j][k]) // d[k]
            if j < i:
                lam[i][j] = val
            else:
                if val == 0:
                    raise ValueError("columns are linearly dependent")
                d[i + 1] = val

    def redi(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            u[k] = [x - q * y for x, y in zip(u[k], u[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swapi(k: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        u[k], u[k - 1] = u[k - 1], u[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lam_k = lam[k][k - 1]
        new_dk = (d[k - 1] * d[k + 1] + lam_k * lam_k) // d[k]
        for i in range(k + 1, n):
            t_hi = lam[i][k]
            t_lo = lam[i][k - 1]
            lam[i][k] = (d[k + 1] * t_lo - lam_k * t_hi) // d[k]
            lam[i][k - 1] = (d[k - 1] * t_hi + lam_k * t_lo) // d[k]
        d[k] = new_dk

    k = 1
    while k < n:
        redi(k, k - 1)
        if 4 * (d[k + 1] * d[k - 1] + lam[k][k - 1] ** 2) < 3 * d[k] * d[k]:
            swapi(k)
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    return b, u


class _Box:
    """Mutable squared-Euclidean search budget shared across the DFS."""

    __slots__ = ("r2",)

    def __init__(self, r2: Fraction) -> None:
        self.r2 = r2


def _l2_budget(kind: NormKind, bound: Fraction, n: int) -> Fraction:
    """Squared-Euclidean radius covering every integer vector whose
    ``kind``-norm is at most ``bound`` (bound is squared for L2)."""
    if kind is NormKind.L2:
        return bound
    if kind is NormKind.L1:
        return bound * bound
    return n * bound * bound


class Enumerator:
    """Exact depth-first enumeration over an independent column basis."""

    def __init__(self, cols: Sequence[Sequence[int]]):
        reduced, transform = lll_reduce(cols)
        self.cols = reduced
        self.transform = transform
        self.n = len(reduced)
        self._gso()

    def _gso(self) -> None:
        n = self.n
        gram = [[_dot(self.cols[i], self.cols[j]) for j in range(n)] for i in range(n)]
        mu = [[Fraction(0)] * n for _ in range(n)]
        bsq = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                acc = Fraction(gram[i][j])
                for k in range(j):
                    acc -= mu[i][k] * mu[j][k] * bsq[k]
                mu[i][j] = acc / bsq[j]
            acc = Fraction(gram[i][i])
            for k in range(i):
                acc -= mu[i][k] * mu[i][k] * bsq[k]
            bsq[i] = acc
            if acc <= 0:
                raise ValueError("columns are linearly dependent")
        self.mu = mu
        self.bsq = bsq

    def vector(self, coeffs: Sequence[int]) -> list[int]:
        m = len(self.cols[0])
        out = [0] * m
        for x, col in zip(coeffs, self.cols):
            if x:
                for i in range(m):
                    out[i] += x * col[i]
        return out

    def original_coeffs(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        n = self.n
        out = [0] * n
        for x, t in zip(coeffs, self.transform):
            if x:
                for i in range(n):
                    out[i] += x * t[i]
        return tuple(out)

    def _candidates(self, box: _Box) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        """Yield (coeffs, squared L2 value) for nonzero vectors within the
        budget, one of each +/- pair (topmost nonzero coefficient > 0).

        The budget may shrink while iterating; branches are cut against
        its current value, which is sound because it only decreases.
        """
        n = self.n
        mu, bsq = self.mu, self.bsq
        x = [0] * n

        def dfs(level: int, used: Fraction, zero_above: bool) -> Iterator:
            center = Fraction(0)
            for j in range(level + 1, n):
                if x[j]:
                    center -= mu[j][level] * x[j]
            # nearest integer to center, halves rounding up
            start = (2 * center.numerator + center.denominator) // (
                2 * center.denominator
            )
            lo = 0 if zero_above else None
            first = start if lo is None else max(start, lo)
            for xv, step in ((first, 1), (first - 1, -1)):
                # |xv - center| grows monotonically along each sweep
                while lo is None or xv >= lo:
                    y = xv - center
                    total = used + bsq[level] * y * y
                    if total > box.r2:
                        break
                    x[level] = xv
                    still_zero = zero_above and xv == 0
                    if level == 0:
                        if not still_zero:
                            yield tuple(x), total
                    else:
                        yield from dfs(level - 1, total, still_zero)
                    xv += step
            x[level] = 0

        yield from dfs(n - 1, Fraction(0), True)

    def shortest(
        self,
        kind: NormKind,
        upper: int,
        admissible: Callable[[Sequence[int]], bool] | None = None,
    ) -> tuple[int, list[tuple[tuple[int, ...], list[int]]]]:
        """All admissible vectors of minimal ``kind``-norm.

        ``upper`` is an integer comparison key (see int_norm_key) known to
        be achieved by some admissible vector; if no admissible vector is
        found the budget grows, so the guarantee is only about speed.
        Returns (minimal key, list of (original-basis coeffs, vector)),
        one entry per +/- pair.
        """
        budget = _l2_budget(kind, Fraction(upper), self.n)
        for _ in range(64):
            box = _Box(budget)
            best_key: int | None = None
            best: list[tuple[tuple[int, ...], list[int]]] = []
            for coeffs, _l2 in self._candidates(box):
                v = self.vector(coeffs)
                if admissible is not None and not admissible(v):
                    continue
                key = int_norm_key(v, kind)
                if best_key is None or key < best_key:
                    best_key = key
                    best = [(coeffs, v)]
                    box.r2 = min(box.r2, _l2_budget(kind, Fraction(key), self.n))
                elif key == best_key:
                    best.append((coeffs, v))
            if best_key is not None:
                return best_key, [
                    (self.original_coeffs(c), v) for c, v in best
                ]
            budget *= 4
        raise AssertionError("no admissible lattice vector found")

    def within(
        self, kind: NormKind, bound_l2sq: Fraction
    ) -> list[tuple[tuple[int, ...], list[int]]]:
        """All nonzero vectors (one per +/- pair) whose squared Euclidean
        length is at most bound_l2sq, as (original coeffs, vector)."""
        box = _Box(bound_l2sq)
        out = []
        for coeffs, _l2 in self._candidates(box):
            v = self.vector(coeffs)
            out.append((self.original_coeffs(coeffs), v))
        return out


def norm_value_of_ints(v: Sequence[int], kind: NormKind, scale: int = 1) -> NormValue:
    """NormValue of the rational vector v / scale, computed from integers."""
    key = int_norm_key(v, kind)
    if kind is NormKind.L2:
        return NormValue(kind, Fraction(key, scale * scale))
    return NormValue(kind, Fraction(key, scale))
