"""Problem instances, brute-force oracles, verifiers and generators.

Three exact discrete problems over a consistent norm:

* short vector: nonsingular integer matrix M, find q with 0 < ||Mq||
  within the gap factor of the minimal nonzero lattice norm;
* simultaneous approximation: rational vector x, find an integer q whose
  fractional residual {q x} is nonzero and within the gap factor of the
  minimal nonzero residual;
* ranged approximation: additionally q must lie in [gap * N], compared
  against the minimum over [N].

The brute oracles return exact minimizers with pinned tie-breaks.  Small
denominators are scanned directly with integer arithmetic; otherwise the
instance is solved exactly as a lattice search (see ``lattice``), which
keeps the oracles usable on the very large denominators the reductions
produce.  Requested gaps below 1 are accepted: an exact minimizer
satisfies any gap >= 1 and, for the ranged problem, the search range
follows the contract range [gap * N] so the output range is honored.
"""

from __future__ import annotations

import hashlib
import json
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Mapping, Sequence

from .exactlinalg import (
    IntMatrix,
    NormKind,
    NormValue,
    det,
    int_norm_key,
    norm,
)
from .exactnum import (
    Rat,
    ext_gcd,
    format_rational,
    format_rational_vector,
    frac_vector,
    lcd,
    minimal_residue,
    parse_rational,
    parse_rational_vector,
)
from .lattice import Enumerator, hnf_from_generators, norm_value_of_ints


class LimitError(ValueError):
    """An instance exceeds the configured brute-force limits."""


@dataclass(frozen=True)
class Limits:
    max_dim: int = 6
    max_scan: int = 10**6

    def __post_init__(self) -> None:
        if self.max_dim < 1 or self.max_scan < 1:
            raise ValueError("limits must be positive")


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True, eq=False)
class Gap:
    """Exact positive quantity of the form rat * sqrt(radicand).

    Used for gap factors and range bounds.  The radical part only ever
    arises from dimension roots under the Euclidean norm; all
    comparisons go through squared values so they stay rational.
    """

    rat: Fraction
    radicand: int = 1

    def __post_init__(self) -> None:
        rat = Fraction(self.rat)
        radicand = self.radicand
        if rat <= 0 or radicand < 1:
            raise ValueError("gap must be positive")
        r = isqrt(radicand)
        if r * r == radicand:
            rat *= r
            radicand = 1
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "radicand", radicand)

    @classmethod
    def of(cls, value: Rat | int | str) -> "Gap":
        return cls(Fraction(value))

    @property
    def value_sq(self) -> Fraction:
        return self.rat * self.rat * self.radicand

    def is_rational(self) -> bool:
        return self.radicand == 1

    def floor(self) -> int:
        num, den = self.rat.numerator, self.rat.denominator
        return isqrt(num * num * self.radicand) // den

    def __mul__(self, other: "Gap | Rat | int") -> "Gap":
        if not isinstance(other, Gap):
            return Gap(self.rat * Fraction(other), self.radicand)
        return Gap(self.rat * other.rat, self.radicand * other.radicand)

    __rmul__ = __mul__

    def __truediv__(self, other: "Gap | Rat | int") -> "Gap":
        if not isinstance(other, Gap):
            return Gap(self.rat / Fraction(other), self.radicand)
        return Gap(
            self.rat / (other.rat * other.radicand),
            self.radicand * other.radicand,
        )

    def _cmp_sq(self, other: "Gap | Rat | int") -> Fraction:
        o = other if isinstance(other, Gap) else Gap(Fraction(other))
        return self.value_sq - o.value_sq

    def __lt__(self, other) -> bool:
        return self._cmp_sq(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp_sq(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp_sq(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp_sq(other) >= 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Gap, Fraction, int)):
            return NotImplemented
        return self._cmp_sq(other) == 0

    def __hash__(self) -> int:
        return hash(("Gap", self.value_sq))

    def times_dim_root(self, n: int, kind: NormKind) -> "Gap":
        """Multiply by n**(1/p) for the exponent p of the norm kind."""
        if kind is NormKind.L1:
            return Gap(self.rat * n, self.radicand)
        if kind is NormKind.L2:
            return Gap(self.rat, self.radicand * n)
        return self

    def over_dim_root(self, n: int, kind: NormKind) -> "Gap":
        """Divide by n**(1/p) for the exponent p of the norm kind."""
        if kind is NormKind.L1:
            return Gap(self.rat / n, self.radicand)
        if kind is NormKind.L2:
            return Gap(self.rat / n, self.radicand * n)
        return self

    def __str__(self) -> str:
        if self.radicand == 1:
            return format_rational(self.rat)
        return f"{format_rational(self.rat)}*sqrt({self.radicand})"

    def to_json(self):
        if self.radicand == 1:
            return format_rational(self.rat)
        return {
            "rational": format_rational(self.rat),
            "sqrt_factor": str(self.radicand),
        }

    @classmethod
    def from_json(cls, obj) -> "Gap":
        if isinstance(obj, str):
            return cls(parse_rational(obj))
        return cls(parse_rational(obj["rational"]), int(obj["sqrt_factor"]))


def gap_satisfied(gap: Gap, achieved: NormValue, reference: NormValue) -> bool:
    """Exact test of achieved <= gap * reference (same norm kind)."""
    if achieved.kind != reference.kind:
        raise TypeError("norm kinds differ")
    if achieved.kind is NormKind.L2:
        return achieved.value <= gap.value_sq * reference.value
    if gap.is_rational():
        return achieved.value <= gap.rat * reference.value
    a, r = achieved.value, reference.value
    return a * a <= gap.value_sq * r * r


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SvpInstance:
    gap: Gap
    matrix: IntMatrix
    norm: NormKind

    def __post_init__(self) -> None:
        if det(self.matrix) == 0:
            raise ValueError("matrix must be nonsingular")

    @property
    def n(self) -> int:
        return self.matrix.n

    def to_json(self) -> dict:
        return {
            "problem": "svp",
            "norm": self.norm.value,
            "alpha": self.gap.to_json(),
            "matrix": self.matrix.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SvpInstance":
        return cls(
            Gap.from_json(obj["alpha"]),
            IntMatrix.from_json(obj["matrix"]),
            NormKind.parse(obj["norm"]),
        )

    def digest(self) -> str:
        return _digest(self.to_json())


@dataclass(frozen=True)
class SapInstance:
    gap: Gap
    x: tuple[Rat, ...]
    norm: NormKind

    def __post_init__(self) -> None:
        if not self.x:
            raise ValueError("dimension must be at least 1")

    @property
    def n(self) -> int:
        return len(self.x)

    def to_json(self) -> dict:
        return {
            "problem": "sap",
            "norm": self.norm.value,
            "alpha": self.gap.to_json(),
            "x": format_rational_vector(self.x),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SapInstance":
        return cls(
            Gap.from_json(obj["alpha"]),
            parse_rational_vector(obj["x"]),
            NormKind.parse(obj["norm"]),
        )

    def digest(self) -> str:
        return _digest(self.to_json())


@dataclass(frozen=True)
class GdaInstance:
    gap: Gap
    bound: Gap
    x: tuple[Rat, ...]
    norm: NormKind

    def __post_init__(self) -> None:
        if not self.x:
            raise ValueError("dimension must be at least 1")
        if self.bound < 1:
            raise ValueError("range bound must be at least 1")

    @property
    def n(self) -> int:
        return len(self.x)

    def to_json(self) -> dict:
        return {
            "problem": "gda",
            "norm": self.norm.value,
            "alpha": self.gap.to_json(),
            "N": self.bound.to_json(),
            "x": format_rational_vector(self.x),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "GdaInstance":
        return cls(
            Gap.from_json(obj["alpha"]),
            Gap.from_json(obj["N"]),
            parse_rational_vector(obj["x"]),
            NormKind.parse(obj["norm"]),
        )

    def digest(self) -> str:
        return _digest(self.to_json())


Instance = SvpInstance | SapInstance | GdaInstance


def instance_from_json(obj: Mapping) -> Instance:
    kind = obj.get("problem")
    if kind == "svp":
        return SvpInstance.from_json(obj)
    if kind == "sap":
        return SapInstance.from_json(obj)
    if kind == "gda":
        return GdaInstance.from_json(obj)
    raise ValueError(f"unknown problem kind {kind!r}")


def _canonical_sign(q: Sequence[int]) -> tuple[int, ...]:
    for v in q:
        if v > 0:
            return tuple(q)
        if v < 0:
            return tuple(-w for w in q)
    return tuple(q)


def svp_minimum(
    inst: SvpInstance, limits: Limits = DEFAULT_LIMITS
) -> tuple[NormValue, tuple[int, ...]]:
    """Exact minimal nonzero lattice norm and its tie-broken minimizer
    (lexicographically smallest with first nonzero coordinate positive)."""
    if inst.n > limits.max_dim:
        raise LimitError(f"dimension {inst.n} exceeds limit {limits.max_dim}")
    cols = inst.matrix.columns()
    upper = min(int_norm_key(c, inst.norm) for c in cols)
    enum = Enumerator(cols)
    key, cands = enum.shortest(inst.norm, upper)
    q0 = min(_canonical_sign(c) for c, _v in cands)
    return norm_value_of_ints(inst.matrix.mul_vec(q0), inst.norm), q0


def brute_svp(
    inst: SvpInstance, limits: Limits = DEFAULT_LIMITS
) -> tuple[int, ...]:
    return svp_minimum(inst, limits)[1]


def _residues(x: Sequence[Rat], d: int) -> list[int]:
    return [int(xi * d) % d for xi in x]


def _coset_of(v: Sequence[int], u: Sequence[int], d: int) -> int:
    """The unique q in [0, d) with q*u = v coordinatewise modulo d."""
    g = d
    cs = [0] * len(u)
    for i, ui in enumerate(u):
        if g == 1:
            break
        g2, s, t = ext_gcd(g, ui) if ui or g else (g, 1, 0)
        for j in range(i):
            cs[j] = cs[j] * s % d
        cs[i] = t % d
        g = g2
    if g != 1:
        raise AssertionError("residue vector is not primitive modulo d")
    q = sum(c * vi for c, vi in zip(cs, v)) % d
    if any((q * ui - vi) % d for ui, vi in zip(u, v)):
        raise AssertionError("vector is not in the residue lattice")
    return q


def _sap_lattice(u: Sequence[int], d: int) -> list[list[int]]:
    n = len(u)
    gens = [list(u)]
    for i in range(n):
        gens.append([d if j == i else 0 for j in range(n)])
    return hnf_from_generators(gens, n)


def _min_residue_vector(u: Sequence[int], d: int) -> list[int]:
    return [minimal_residue(ui, d) for ui in u]


def _scan_residues(
    u: Sequence[int],
    d: int,
    hi: int,
    kind: NormKind,
    on_candidate: Callable[[int, int, Sequence[int]], None],
) -> None:
    """Visit q = 1..hi with the integer norm key of d*{q x} (hi <= d)."""
    n = len(u)
    r = [0] * n
    for q in range(1, hi + 1):
        mr = [0] * n
        for i in range(n):
            ri = r[i] + u[i]
            if ri >= d:
                ri -= d
            r[i] = ri
            mr[i] = ri - d if 2 * ri > d else ri
        on_candidate(q, int_norm_key(mr, kind), mr)


def sap_minimum(
    inst: SapInstance, limits: Limits = DEFAULT_LIMITS
) -> tuple[NormValue, int]:
    """Exact minimal nonzero residual norm and the smallest q in
    [1, d-1] achieving it."""
    d = lcd(inst.x)
    if d == 1:
        raise ValueError("x is integral: every residual is zero")
    u = _residues(inst.x, d)
    kind = inst.norm
    if d - 1 <= limits.max_scan:
        best: list = [None, None]

        def visit(q: int, key: int, _mr) -> None:
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, q

        _scan_residues(u, d, d - 1, kind, visit)
        return norm_value_of_ints_scaled(best[0], kind, d), best[1]
    if inst.n > limits.max_dim:
        raise LimitError(
            f"lcd {d} exceeds scan limit and dimension {inst.n} exceeds "
            f"limit {limits.max_dim}"
        )
    basis = _sap_lattice(u, d)
    seed = _min_residue_vector(u, d)
    enum = Enumerator(basis)
    key, cands = enum.shortest(
        kind,
        int_norm_key(seed, kind),
        admissible=lambda v: any(vi % d for vi in v),
    )
    qs: set[int] = set()
    for _c, v in cands:
        q = _coset_of(v, u, d)
        qs.add(q)
        qs.add(d - q)
    return norm_value_of_ints_scaled(key, kind, d), min(qs)


def norm_value_of_ints_scaled(key: int, kind: NormKind, scale: int) -> NormValue:
    if kind is NormKind.L2:
        return NormValue(kind, Fraction(key, scale * scale))
    return NormValue(kind, Fraction(key, scale))


def brute_sap(inst: SapInstance, limits: Limits = DEFAULT_LIMITS) -> int:
    return sap_minimum(inst, limits)[1]


def _gda_argmin_upto(
    x: Sequence[Rat], kind: NormKind, hi: int, limits: Limits
) -> tuple[NormValue, int]:
    """Exact minimizer of ||{q x}|| over q in [1, hi], smallest q."""
    if hi < 1:
        raise ValueError("range floor must be at least 1")
    d = lcd(x)
    if d == 1:
        return NormValue(kind, Fraction(0)), 1
    if hi >= d:
        return NormValue(kind, Fraction(0)), d
    u = _residues(x, d)
    if hi <= limits.max_scan:
        best: list = [None, None]

        def visit(q: int, key: int, _mr) -> None:
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, q

        _scan_residues(u, d, hi, kind, visit)
        return norm_value_of_ints_scaled(best[0], kind, d), best[1]
    if len(x) > limits.max_dim:
        raise LimitError(
            f"range {hi} exceeds scan limit and dimension {len(x)} exceeds "
            f"limit {limits.max_dim}"
        )
    basis = _sap_lattice(u, d)
    seed = _min_residue_vector(u, d)

    def rep_in_range(v: Sequence[int]) -> bool:
        if not any(vi % d for vi in v):
            return False
        q = _coset_of(v, u, d)
        return min(q, d - q) <= hi

    enum = Enumerator(basis)
    key, cands = enum.shortest(kind, int_norm_key(seed, kind), rep_in_range)
    qs: set[int] = set()
    for _c, v in cands:
        q = _coset_of(v, u, d)
        for cand in (q, d - q):
            if 1 <= cand <= hi:
                qs.add(cand)
    return norm_value_of_ints_scaled(key, kind, d), min(qs)


def _gda_search_floor(inst: GdaInstance) -> int:
    """Output range floor honored by the oracle: floor(N) for gaps >= 1
    (valid since [N] is inside [gap*N]), floor(gap*N) for gaps below 1
    (the contract range itself)."""
    if inst.gap >= 1:
        return inst.bound.floor()
    return (inst.gap * inst.bound).floor()


def gda_minimum(
    inst: GdaInstance, limits: Limits = DEFAULT_LIMITS
) -> tuple[NormValue, int]:
    """Exact minimum of ||{q x}|| over q in [floor(N)] and its smallest
    achiever; this is the reference minimum of the output contract."""
    hi = inst.bound.floor()
    if hi < 1:
        raise ValueError("bound floor must be at least 1")
    return _gda_argmin_upto(inst.x, inst.norm, hi, limits)


def brute_gda(inst: GdaInstance, limits: Limits = DEFAULT_LIMITS) -> int:
    hi = _gda_search_floor(inst)
    if hi < 1:
        raise ValueError("search range is empty")
    return _gda_argmin_upto(inst.x, inst.norm, hi, limits)[1]


def verify_svp(
    inst: SvpInstance, q0: Sequence[int], limits: Limits = DEFAULT_LIMITS
) -> bool:
    if len(q0) != inst.n:
        return False
    v = inst.matrix.mul_vec([int(q) for q in q0])
    achieved = norm(v, inst.norm)
    if achieved.is_zero():
        return False
    reference, _ = svp_minimum(inst, limits)
    return gap_satisfied(inst.gap, achieved, reference)


def verify_sap(
    inst: SapInstance, q0: int, limits: Limits = DEFAULT_LIMITS
) -> bool:
    residual = frac_vector(q0 * xi for xi in inst.x)
    achieved = norm(residual, inst.norm)
    if achieved.is_zero():
        return False
    reference, _ = sap_minimum(inst, limits)
    return gap_satisfied(inst.gap, achieved, reference)


def verify_gda(
    inst: GdaInstance, q0: int, limits: Limits = DEFAULT_LIMITS
) -> bool:
    if q0 < 1 or q0 > (inst.gap * inst.bound).floor():
        return False
    residual = frac_vector(q0 * xi for xi in inst.x)
    achieved = norm(residual, inst.norm)
    reference, _ = gda_minimum(inst, limits)
    return gap_satisfied(inst.gap, achieved, reference)


@dataclass(frozen=True)
class GapReport:
    """Exact account of how an output compares against the gap contract."""

    kind: NormKind
    achieved: NormValue
    reference: NormValue
    gap: Gap
    passed: bool

    def render(self) -> str:
        squared = self.kind is NormKind.L2
        label = "squared norm" if squared else "norm"
        lines = [
            f"norm kind: {self.kind.value}",
            f"achieved {label}: {format_rational(self.achieved.value)}",
            f"reference minimum {label}: {format_rational(self.reference.value)}",
            f"gap: {self.gap}",
        ]
        if squared or not self.gap.is_rational():
            lhs = (
                self.achieved.value
                if squared
                else self.achieved.value * self.achieved.value
            )
            rhs = (
                self.gap.value_sq * self.reference.value
                if squared
                else self.gap.value_sq * self.reference.value * self.reference.value
            )
            lines.append(
                f"squared comparison: {format_rational(lhs)} "
                f"{'<=' if self.passed else '>'} {format_rational(rhs)}"
            )
        else:
            lines.append(
                f"comparison: {format_rational(self.achieved.value)} "
                f"{'<=' if self.passed else '>'} "
                f"{format_rational(self.gap.rat * self.reference.value)}"
            )
        return "\n".join(lines)


def gap_report(
    inst: Instance, output, limits: Limits = DEFAULT_LIMITS
) -> GapReport:
    if isinstance(inst, SvpInstance):
        v = inst.matrix.mul_vec([int(q) for q in output])
        achieved = norm(v, inst.norm)
        reference, _ = svp_minimum(inst, limits)
    elif isinstance(inst, SapInstance):
        achieved = norm(frac_vector(output * xi for xi in inst.x), inst.norm)
        reference, _ = sap_minimum(inst, limits)
    else:
        achieved = norm(frac_vector(output * xi for xi in inst.x), inst.norm)
        reference, _ = gda_minimum(inst, limits)
    return GapReport(
        inst.norm,
        achieved,
        reference,
        inst.gap,
        gap_satisfied(inst.gap, achieved, reference),
    )


def gen_svp(
    n: int,
    max_entry: int,
    seed: int,
    alpha: Gap | Rat | int = 1,
    kind: NormKind = NormKind.LINF,
) -> SvpInstance:
    """Deterministic nonsingular instance for the given seed."""
    if n < 1 or max_entry < 1:
        raise ValueError("n and max_entry must be positive")
    rng = random.Random(seed)
    gap = alpha if isinstance(alpha, Gap) else Gap(Fraction(alpha))
    while True:
        m = IntMatrix.from_rows(
            [[rng.randint(-max_entry, max_entry) for _ in range(n)] for _ in range(n)]
        )
        if det(m) != 0:
            return SvpInstance(gap, m, kind)


def _gen_x(rng: random.Random, n: int, max_lcd: int) -> tuple[Rat, ...]:
    d = rng.randint(2, max_lcd) if max_lcd >= 2 else 2
    while True:
        x = tuple(Fraction(rng.randrange(d), d) for _ in range(n))
        if lcd(x) >= 2:
            return x


def gen_sap(
    n: int,
    max_lcd: int,
    seed: int,
    alpha: Gap | Rat | int = 1,
    kind: NormKind = NormKind.LINF,
) -> SapInstance:
    if n < 1 or max_lcd < 2:
        raise ValueError("n must be positive and max_lcd at least 2")
    rng = random.Random(seed)
    gap = alpha if isinstance(alpha, Gap) else Gap(Fraction(alpha))
    return SapInstance(gap, _gen_x(rng, n, max_lcd), kind)


def gen_gda(
    n: int,
    max_lcd: int,
    seed: int,
    alpha: Gap | Rat | int = 1,
    kind: NormKind = NormKind.LINF,
    bound: Gap | Rat | int | None = None,
) -> GdaInstance:
    if n < 1 or max_lcd < 2:
        raise ValueError("n must be positive and max_lcd at least 2")
    rng = random.Random(seed)
    gap = alpha if isinstance(alpha, Gap) else Gap(Fraction(alpha))
    x = _gen_x(rng, n, max_lcd)
    if bound is None:
        bound_gap = Gap(Fraction(rng.randint(1, max(1, lcd(x) - 1))))
    elif isinstance(bound, Gap):
        bound_gap = bound
    else:
        bound_gap = Gap(Fraction(bound))
    return GdaInstance(gap, bound_gap, x, kind)


def gen_instance(
    problem: str,
    n: int,
    size: int,
    seed: int,
    alpha: Gap | Rat | int = 1,
    kind: NormKind = NormKind.LINF,
    bound: Gap | Rat | int | None = None,
) -> Instance:
    """Seeded instance generator; ``size`` is the entry bound for the
    short-vector problem and the denominator bound otherwise."""
    if problem == "svp":
        return gen_svp(n, size, seed, alpha, kind)
    if problem == "sap":
        return gen_sap(n, size, seed, alpha, kind)
    if problem == "gda":
        return gen_gda(n, size, seed, alpha, kind, bound)
    raise ValueError(f"unknown problem kind {problem!r}")


class Oracle(ABC):
    """Solver contract used by the reductions: one callable per problem."""

    @abstractmethod
    def svp(self, inst: SvpInstance) -> tuple[int, ...]: ...

    @abstractmethod
    def sap(self, inst: SapInstance) -> int: ...

    @abstractmethod
    def gda(self, inst: GdaInstance) -> int: ...


class BruteOracle(Oracle):
    """Exact minimizers with the documented tie-breaks."""

    def __init__(self, limits: Limits = DEFAULT_LIMITS) -> None:
        self.limits = limits

    def svp(self, inst: SvpInstance) -> tuple[int, ...]:
        return brute_svp(inst, self.limits)

    def sap(self, inst: SapInstance) -> int:
        return brute_sap(inst, self.limits)

    def gda(self, inst: GdaInstance) -> int:
        return brute_gda(inst, self.limits)


def _l2_ball_budget(kind: NormKind, gap: Gap, reference: NormValue, n: int) -> Fraction:
    """Squared-Euclidean budget covering all integer vectors whose
    kind-norm is within gap * reference."""
    if kind is NormKind.L2:
        return gap.value_sq * reference.value
    bound_sq = gap.value_sq * reference.value * reference.value
    if kind is NormKind.L1:
        return bound_sq
    return n * bound_sq


class WorstAdmissibleOracle(Oracle):
    """Returns a gap-saturating admissible answer instead of a minimizer:
    the largest admissible norm, ties broken toward the largest output.
    If a sub-1 gap makes saturation impossible, falls back to the exact
    minimizer."""

    def __init__(self, limits: Limits = DEFAULT_LIMITS) -> None:
        self.limits = limits

    def svp(self, inst: SvpInstance) -> tuple[int, ...]:
        reference, _ = svp_minimum(inst, self.limits)
        enum = Enumerator(inst.matrix.columns())
        budget = _l2_ball_budget(inst.norm, inst.gap, reference, inst.n)
        best: tuple[int, tuple[int, ...]] | None = None
        for coeffs, v in enum.within(inst.norm, budget):
            nv = norm_value_of_ints(v, inst.norm)
            if nv.is_zero() or not gap_satisfied(inst.gap, nv, reference):
                continue
            q = _canonical_sign(coeffs)
            key = int_norm_key(v, inst.norm)
            if best is None or (key, q) > best:
                best = (key, q)
        if best is None:
            return brute_svp(inst, self.limits)
        return best[1]

    def sap(self, inst: SapInstance) -> int:
        d = lcd(inst.x)
        if d == 1:
            raise ValueError("x is integral: every residual is zero")
        reference, _ = sap_minimum(inst, self.limits)
        u = _residues(inst.x, d)
        kind = inst.norm
        if d - 1 <= self.limits.max_scan:
            best: list = [None]

            def visit(q: int, key: int, _mr) -> None:
                if key == 0:
                    return
                nv = norm_value_of_ints_scaled(key, kind, d)
                if not gap_satisfied(inst.gap, nv, reference):
                    return
                if best[0] is None or (key, q) > best[0]:
                    best[0] = (key, q)

            _scan_residues(u, d, d - 1, kind, visit)
            if best[0] is None:
                return brute_sap(inst, self.limits)
            return best[0][1]
        basis = _sap_lattice(u, d)
        enum = Enumerator(basis)
        budget = _l2_ball_budget(kind, inst.gap, reference, inst.n) * d * d
        best_pair: tuple[int, int] | None = None
        for _c, v in enum.within(kind, budget):
            if not any(vi % d for vi in v):
                continue
            key = int_norm_key(v, kind)
            nv = norm_value_of_ints_scaled(key, kind, d)
            if not gap_satisfied(inst.gap, nv, reference):
                continue
            q = _coset_of(v, u, d)
            for cand in (q, d - q):
                if best_pair is None or (key, cand) > best_pair:
                    best_pair = (key, cand)
        if best_pair is None:
            return brute_sap(inst, self.limits)
        return best_pair[1]

    def gda(self, inst: GdaInstance) -> int:
        out_hi = (inst.gap * inst.bound).floor()
        if out_hi < 1:
            raise ValueError("output range is empty")
        reference, _ = gda_minimum(inst, self.limits)
        d = lcd(inst.x)
        if d == 1 or reference.is_zero():
            if d == 1 or out_hi >= d:
                step = 1 if d == 1 else d
                return step * (out_hi // step)
            return brute_gda(inst, self.limits)
        u = _residues(inst.x, d)
        kind = inst.norm

        def extend(q: int) -> int | None:
            if q < 1 or q > out_hi:
                return None
            return q + d * ((out_hi - q) // d)

        if min(out_hi, d - 1) <= self.limits.max_scan:
            best: list = [None]

            def visit(q: int, key: int, _mr) -> None:
                nv = norm_value_of_ints_scaled(key, kind, d)
                if not gap_satisfied(inst.gap, nv, reference):
                    return
                q_big = extend(q)
                if q_big is None:
                    return
                if best[0] is None or (key, q_big) > best[0]:
                    best[0] = (key, q_big)

            _scan_residues(u, d, min(out_hi, d - 1), kind, visit)
            if best[0] is None:
                return brute_gda(inst, self.limits)
            return best[0][1]
        if inst.n > self.limits.max_dim:
            raise LimitError(
                f"range {out_hi} exceeds scan limit and dimension {inst.n} "
                f"exceeds limit {self.limits.max_dim}"
            )
        basis = _sap_lattice(u, d)
        enum = Enumerator(basis)
        budget = _l2_ball_budget(kind, inst.gap, reference, inst.n) * d * d
        best_pair: tuple[int, int] | None = None
        for _c, v in enum.within(kind, budget):
            if not any(vi % d for vi in v):
                continue
            key = int_norm_key(v, kind)
            nv = norm_value_of_ints_scaled(key, kind, d)
            if not gap_satisfied(inst.gap, nv, reference):
                continue
            q = _coset_of(v, u, d)
            for base in (q, d - q):
                q_big = extend(base)
                if q_big is not None and (
                    best_pair is None or (key, q_big) > best_pair
                ):
                    best_pair = (key, q_big)
        if best_pair is None:
            return brute_gda(inst, self.limits)
        return best_pair[1]


@dataclass(frozen=True)
class TraceEntry:
    """One oracle call: which oracle, on what instance, and its answer."""

    oracle: str
    instance_digest: str
    response: int | tuple[int, ...]

    def to_json(self) -> dict:
        resp = (
            [str(v) for v in self.response]
            if isinstance(self.response, tuple)
            else str(self.response)
        )
        return {
            "oracle": self.oracle,
            "instance_digest": self.instance_digest,
            "response": resp,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TraceEntry":
        resp = obj["response"]
        response = (
            tuple(int(v) for v in resp) if isinstance(resp, list) else int(resp)
        )
        return cls(obj["oracle"], obj["instance_digest"], response)


class ReplayOracle(Oracle):
    """Replays a recorded trace, checking call order and instances."""

    def __init__(self, entries: Sequence[TraceEntry]) -> None:
        self._entries = list(entries)
        self._pos = 0

    def _next(self, name: str, digest: str):
        if self._pos >= len(self._entries):
            raise ValueError("trace exhausted: unexpected oracle call")
        entry = self._entries[self._pos]
        self._pos += 1
        if entry.oracle != name or entry.instance_digest != digest:
            raise ValueError(
                f"trace mismatch: recorded {entry.oracle}/{entry.instance_digest}, "
                f"replayed {name}/{digest}"
            )
        return entry.response

    def svp(self, inst: SvpInstance) -> tuple[int, ...]:
        resp = self._next("svp", inst.digest())
        if not isinstance(resp, tuple):
            raise ValueError("recorded response is not a vector")
        return resp

    def sap(self, inst: SapInstance) -> int:
        resp = self._next("sap", inst.digest())
        return int(resp)

    def gda(self, inst: GdaInstance) -> int:
        resp = self._next("gda", inst.digest())
        return int(resp)

    def exhausted(self) -> bool:
        return self._pos == len(self._entries)
