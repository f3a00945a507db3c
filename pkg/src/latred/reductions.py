"""Reductions among the three problems, with replayable certificates.

Six routes are provided:

* ranged approximation -> plain approximation (iterated denominator
  descent; the oracle is called with gap scaled by 50/153, the exact
  rational form of the constant 3.06);
* plain approximation -> short vector (a unimodular completion of the
  scaled input vector, gap-preserving);
* short vector -> plain approximation (gap-preserving) or ranged
  approximation (gap scaled by the dimension root n**(1/p));
* the two compositions of the above.

Every reduction can record a ``Certificate`` carrying its oracle trace
and intermediate values; re-running against the recorded trace
reproduces the output bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactlinalg import (
    IntMatrix,
    NormKind,
    PivotNormalization,
    adjugate,
    adjugate_entry,
    det,
    norm,
    normalize_pivot,
    op_norm_bound,
    solve_rational,
)
from .exactnum import (
    Rat,
    ceil_log,
    ext_gcd,
    format_int,
    format_rational,
    format_rational_vector,
    frac_vector,
    lcd,
    least_prime_not_dividing,
    minimal_residue,
)
from .polyalg import IntPoly, LinPolyMatrix, adj_entry, det_coeff_matrix
from .problems import (
    DEFAULT_LIMITS,
    Gap,
    GdaInstance,
    Limits,
    Oracle,
    SapInstance,
    SvpInstance,
    TraceEntry,
    sap_minimum,
)

GDA_TO_SAP_INFLATION = Fraction(153, 50)  # the constant 3.06, exactly


class PreconditionError(ValueError):
    """A reduction was invoked outside its stated preconditions."""


class InvariantError(RuntimeError):
    """A structural invariant that must hold on every run was violated."""


@dataclass
class Certificate:
    """Replayable record of one reduction run."""

    reduction: str = ""
    instance: dict | None = None
    output: object = None
    trace: list[TraceEntry] = field(default_factory=list)
    intermediates: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = (
            [str(v) for v in self.output]
            if isinstance(self.output, tuple)
            else str(self.output)
        )
        return {
            "reduction": self.reduction,
            "instance": self.instance,
            "output": out,
            "oracle_trace": [t.to_json() for t in self.trace],
            "intermediates": self.intermediates,
            "notes": list(self.notes),
        }

    @classmethod
    def trace_from_json(cls, obj: dict) -> list[TraceEntry]:
        return [TraceEntry.from_json(t) for t in obj["oracle_trace"]]


class _Recorder:
    """Oracle wrapper appending every call to a certificate trace."""

    def __init__(self, oracle: Oracle, cert: Certificate | None) -> None:
        self._oracle = oracle
        self._cert = cert

    def _log(self, name: str, digest: str, response) -> None:
        if self._cert is not None:
            self._cert.trace.append(TraceEntry(name, digest, response))

    def svp(self, inst: SvpInstance) -> tuple[int, ...]:
        resp = tuple(int(v) for v in self._oracle.svp(inst))
        self._log("svp", inst.digest(), resp)
        return resp

    def sap(self, inst: SapInstance) -> int:
        resp = int(self._oracle.sap(inst))
        self._log("sap", inst.digest(), resp)
        return resp

    def gda(self, inst: GdaInstance) -> int:
        resp = int(self._oracle.gda(inst))
        self._log("gda", inst.digest(), resp)
        return resp


def _start(cert: Certificate | None, name: str, inst) -> None:
    if cert is not None:
        cert.reduction = name
        cert.instance = inst.to_json()


def _finish(cert: Certificate | None, output) -> None:
    if cert is not None:
        cert.output = output


def iteration_bound(d0: int, gap: Gap, bound: Gap) -> int:
    """ceil(log2(d0 / (gap * N))), the oracle-call bound of the
    denominator-descent reduction; 0 when d0 <= gap * N."""
    ratio_sq = Fraction(d0 * d0) / (gap * bound).value_sq
    return (ceil_log(4, ratio_sq) + 0) if ratio_sq > 1 else 0


def gda_to_sap(
    inst: GdaInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> int:
    """Solve a ranged approximation problem with repeated calls to a
    plain approximation oracle at gap scaled by 50/153."""
    _start(cert, "gda-to-sap", inst)
    rec = _Recorder(oracle, cert)
    x = tuple(inst.x)
    d = lcd(x)
    d0 = d
    call_gap = inst.gap / GDA_TO_SAP_INFLATION
    limit = iteration_bound(d0, inst.gap, inst.bound)
    steps = []
    iterations = 0
    while Gap.of(d) > inst.gap * inst.bound:
        response = rec.sap(SapInstance(call_gap, x, inst.norm))
        d_next = abs(minimal_residue(response, d))
        if d_next == 0:
            raise InvariantError(
                "oracle returned a multiple of the current denominator"
            )
        if 2 * d_next > d:
            raise InvariantError("denominator failed to halve")
        scaled = [d_next * xi for xi in x]
        x = tuple(xi - r / d_next for xi, r in zip(x, frac_vector(scaled)))
        if any((d_next * xi).denominator != 1 for xi in x):
            raise InvariantError("descent left a non-integral scaled vector")
        d = d_next
        iterations += 1
        if iterations > limit:
            raise InvariantError("oracle-call bound exceeded")
        steps.append({"d": format_int(d), "x": format_rational_vector(x)})
    if cert is not None:
        cert.intermediates.update(
            {
                "initial_lcd": format_int(d0),
                "steps": steps,
                "call_bound": format_int(limit),
                "calls": format_int(iterations),
            }
        )
    _finish(cert, d)
    return d


def find_coprime_shift(dx: Sequence[int], d: int) -> int:
    """Integer a with gcd(dx_1, ..., dx_{n-1}, dx_n + d*a) = 1.

    Starts from the gcd of the leading entries and strips the prime
    factors shared with the last entry until nothing changes; returns 0
    when the full vector is already primitive.  Requires gcd(dx) coprime
    to d and some nonzero entry among dx_1..dx_{n-1}.
    """
    if len(dx) < 2:
        raise PreconditionError("need at least two coordinates")
    full = math.gcd(*dx)
    if math.gcd(full, d) != 1:
        raise PreconditionError("vector gcd must be coprime to the denominator")
    if full == 1:
        return 0
    head = math.gcd(*dx[:-1])
    if head == 0:
        raise PreconditionError("leading entries are all zero")
    a = head
    while True:
        g = math.gcd(a, dx[-1])
        if g == 1:
            break
        a //= g
    if math.gcd(head, dx[-1] + d * a) != 1:
        raise InvariantError("shift failed to make the vector primitive")
    return a


def complete_to_unimodular(w: Sequence[int]) -> IntMatrix:
    """Matrix of determinant exactly 1 whose first column is w
    (w must be primitive: gcd of its entries equal to 1)."""
    w = [int(v) for v in w]
    n = len(w)
    if n == 0 or math.gcd(*w) != 1:
        raise PreconditionError("vector must be primitive")
    if n == 1:
        return IntMatrix.from_rows([[w[0]]])
    first = next(i for i, v in enumerate(w) if v != 0)
    perm = list(range(n))
    perm[0], perm[first] = perm[first], perm[0]
    v = [w[p] for p in perm]
    cols: list[list[int]] = [v]
    g = abs(v[0])
    for i in range(1, n):
        g_next, s, t = ext_gcd(g, v[i])
        b2, b1 = s, -t
        col = [b1 * v[k] // g for k in range(i)]
        col.append(b2)
        col.extend([0] * (n - i - 1))
        cols.append(col)
        g = g_next
    rows = [[cols[j][i] for j in range(n)] for i in range(n)]
    # undo the row permutation; compensate a sign flip away from column 1
    rows = [rows[perm.index(i)] for i in range(n)]
    m = IntMatrix.from_rows(rows)
    d = det(m)
    if d == -1:
        rows = [
            [-v if j == 1 else v for j, v in enumerate(row)] for row in m.rows
        ]
        m = IntMatrix.from_rows(rows)
        d = det(m)
    if d != 1:
        raise InvariantError("completion does not have determinant 1")
    return m


def _build_sap_lattice_matrix(
    inst: SapInstance, cert: Certificate | None
) -> tuple[IntMatrix, int]:
    """The scaled lattice basis whose short vectors answer the
    approximation instance; returns (matrix, lcd)."""
    x = list(inst.x)
    d = lcd(x)
    if d == 1:
        raise PreconditionError("x is integral: no valid output exists")
    n = len(x)
    dx = [int(xi * d) for xi in x]
    swapped = False
    if n >= 2 and all(v == 0 for v in dx[:-1]):
        # shifting the last coordinate cannot work when it carries the
        # only nonzero entry; moving it to the front changes nothing in
        # the problem (coordinate permutations are isometries)
        dx[0], dx[-1] = dx[-1], dx[0]
        x[0], x[-1] = x[-1], x[0]
        swapped = True
    a = find_coprime_shift(dx, d)
    w = list(dx)
    w[-1] += d * a
    if math.gcd(*w) != 1:
        raise InvariantError("shifted vector is not primitive")
    unimodular = complete_to_unimodular(w)
    if cert is not None:
        cert.intermediates.update(
            {
                "lcd": format_int(d),
                "shift": format_int(a),
                "swapped_to_front": swapped,
                "unimodular": unimodular.to_json(),
            }
        )
    scaled = IntMatrix.from_rows(
        [
            [v * d if j > 0 else v for j, v in enumerate(row)]
            for row in unimodular.rows
        ]
    )
    if abs(det(scaled)) != d ** (n - 1):
        raise InvariantError("scaled basis has the wrong determinant")
    if cert is not None:
        cert.intermediates["scaled"] = scaled.to_json()
    return scaled, d


def sap_to_svp(
    inst: SapInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> int:
    """Solve a plain approximation problem with one gap-preserving call
    to a short-vector oracle.

    A 1-dimensional instance is answered directly by the exact solver
    (the construction needs n >= 2).  If the oracle's answer lands in
    the scaled integer sublattice - possible only when the minimal
    residual norm is at least 1/gap - the residual would be zero, and
    the instance is answered by the exact solver as well; both events
    are recorded in the certificate.
    """
    _start(cert, "sap-to-svp", inst)
    rec = _Recorder(oracle, cert)
    if inst.n == 1:
        _value, q0 = sap_minimum(inst, limits)
        if cert is not None:
            cert.notes.append("dimension 1: answered by the exact solver")
        _finish(cert, q0)
        return q0
    scaled, d = _build_sap_lattice_matrix(inst, cert)
    response = rec.svp(SvpInstance(inst.gap, scaled, inst.norm))
    q0 = int(response[0])
    if q0 % d == 0:
        _value, q0 = sap_minimum(inst, limits)
        if cert is not None:
            cert.notes.append(
                "oracle answer lay in the scaled sublattice (zero residual); "
                "answered by the exact solver"
            )
    _finish(cert, q0)
    return q0


@dataclass(frozen=True)
class SubstitutionPlan:
    """Everything produced by the matrix-rebuilding pipeline shared by
    the short-vector reductions."""

    pivot: PivotNormalization
    prime: int
    j_exponents: tuple[int, ...]
    c_raw: int
    c: int
    exponent: int
    substitution: int
    matrix: IntMatrix
    determinant: int
    adj_n1: int
    adj_n2: int
    b1: int
    b2: int
    x: tuple[Rat, ...]


def _minimal_bezout(e1: int, e2: int) -> tuple[int, int]:
    """Integers (b1, b2) with b1*e1 + b2*e2 = 1 and |b1| minimal
    (ties resolve to the positive residue)."""
    g, s, _t = ext_gcd(e1, e2) if e2 else (abs(e1), 1 if e1 > 0 else -1, 0)
    if g != 1:
        raise InvariantError("adjugate entries are not coprime")
    if e2 == 0:
        return s, 0
    b1 = minimal_residue(s, abs(e2))
    rem = 1 - b1 * e1
    if rem % e2:
        raise InvariantError("failed to rebalance the identity")
    return b1, rem // e2


def relaxed_substitution_exponent(
    alpha: Gap,
    alpha_prime: Gap,
    ma: IntMatrix,
    det_m: int,
    c: int,
    kind: NormKind,
) -> int:
    """Smallest exponent j >= 1 with |c|**j at least
    (alpha + alpha') * ||MA||_op / ((alpha - alpha') * |det M|),
    the substitution size sufficient when the oracle runs at the reduced
    gap alpha' < alpha.  Works under any of the three norm kinds; the
    Euclidean operator norm is upper-bounded by the Frobenius value.
    """
    if not (alpha.is_rational() and alpha_prime.is_rational()):
        raise PreconditionError("relaxed mode expects rational gaps")
    if alpha_prime < 1 or not alpha_prime < alpha:
        raise PreconditionError("need 1 <= alpha' < alpha")
    if abs(c) < 2:
        raise PreconditionError("substitution base must exceed 1")
    a, ap = alpha.rat, alpha_prime.rat
    opn = op_norm_bound(ma, kind)
    if kind is NormKind.L2:
        # opn is the squared Frobenius value; compare squares
        target = (a + ap) ** 2 * opn / ((a - ap) ** 2 * det_m * det_m)
        return max(1, ceil_log(c * c, target))
    target = (a + ap) * opn / ((a - ap) * abs(det_m))
    return max(1, ceil_log(c, target))


def _substitution_plan(
    inst: SvpInstance,
    alpha_prime: Gap | None,
    cert: Certificate | None,
) -> SubstitutionPlan:
    if inst.n < 2:
        raise PreconditionError("need dimension at least 2")
    if not inst.gap.is_rational() or inst.gap < 1:
        raise PreconditionError("gap must be a rational number at least 1")
    n = inst.n
    pivot = normalize_pivot(inst.matrix)
    mn = pivot.matrix
    pivot_entry = mn.rows[n - 1][0]
    d0 = det(mn)
    p = least_prime_not_dividing(pivot_entry * d0)
    poly = LinPolyMatrix(
        adjugate(mn),
        IntMatrix.from_rows(
            [[p if i == j else 0 for j in range(n)] for i in range(n)]
        ),
    )
    j_exponents: list[int] = []
    c_raw: int | None = None
    for i in range(2, n + 1):
        poly = poly.add_constant(i - 1, 0, p)
        chosen = None
        for j in range(1, 2 * i - 1):
            trial = poly.add_constant(i - 1, i - 2, p**j)
            sub = LinPolyMatrix(
                IntMatrix.from_rows([r[: i] for r in trial.linear.rows[:i]]),
                IntMatrix.from_rows([r[: i] for r in trial.constant.rows[:i]]),
            )
            f1 = adj_entry(sub, i, 1)
            f2 = adj_entry(sub, i, 2)
            if max(f1.degree, f2.degree) < 1:
                continue
            value = det_coeff_matrix(f1, f2)
            if value != 0:
                chosen = j
                poly = trial
                if i == n:
                    c_raw = value
                break
        if chosen is None:
            raise InvariantError(
                f"no exponent up to {2 * i - 2} makes the adjugate entries coprime"
            )
        j_exponents.append(chosen)
    assert c_raw is not None
    c = c_raw
    while c % p == 0:
        c //= p
    if abs(c) == 1:
        c = p + 1
    bound = inst.gap.rat.numerator ** 2 * (2 * pivot_entry * n) ** (3 * n)
    if alpha_prime is None:
        exponent = ceil_log(c, bound)
    else:
        ma = mn.mul_mat(poly.constant)
        exponent = relaxed_substitution_exponent(
            inst.gap, alpha_prime, ma, d0, c, inst.norm
        )
    if exponent < 1:
        raise InvariantError("substitution exponent must be positive")
    substitution = c**exponent
    matrix = poly.evaluate(substitution)
    determinant = det(matrix)
    if determinant == 0:
        raise InvariantError("substituted matrix is singular")
    e1 = adjugate_entry(matrix, n, 1)
    e2 = adjugate_entry(matrix, n, 2)
    if math.gcd(e1, e2) != 1:
        raise InvariantError("adjugate entries at (n,1), (n,2) are not coprime")
    b1, b2 = _minimal_bezout(e1, e2)
    bvec = [Fraction(b1), Fraction(b2)] + [Fraction(0)] * (n - 2)
    x = solve_rational(matrix, bvec)
    if x[n - 1] * determinant != 1:
        raise InvariantError("last coordinate of x is not 1/det")
    plan = SubstitutionPlan(
        pivot=pivot,
        prime=p,
        j_exponents=tuple(j_exponents),
        c_raw=c_raw,
        c=c,
        exponent=exponent,
        substitution=substitution,
        matrix=matrix,
        determinant=determinant,
        adj_n1=e1,
        adj_n2=e2,
        b1=b1,
        b2=b2,
        x=x,
    )
    if cert is not None:
        cert.intermediates.update(
            {
                "pivot_row_perm": list(pivot.row_perm),
                "pivot_row_signs": list(pivot.row_signs),
                "pivot_col_perm": list(pivot.col_perm),
                "prime": format_int(p),
                "j_exponents": [format_int(j) for j in j_exponents],
                "c_raw": format_int(c_raw),
                "c": format_int(c),
                "exponent": format_int(exponent),
                "substitution": format_int(substitution),
                "matrix_value": matrix.to_json(),
                "det_value": format_int(determinant),
                "adj_n1": format_int(e1),
                "adj_n2": format_int(e2),
                "b1": format_int(b1),
                "b2": format_int(b2),
                "x": format_rational_vector(x),
            }
        )
        if alpha_prime is not None:
            cert.intermediates["relaxed_alpha_prime"] = str(alpha_prime)
    return plan


def _finish_svp(
    inst: SvpInstance,
    plan: SubstitutionPlan,
    q0: int,
    cert: Certificate | None,
) -> tuple[int, ...]:
    residual = frac_vector(q0 * xi for xi in plan.x)
    w = plan.matrix.mul_vec(residual)
    out = []
    for v in w:
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise InvariantError("output vector is not integral")
            out.append(v.numerator)
        else:
            out.append(int(v))
    if not any(out):
        raise InvariantError("output vector is zero")
    mapped = plan.pivot.map_solution(out)
    _finish(cert, mapped)
    return mapped


def svp_to_sap(
    inst: SvpInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
    alpha_prime: Gap | None = None,
) -> tuple[int, ...]:
    """Solve a short-vector problem with one call to a plain
    approximation oracle (gap-preserving; with ``alpha_prime`` set, the
    oracle runs at the smaller gap and the substitution exponent comes
    from the relaxed formula)."""
    _start(cert, "svp-to-sap", inst)
    rec = _Recorder(oracle, cert)
    plan = _substitution_plan(inst, alpha_prime, cert)
    call_gap = alpha_prime if alpha_prime is not None else inst.gap
    q0 = rec.sap(SapInstance(call_gap, plan.x, inst.norm))
    if q0 % abs(plan.determinant) == 0:
        raise InvariantError("oracle response has a zero residual")
    return _finish_svp(inst, plan, q0, cert)


def svp_to_gda(
    inst: SvpInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
) -> tuple[int, ...]:
    """Solve a short-vector problem with one call to a ranged
    approximation oracle at gap scaled down by n**(1/p) and range
    N = n**(1/p) * |det| / (2 * gap)."""
    _start(cert, "svp-to-gda", inst)
    rec = _Recorder(oracle, cert)
    plan = _substitution_plan(inst, None, cert)
    n = inst.n
    x_call = plan.x
    flipped = False
    if plan.determinant < 0:
        # the range argument needs the distinguished coordinate to be
        # +1/denominator; negating x changes no residual norm
        x_call = tuple(-xi for xi in plan.x)
        flipped = True
    call_gap = inst.gap.over_dim_root(n, inst.norm)
    bound = Gap(
        Fraction(abs(plan.determinant)) / (2 * inst.gap.rat)
    ).times_dim_root(n, inst.norm)
    if cert is not None:
        cert.intermediates["gda_sign_flip"] = flipped
        cert.intermediates["gda_bound"] = bound.to_json()
    q0 = rec.gda(GdaInstance(call_gap, bound, x_call, inst.norm))
    if q0 % abs(plan.determinant) == 0:
        raise InvariantError("oracle response has a zero residual")
    return _finish_svp(inst, plan, q0, cert)


class _SapViaSvp(Oracle):
    """Adapter answering plain-approximation calls through the
    unimodular-completion reduction and a short-vector oracle."""

    def __init__(self, rec: _Recorder, limits: Limits) -> None:
        self._rec = rec
        self._limits = limits

    def svp(self, inst: SvpInstance) -> tuple[int, ...]:
        raise NotImplementedError

    def gda(self, inst: GdaInstance) -> int:
        raise NotImplementedError

    def sap(self, inst: SapInstance) -> int:
        return sap_to_svp(inst, self._rec_oracle(), limits=self._limits)

    def _rec_oracle(self) -> Oracle:
        rec = self._rec

        class _Passthrough(Oracle):
            def svp(self, inst: SvpInstance) -> tuple[int, ...]:
                return rec.svp(inst)

            def sap(self, inst: SapInstance) -> int:
                raise NotImplementedError

            def gda(self, inst: GdaInstance) -> int:
                raise NotImplementedError

        return _Passthrough()


def gda_to_svp(
    inst: GdaInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> int:
    """Solve a ranged approximation problem with short-vector oracle
    calls: the denominator descent runs with each approximation call
    answered through the unimodular-completion reduction, so each oracle
    call carries gap scaled by 50/153."""
    _start(cert, "gda-to-svp", inst)
    rec = _Recorder(oracle, cert)
    adapter = _SapViaSvp(rec, limits)
    result = gda_to_sap(inst, adapter, cert=None, limits=limits)
    if cert is not None:
        cert.intermediates["svp_calls"] = format_int(len(cert.trace))
        cert.intermediates["call_bound"] = format_int(
            iteration_bound(lcd(inst.x), inst.gap, inst.bound)
        )
    _finish(cert, result)
    return result


def sap_to_gda(
    inst: SapInstance,
    oracle: Oracle,
    cert: Certificate | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> int:
    """Solve a plain approximation problem with one ranged-approximation
    call: the instance becomes a short-vector problem by unimodular
    completion, which is then solved through the ranged oracle (total
    gap inflation exactly n**(1/p) at that single call)."""
    _start(cert, "sap-to-gda", inst)
    rec = _Recorder(oracle, cert)
    if inst.n == 1:
        raise PreconditionError(
            "the short-vector pipeline needs dimension at least 2"
        )
    scaled, d = _build_sap_lattice_matrix(inst, cert)

    class _Passthrough(Oracle):
        def svp(self, i: SvpInstance) -> tuple[int, ...]:
            raise NotImplementedError

        def sap(self, i: SapInstance) -> int:
            raise NotImplementedError

        def gda(self, i: GdaInstance) -> int:
            return rec.gda(i)

    response = svp_to_gda(
        SvpInstance(inst.gap, scaled, inst.norm), _Passthrough(), cert=None
    )
    q0 = int(response[0])
    if q0 % d == 0:
        _value, q0 = sap_minimum(inst, limits)
        if cert is not None:
            cert.notes.append(
                "oracle answer lay in the scaled sublattice (zero residual); "
                "answered by the exact solver"
            )
    _finish(cert, q0)
    return q0
