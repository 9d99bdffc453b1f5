"""Linear-Diophantine counting problems driven by constant-term extraction.

A system A x = b over nonnegative integers x becomes the constant term

    [prod_i c_i^0]  c^{-b} * prod_j 1 / (1 - z_j c^{A_j})

with one ct variable c_i per equation, A_j the j-th column, and one slack
variable z_j marking x_j.  Extracting all c_i leaves a sum of terms in the
slack variables whose joint value at z = 1 is the solution count; that value
is read off by the exponential substitution of the elimination module.  The
dilation series sum_t #solutions(A x = t b) q^t needs one extra factor
1/(1 - q c^{-b}) and a free series variable q instead of a fixed right-hand
side.

The ct phase runs over exact integer coefficients in every mode (no
divisions happen there); prime moduli only enter the elimination phase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    CT,
    FREE,
    ExactRing,
    InputError,
    PrimeField,
    exps_from_dict,
    exps_mul,
)
from .bruteforce import certify_bounded
from .elimination import (
    DEFAULT_PRIMES,
    crt_combine,
    eliminate_slack,
    pick_lambda,
)
from .engine import ElliottTerm, Stats, TermSum, ct_all, make_term
from .univariate import (
    expand_factored,
    divexact_int,
    power_series_div,
    reduce_fraction_int,
    sparse_mul_binomial,
)
from .algebra import VariableTable


# ---------------------------------------------------------------------------
# problem model


@dataclass
class DiophantineSystem:
    """A x = b over nonnegative integers; columns are the counted variables."""

    matrix: list
    rhs: list

    def __post_init__(self):
        if not self.matrix or not self.matrix[0]:
            raise InputError("the system needs at least one equation and one variable")
        n = len(self.matrix[0])
        for row in self.matrix:
            if len(row) != n:
                raise InputError("ragged matrix")
            for c in row:
                if not isinstance(c, int):
                    raise InputError("matrix entries must be integers")
        if len(self.rhs) != len(self.matrix):
            raise InputError("right-hand side length does not match the equation count")
        for c in self.rhs:
            if not isinstance(c, int):
                raise InputError("right-hand side entries must be integers")
        for j in range(n):
            if all(row[j] == 0 for row in self.matrix):
                raise InputError(f"column {j} is zero: that variable is unconstrained")

    @property
    def m(self):
        return len(self.matrix)

    @property
    def n(self):
        return len(self.matrix[0])

    def scaled(self, t):
        return DiophantineSystem(self.matrix, [t * v for v in self.rhs])


def _enc_int(v):
    return v if -(2**53) < v < 2**53 else str(v)


def system_to_json(system):
    obj = {
        "matrix": [[_enc_int(c) for c in row] for row in system.matrix],
        "rhs": [_enc_int(c) for c in system.rhs],
    }
    return json.dumps(obj, indent=1)


def system_from_json(text):
    try:
        obj = json.loads(text)
        matrix = [[int(c) for c in row] for row in obj["matrix"]]
        rhs = [int(c) for c in obj["rhs"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad system file: {exc}") from None
    return DiophantineSystem(matrix, rhs)


def magic_square_system(n):
    """Row, column, and both diagonal sum conditions on an n x n grid."""
    if n < 1:
        raise InputError("grid size must be positive")
    n2 = n * n
    rows = []
    for r in range(n):
        row = [0] * n2
        for c in range(n):
            row[r * n + c] = 1
        rows.append(row)
    for c in range(n):
        row = [0] * n2
        for r in range(n):
            row[r * n + c] = 1
        rows.append(row)
    diag = [0] * n2
    anti = [0] * n2
    for i in range(n):
        diag[i * n + i] = 1
        anti[i * n + (n - 1 - i)] = 1
    rows.append(diag)
    rows.append(anti)
    return DiophantineSystem(rows, [1] * (2 * n + 2))


# ---------------------------------------------------------------------------
# term-sum builders (phase A input)


def build_count_termsum(system, table, ring, slack_mode="eager"):
    """Single starting term whose iterated constant term is the count."""
    cvids = [table.add(f"c{i + 1}", CT) for i in range(system.m)]
    den = []
    for j in range(system.n):
        exps = exps_from_dict({cvids[i]: system.matrix[i][j] for i in range(system.m)})
        if slack_mode == "eager":
            z = table.fresh_slack()
            exps = exps_mul(exps, ((z, 1),))
        den.append(exps)
    num_exps = exps_from_dict({cvids[i]: -system.rhs[i] for i in range(system.m)})
    t = make_term(ring, {num_exps: ring.one()}, den)
    return TermSum(table, ring, [t] if t is not None else [])


def build_series_termsum(system, table, ring, slack_mode="eager"):
    """Starting term for the dilation series: free q, no fixed right side."""
    qvid = table.add("q", FREE)
    cvids = [table.add(f"c{i + 1}", CT) for i in range(system.m)]
    den = []
    for j in range(system.n):
        exps = exps_from_dict({cvids[i]: system.matrix[i][j] for i in range(system.m)})
        if slack_mode == "eager":
            z = table.fresh_slack()
            exps = exps_mul(exps, ((z, 1),))
        den.append(exps)
    dil = {cvids[i]: -system.rhs[i] for i in range(system.m)}
    dil[qvid] = 1
    den.append(exps_from_dict(dil))
    t = make_term(ring, {(): ring.one()}, den)
    return TermSum(table, ring, [t] if t is not None else [])


def convert_terms(ts, ring):
    """Reinterpret integer-coefficient terms in another coefficient ring."""
    out = []
    for t in ts:
        num = {}
        for e, c in t.num.items():
            rc = ring.from_int(c)
            if not ring.is_zero(rc):
                num[e] = rc
        if num:
            out.append(ElliottTerm(num, t.den))
    return TermSum(ts.table, ring, out)


# ---------------------------------------------------------------------------
# outcome assembly


def _as_int(c):
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    raise ArithmeticError(f"expected an integer, got {c!r}")


@dataclass
class RunOutcome:
    task: str                     # "count" | "series"
    exact: bool
    value: int = None             # count (exact or CRT-reconstructed)
    residues: dict = None         # count mode: {p: residue}
    num: list = None              # series mode: reduced numerator over Z
    den: list = None              # series mode: reduced denominator, den[0] = 1
    den_factors: dict = None      # {k: e} display when den = prod (1 - q^k)^e
    series_residues: dict = None  # series mode without CRT: {p: {...}}
    confidence: Fraction = None   # |value| / prod(moduli) for CRT lifts
    lam: dict = None              # direction used, keyed by variable name
    stats: Stats = None
    table: object = None          # VariableTable of the run

    def value_str(self):
        if self.task == "count":
            if self.value is not None:
                return str(self.value)
            return ", ".join(f"{v} (mod {p})" for p, v in sorted(self.residues.items()))
        if self.num is None and self.series_residues:
            primes = ",".join(str(p) for p in sorted(self.series_residues))
            return f"series residues mod {primes}"
        return format_series(self.num, self.den, self.den_factors)


def format_series(num, den, den_factors=None):
    nstr = poly_str_1var(num, "q")
    if den_factors is not None:
        bits = []
        for k, e in sorted(den_factors.items()):
            base = "(1 - q)" if k == 1 else f"(1 - q^{k})"
            bits.append(f"{base}^{e}" if e > 1 else base)
        d = " * ".join(bits)
    else:
        d = poly_str_1var(den, "q")
    return f"({nstr}) / ({d})"


def poly_str_1var(cs, name):
    if not cs:
        return "0"
    out = []
    for d, c in enumerate(cs):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if d == 0:
            body = str(a)
        elif d == 1:
            body = f"{a}*{name}" if a != 1 else name
        else:
            body = f"{a}*{name}^{d}" if a != 1 else f"{name}^{d}"
        if not out:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f"{sign} {body}")
    return " ".join(out) if out else "0"


def factored_denominator(den, kmax=12):
    """Greedy {k: e} with den = prod (1 - q^k)^e, or None if that fails."""
    rem = list(den)
    if not rem or rem[0] != 1:
        return None
    out = {}
    for k in range(min(kmax, len(rem) - 1), 0, -1):
        binom = [1] + [0] * (k - 1) + [-1]
        while len(rem) - 1 >= k:
            try:
                rem = divexact_int(rem, binom)
            except ArithmeticError:
                break
            out[k] = out.get(k, 0) + 1
    if rem == [1]:
        return out
    return None


def series_coeffs(num, den, count, check_nonneg=True):
    """First `count` power-series coefficients of num/den as exact integers."""
    ring = ExactRing()
    cs = power_series_div(ring, num, den, count)
    out = []
    for c in cs:
        v = _as_int(c)
        if check_nonneg and v < 0:
            raise ArithmeticError("series coefficient went negative")
        out.append(v)
    return out


def _align_series(ring_results):
    """Bring per-ring (ring, accumulator) results onto one denominator."""
    target = {}
    for _, acc in ring_results:
        for k, e in acc.den.items():
            if e > target.get(k, 0):
                target[k] = e
    aligned = []
    for ring, acc in ring_results:
        num = dict(acc.num)
        for k, e in target.items():
            deficit = e - acc.den.get(k, 0)
            if deficit > 0:
                num = sparse_mul_binomial(ring, num, k, deficit)
        aligned.append((ring, num))
    return target, aligned


def _sparse_to_dense(num):
    if not num:
        return []
    lo = min(num)
    if lo < 0:
        raise ArithmeticError("series numerator kept a negative degree")
    out = [0] * (max(num) + 1)
    for d, c in num.items():
        out[d] = _as_int(c)
    while out and out[-1] == 0:
        out.pop()
    return out


def _reduce_series(num_dense, den_counts, kmax=12):
    den_dense = expand_factored(ExactRing(), den_counts)
    num_r, den_r = reduce_fraction_int(num_dense, den_dense)
    if den_r and den_r[0] < 0:
        num_r = [-c for c in num_r]
        den_r = [-c for c in den_r]
    return num_r, den_r, factored_denominator(den_r, kmax)


# ---------------------------------------------------------------------------
# the pipeline


def elimination_rings(moduli):
    return [PrimeField(p) for p in moduli] if moduli else [ExactRing()]


def check_boundedness(system, assume_bounded=False):
    if assume_bounded:
        return
    if not certify_bounded(system.matrix):
        raise InputError(
            "the homogeneous system has a nonzero nonnegative solution; "
            "the solution set is infinite"
        )


def run_pipeline(
    system,
    task,
    *,
    moduli=(),
    crt=False,
    order="given",
    slack_mode="eager",
    seed=0,
    lam=None,
    assume_bounded=False,
    stats=None,
    kmax=12,
):
    """Count solutions (task="count") or compute the dilation series
    (task="series") for one system, in one process, no checkpointing."""
    check_boundedness(system, assume_bounded)
    stats = stats if stats is not None else Stats()
    table = VariableTable()
    ring0 = ExactRing()
    if task == "count":
        ts = build_count_termsum(system, table, ring0, slack_mode)
    elif task == "series":
        ts = build_series_termsum(system, table, ring0, slack_mode)
    else:
        raise InputError(f"unknown task {task!r}")
    done = ct_all(ts, order=order, delayed=(slack_mode == "delayed"), stats=stats)
    lam_map = pick_lambda([done], moduli=moduli, seed=seed, lam=lam)
    lam_named = {table.name_of(v): w for v, w in lam_map.items()}

    rings = elimination_rings(moduli)
    results = []
    for ring in rings:
        ts_r = convert_terms(done, ring)
        results.append((ring, eliminate_slack(ts_r, lam_map, stats)))

    if task == "count":
        out = _assemble_count(results, moduli, crt, lam_named, stats)
    else:
        out = _assemble_series(results, moduli, crt, lam_named, stats, kmax)
    out.table = table
    return out


def _assemble_count(results, moduli, crt, lam_named, stats):
    if not moduli:
        _, (kind, value) = results[0]
        if kind != "scalar":
            raise RuntimeError("count pipeline ended in non-scalar mode")
        return RunOutcome(
            task="count", exact=True, value=_as_int(value), lam=lam_named, stats=stats
        )
    residues = {}
    for ring, (kind, value) in results:
        if kind != "scalar":
            raise RuntimeError("count pipeline ended in non-scalar mode")
        residues[ring.modulus] = value % ring.modulus
    if not crt:
        return RunOutcome(
            task="count", exact=False, residues=residues, lam=lam_named, stats=stats
        )
    value, conf = crt_combine([residues[p] for p in moduli], list(moduli))
    return RunOutcome(
        task="count",
        exact=False,
        value=value,
        residues=residues,
        confidence=conf,
        lam=lam_named,
        stats=stats,
    )


def _assemble_series(results, moduli, crt, lam_named, stats, kmax):
    if not moduli:
        _, (kind, acc) = results[0]
        if kind != "series":
            raise RuntimeError("series pipeline ended in non-series mode")
        num_dense = _sparse_to_dense(acc.num)
        num_r, den_r, factors = _reduce_series(num_dense, dict(acc.den), kmax)
        return RunOutcome(
            task="series",
            exact=True,
            num=num_r,
            den=den_r,
            den_factors=factors,
            lam=lam_named,
            stats=stats,
        )
    ring_results = []
    for ring, (kind, acc) in results:
        if kind != "series":
            raise RuntimeError("series pipeline ended in non-series mode")
        ring_results.append((ring, acc))
    target, aligned = _align_series(ring_results)
    if not crt:
        per_prime = {}
        for ring, num in aligned:
            degs = sorted(num)
            per_prime[ring.modulus] = {
                "num": {d: num[d] % ring.modulus for d in degs},
                "den_counts": dict(target),
            }
        return RunOutcome(
            task="series",
            exact=False,
            series_residues=per_prime,
            lam=lam_named,
            stats=stats,
        )
    # coefficientwise reconstruction over the aligned denominator
    degrees = sorted({d for _, num in aligned for d in num})
    primes = [ring.modulus for ring, _ in aligned]
    lifted = {}
    worst = Fraction(0)
    for d in degrees:
        residues = [num.get(d, 0) % ring.modulus for ring, num in aligned]
        v, conf = crt_combine(residues, primes)
        if conf > worst:
            worst = conf
        if v:
            lifted[d] = v
    num_dense = _sparse_to_dense(lifted)
    num_r, den_r, factors = _reduce_series(num_dense, target, kmax)
    return RunOutcome(
        task="series",
        exact=False,
        num=num_r,
        den=den_r,
        den_factors=factors,
        confidence=worst,
        lam=lam_named,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# convenience wrappers


def knapsack_system(a0, weights):
    if a0 < 0:
        raise InputError("the target must be nonnegative")
    if not weights or any(w <= 0 for w in weights):
        raise InputError("weights must be positive integers")
    return DiophantineSystem([list(weights)], [a0])


def knapsack_count(a0, weights, **kw):
    out = run_pipeline(knapsack_system(a0, weights), "count", **kw)
    return out.value if out.value is not None else out.residues


def diophantine_count(system, **kw):
    return run_pipeline(system, "count", **kw)


def ehrhart_series(system, **kw):
    return run_pipeline(system, "series", **kw)
