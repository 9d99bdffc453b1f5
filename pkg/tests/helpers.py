"""Shared builders for the test suite.

Random Elliott terms are generated over free variables y1..ym plus one
extraction variable x.  A dominance collapse y_j -> y^(OMEGA^(m-j)) maps
any such term onto just two variables while preserving, factor by factor,
which way each geometric series expands; that turns the slow graded
expansion in bruteforce.naive_ct into an exact oracle for the engine.
"""

import random

from cteuclid.algebra import CT, FREE, VariableTable, exps_from_dict
from cteuclid.bruteforce import naive_ct, term_y_series
from cteuclid.engine import CollisionError, ct_var, make_term

OMEGA = 16  # dominance base; safe while every digit stays <= OMEGA - 2
YMAX = 2 * OMEGA  # comparison window for collapsed series


class DigitOverflow(Exception):
    """An exponent outruns the dominance base; the instance is skipped."""


def table_xy(m=2):
    table = VariableTable()
    ys = [table.add(f"y{j + 1}", FREE) for j in range(m)]
    x = table.add("x", CT)
    return table, ys, x


def collapse_table():
    table = VariableTable()
    y = table.add("y", FREE)
    x = table.add("x", CT)
    return table, y, x


def random_term(rng, ring, ys, x, max_factors=3, emax=2, xmax=2,
                x_nonneg_num=False, need_x_factor=False):
    """Random term; every denominator factor touches some free variable."""
    den = []
    nfac = rng.randint(1, max_factors)
    for i in range(nfac):
        while True:
            e = {}
            a = rng.randint(-xmax, xmax)
            if need_x_factor and i == 0 and a == 0:
                continue
            if a:
                e[x] = a
            for y in ys:
                k = rng.randint(-emax, emax)
                if k and rng.random() < 0.75:
                    e[y] = k
            if any(y in e for y in ys):
                break
        den.append(exps_from_dict(e))
    num = {}
    for _ in range(rng.randint(1, 2)):
        e = {}
        a = 0 if x_nonneg_num else rng.randint(-xmax, xmax)
        if a:
            e[x] = a
        for y in ys:
            k = rng.randint(-1, 1)
            if k:
                e[y] = k
        c = rng.choice([-2, -1, 1, 2, 3])
        key = exps_from_dict(e)
        num[key] = num.get(key, 0) + c
    num = {e: ring.from_int(c) for e, c in num.items() if c}
    return make_term(ring, num, den)


def collapse_exps(e, ys, x, y_new, x_new):
    m = len(ys)
    W = 0
    a = 0
    for v, k in e:
        if v == x:
            a = k
        else:
            if abs(k) > OMEGA - 2:
                raise DigitOverflow
            j = ys.index(v)
            W += k * OMEGA ** (m - 1 - j)
    out = {}
    if W:
        out[y_new] = W
    if a:
        out[x_new] = a
    return exps_from_dict(out)


def collapse_term(ring, t, ys, x, y_new, x_new):
    """Image of one term under the collapse (None if the numerator cancels)."""
    den = []
    for f in t.den:
        nf = collapse_exps(f, ys, x, y_new, x_new)
        if not nf:
            raise DigitOverflow  # a factor collapsed to 1; never with sane digits
        den.append(nf)
    num = {}
    for e, c in t.num.items():
        ne = collapse_exps(e, ys, x, y_new, x_new)
        prev = num.get(ne)
        s = c if prev is None else ring.add(prev, c)
        if ring.is_zero(s):
            num.pop(ne, None)
        else:
            num[ne] = s
    return make_term(ring, num, den)


def collapsed_series(ring, terms, ys, x, y_new, x_new, ymax=YMAX, budget=10**7):
    """Exact y-series (through ymax) of a sum of x-free terms, collapsed."""
    flat = []
    for t in terms:
        ft = collapse_term(ring, t, ys, x, y_new, x_new)
        if ft is not None:
            flat.append(ft)
    return term_y_series(ring, flat, y_new, ymax, budget)


def engine_vs_naive(ring, t, ys, x, ymax=YMAX, budget=10**7):
    """Compare ct_var against the graded expansion.

    Returns (got, want) series dicts, or None when the instance must be
    skipped (factor collision or a digit outrunning the dominance base).
    """
    y_new = (FREE, 0)
    x_new = (CT, 0)
    try:
        res = ct_var(ring, t, x)
        flat_in = collapse_term(ring, t, ys, x, y_new, x_new)
        got = collapsed_series(ring, res, ys, x, y_new, x_new, ymax, budget)
    except (CollisionError, DigitOverflow):
        return None
    if flat_in is None:
        return got, {}
    want = naive_ct(ring, flat_in, x_new, y_new, ymax, budget)
    return got, want
