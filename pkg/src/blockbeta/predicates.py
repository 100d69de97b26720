"""Orientation predicate with exact escalation.

The sign of det[p_1 - q, ..., p_d - q] decides which side of the
oriented hyperplane through p_1..p_d the query q lies on.  A floating
evaluation with a running magnitude bound answers almost every call;
whenever |det| falls inside the rounding bound the determinant is
recomputed in exact rational arithmetic (floats are exact rationals,
so the escalated sign is the true sign, including exact zero).
"""

from __future__ import annotations

from fractions import Fraction

EPS = 2.0 ** -52


def _det_and_permanent(rows):
    """Determinant and permanent-of-absolute-values via subset DP."""
    d = len(rows)
    full = (1 << d) - 1
    det = [0.0] * (full + 1)
    perm = [0.0] * (full + 1)
    det[0] = 1.0
    perm[0] = 1.0
    order = sorted(range(1, full + 1), key=lambda s: s.bit_count())
    for s in order:
        r = s.bit_count() - 1
        row = rows[r]
        acc_d = 0.0
        acc_p = 0.0
        sign = 1.0
        rest = s
        while rest:
            j = (rest & -rest).bit_length() - 1
            sub = s & ~(1 << j)
            acc_d += sign * row[j] * det[sub]
            acc_p += abs(row[j]) * perm[sub]
            sign = -sign
            rest &= rest - 1
        det[s] = acc_d
        perm[s] = acc_p
    return det[full], perm[full]


def _det_exact(rows):
    d = len(rows)
    full = (1 << d) - 1
    det = [Fraction(0)] * (full + 1)
    det[0] = Fraction(1)
    order = sorted(range(1, full + 1), key=lambda s: s.bit_count())
    for s in order:
        r = s.bit_count() - 1
        row = rows[r]
        acc = Fraction(0)
        sign = 1
        rest = s
        while rest:
            j = (rest & -rest).bit_length() - 1
            sub = s & ~(1 << j)
            acc += sign * row[j] * det[sub]
            sign = -sign
            rest &= rest - 1
        det[s] = acc
    return det[full]


def orientation(simplex, q) -> int:
    """Sign (+1/-1/0) of det of rows (p_i - q), exact for float inputs."""
    d = len(q)
    if len(simplex) != d:
        raise ValueError(f"need {d} simplex points for dimension {d}")
    rows = [[float(p[j]) - float(q[j]) for j in range(d)] for p in simplex]
    det, perm = _det_and_permanent(rows)
    # Entry subtraction plus DP accumulation are all O(d) rounding steps
    # per monomial; 8*d*EPS*perm over-covers that.
    bound = 8.0 * d * EPS * perm
    if det > bound:
        return 1
    if det < -bound:
        return -1
    exact_rows = [
        [Fraction(float(p[j])) - Fraction(float(q[j])) for j in range(d)]
        for p in simplex
    ]
    exact = _det_exact(exact_rows)
    if exact > 0:
        return 1
    if exact < 0:
        return -1
    return 0
