"""Brute-force reference implementations.

Everything here enumerates the full joint assignment space with plain
``itertools.product`` and exact Fraction/GaussianRational arithmetic.  Nothing
is shared with the fast engines in :mod:`aclab.dist`, :mod:`aclab.structure`
or :mod:`aclab.bounds`, so agreement between the two is a genuine check.
Only use these at small sizes.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Sequence

from .scalars import GaussianRational, as_gaussian

_ZERO = GaussianRational(0)


def _assignments(atoms):
    for combo in itertools.product(*(a.support for a in atoms)):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        yield [v for v, _ in combo], p


def law(fn: Callable, atoms) -> dict:
    """Law of ``fn(assignment)`` over independent atoms."""
    out: dict = defaultdict(Fraction)
    for x, p in _assignments(atoms):
        out[fn(x)] += p
    return dict(out)


def event_probability(pred: Callable, atoms) -> Fraction:
    return sum((p for x, p in _assignments(atoms) if pred(x)), Fraction(0))


def _dot(a, x):
    return sum((as_gaussian(ai) * xi for ai, xi in zip(a, x)), _ZERO)


def linear_law(coeffs, atom) -> dict:
    return law(lambda x: _dot(coeffs, x), [atom] * len(coeffs))


def sup_mass(dist: dict) -> Fraction:
    return max(dist.values())


def bilinear_law(matrix, x_atom, y_atom) -> dict:
    m, n = len(matrix), len(matrix[0])

    def value(v):
        x, y = v[:m], v[m:]
        return sum((as_gaussian(matrix[i][j]) * x[i] * y[j] for i in range(m) for j in range(n)), _ZERO)

    return law(value, [x_atom] * m + [y_atom] * n)


def bilinear_event(matrix, target: Callable, x_atom, y_atom) -> Fraction:
    m, n = len(matrix), len(matrix[0])

    def pred(v):
        x, y = v[:m], v[m:]
        val = sum((as_gaussian(matrix[i][j]) * x[i] * y[j] for i in range(m) for j in range(n)), _ZERO)
        return val == target(y)

    return event_probability(pred, [x_atom] * m + [y_atom] * n)


def quadratic_law(matrix, linear, atom) -> dict:
    n = len(matrix)

    def value(x):
        q = sum((as_gaussian(matrix[i][j]) * x[i] * x[j] for i in range(n) for j in range(n)), _ZERO)
        return q - _dot(linear, x)

    return law(value, [atom] * n)


def multilinear_event(coeffs: dict, dims, atoms, target: Callable) -> Fraction:
    k = len(dims)
    blocks = []
    for a, d in zip(atoms, dims):
        blocks.extend([a] * d)
    offsets = [sum(dims[:i]) for i in range(k)]

    def pred(v):
        parts = [v[o:o + d] for o, d in zip(offsets, dims)]
        val = _ZERO
        for idx, a in coeffs.items():
            term = as_gaussian(a)
            for part, i in zip(parts, idx):
                term = term * part[i]
            val += term
        tail = tuple(x for part in parts[1:] for x in part)
        return val == target(tail)

    return event_probability(pred, blocks)


def joint_law(vectors, atom) -> dict:
    n = len(vectors[0])
    return law(lambda y: tuple(_dot(v, y) for v in vectors), [atom] * n)


# ---------------------------------------------------------------------------
# arithmetic structure

def shortest_progression_length(values: Sequence) -> int:
    """Smallest R such that a progression {j*d : lo <= j <= hi}, hi - lo = R,
    0 in range, contains all values.

    Any valid step d makes v0/d an integer j for the smallest nonzero |v0|,
    and the span is at least j, so scanning j = 1, 2, ... while j < best is
    exhaustive.
    """
    vals = [Fraction(v) for v in values]
    nz = [v for v in vals if v]
    if not nz:
        raise ValueError("all zero")
    v0 = min(abs(v) for v in nz)
    best = None
    j = 1
    while best is None or j < best:
        d = v0 / j
        ks = [w / d for w in vals]
        if all(k.denominator == 1 for k in ks):
            span = max(max(ks), 0) - min(min(ks), 0)
            best = span if best is None else min(best, span)
        j += 1
    return int(best)


def floor_beats(R: int, r: int, eps: Fraction) -> bool:
    """True when r**(-1/2 + eps/4) > 1/R, i.e. R**(4q) > r**(2q - p) for eps = p/q."""
    p, q = eps.numerator, eps.denominator
    return R ** (4 * q) > r ** (2 * q - p)


def expected_comm(rows, atom, r: int, eps: Fraction, mode: str):
    """(rational part, floor mass) of E_y Comm / Comm* by full enumeration."""
    n = len(rows[0])
    rational = Fraction(0)
    floor = Fraction(0)
    for y, p in _assignments([atom] * n):
        vals = [_dot(v, y) for v in rows]
        assert all(x.is_real() for x in vals)
        vals = [x.re for x in vals]
        if mode == "comm_star" and any(v == 0 for v in vals):
            continue
        if not any(vals):
            rational += p
            continue
        R = shortest_progression_length(vals)
        if floor_beats(R, r, eps):
            floor += p
        else:
            rational += p / R
    return rational, floor


def low_height_count(a: int, b: int, c: int, d: int, n: int, q: int) -> int:
    count = 0
    for z in range(1, n + 1):
        den = c * z + d
        if den == 0:
            continue
        f = Fraction(a * z + b, den)
        if max(abs(f.numerator), abs(f.denominator)) <= q:
            count += 1
    return count


def is_rank_one(matrix, rows, cols) -> bool:
    """All 2x2 minors of the block vanish."""
    for i, j in itertools.combinations(rows, 2):
        for k, l in itertools.combinations(cols, 2):
            a = as_gaussian
            if a(matrix[i][k]) * a(matrix[j][l]) != a(matrix[i][l]) * a(matrix[j][k]):
                return False
    return True


def shatters(n: int, partitions) -> bool:
    """Every ordered quadruple of distinct indices is split (i, j in Y; k, l in Z)."""
    sets = [(set(p.Y), set(p.Z)) for p in partitions]
    for i, j, k, l in itertools.permutations(range(n), 4):
        if not any(i in Y and j in Y and k in Z and l in Z for Y, Z in sets):
            return False
    return True


def divisor_count(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if n % k == 0)


def height(f: Fraction) -> int:
    f = Fraction(f)
    return max(abs(f.numerator), f.denominator)


def ordered_ksum_collisions(coeffs, k: int) -> int:
    """R_k by direct enumeration of 2k-tuples."""
    vals = [as_gaussian(a) for a in coeffs]
    tuples = list(itertools.product(range(len(vals)), repeat=k))
    if len(tuples) > 2000:
        raise ValueError("too many k-tuples for the quadratic-time oracle")
    s = [sum((vals[i] for i in t), _ZERO) for t in tuples]
    return sum(1 for x in s for y in s if x == y)


def incidence_direct(b, c, d, atom) -> Fraction:
    """P((sum b_i x_i)^2 = sum c_i x_i + d)."""
    def pred(x):
        t = _dot(b, x)
        return t * t == _dot(c, x) + as_gaussian(d)
    return event_probability(pred, [atom] * len(b))


def comb_ratio(n: int) -> Fraction:
    return Fraction(math.comb(n, n // 2), 2 ** n)
