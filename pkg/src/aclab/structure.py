"""Arithmetic structure detectors with exactly verified certificates.

Covers shortest progressions and commensurability, dilated integer fits,
typical vectors, degenerate pairs, ratio/disagreement structure of row
tuples, rank-one submatrix extraction, k-core peeling and counting of
low-height values of Mobius maps.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certs import APCertificate, GAPCertificate, RankOneCertificate, TupleStructure
from .config import DEFAULT_BUDGET, GAP_SAMPLE_CAP, Budget
from .dist import joint_distribution
from .errors import (AllZero, CertificateError, DegenerateMap, InvalidArgument)
from .forms import ZERO, AtomDistribution, BilinearForm, LinearForm, QuadraticForm, RADEMACHER
from .scalars import (GaussianRational, as_gaussian, as_rational, format_rational, gaussian_height,
                      gcd_all, power_at_least, radical_sign)

__all__ = [
    "APCertificate", "GAPCertificate", "RankOneCertificate", "TupleStructure",
    "CommExpectation",
    "shortest_ap", "commensurability", "comm_star", "expected_commensurability",
    "classify_typical", "degenerate_pair", "tuple_structure", "friendly_probability",
    "is_friendly", "rank_one_extract", "gap_fit", "dense_principal_minor",
    "count_low_height", "low_height_scan",
]

_INT64_SAFE = 1 << 62


def _real(v, what="value") -> Fraction:
    z = as_gaussian(v)
    if not z.is_real():
        raise InvalidArgument(f"{what} must be rational (real)")
    return z.re


# ---------------------------------------------------------------------------
# progressions and commensurability

def shortest_ap(values: Sequence) -> APCertificate:
    """Shortest progression ``{j*d}`` through 0 containing every value.

    ``d`` is the positive generator of the group the values span; the step
    count is ``max(j, 0) - min(j, 0)``.
    """
    vals = [_real(v) for v in values]
    if not any(vals):
        raise AllZero("all values are zero")
    d = gcd_all(vals)
    coords = tuple(int(v / d) for v in vals)
    lo, hi = min(min(coords), 0), max(max(coords), 0)
    return APCertificate(d, lo, hi, coords, tuple(range(len(vals))))


def _floor_exponent(eps) -> Fraction:
    eps = as_rational(eps)
    if not 0 < eps < Fraction(1, 2):
        raise InvalidArgument("eps must satisfy 0 < eps < 1/2")
    return Fraction(-1, 2) + eps / 4


def _check_r(r):
    if r < 2:
        raise InvalidArgument("r must be >= 2")


def _inverse_length(values) -> Fraction | None:
    """1/R for the tuple, or None when every value is zero."""
    vals = [_real(v) for v in values]
    if not any(vals):
        return None
    return Fraction(1, shortest_ap(vals).length)


def _floor_dominates(inv_len: Fraction, r: int, expo: Fraction) -> bool:
    """True when ``r**expo > inv_len`` (the truncation floor wins)."""
    return not power_at_least(inv_len, r, expo)


def commensurability(values: Sequence, r: int, eps) -> Fraction | float:
    """``max(r**(-1/2 + eps/4), 1/R)``; an all-zero tuple gives 1.

    Returns an exact Fraction when ``1/R`` attains the max, otherwise the
    (irrational) floor as a float.  The comparison itself is exact.
    """
    _check_r(r)
    expo = _floor_exponent(eps)
    inv = _inverse_length(values)
    if inv is None:
        return Fraction(1)
    if _floor_dominates(inv, r, expo):
        return float(r) ** float(expo)
    return inv


def comm_star(values: Sequence, r: int, eps) -> Fraction | float:
    """Commensurability times the indicator that no value is zero."""
    vals = [_real(v) for v in values]
    if any(v == 0 for v in vals):
        _check_r(r)
        _floor_exponent(eps)
        return Fraction(0)
    return commensurability(vals, r, eps)


@dataclass(frozen=True)
class CommExpectation:
    """``E = rational_part + floor_mass * r**floor_exponent`` exactly.

    ``rational_part`` collects the ``1/R`` contributions, ``floor_mass`` the
    probability of outcomes where the truncation floor is the max.
    """

    rational_part: Fraction
    floor_mass: Fraction
    r: int
    eps: Fraction
    mode: str

    @property
    def floor_exponent(self) -> Fraction:
        return _floor_exponent(self.eps)

    @property
    def value(self) -> float:
        return float(self.rational_part) + float(self.floor_mass) * float(self.r) ** float(self.floor_exponent)

    @property
    def threshold_exponent(self) -> Fraction:
        return Fraction(-1, 2) + 5 * self.eps / 8

    @property
    def is_neighborly(self) -> bool:
        """``E >= (1/6) r**(-1/2 + 5 eps/8)``, decided exactly."""
        terms = [(self.rational_part, 0), (self.floor_mass, self.floor_exponent),
                 (Fraction(-1, 6), self.threshold_exponent)]
        return radical_sign(terms, self.r) >= 0

    def to_json(self):
        return {
            "mode": self.mode,
            "r": self.r,
            "eps": format_rational(self.eps),
            "rational_part": format_rational(self.rational_part),
            "floor_mass": format_rational(self.floor_mass),
            "floor_exponent": format_rational(self.floor_exponent),
            "value": self.value,
            "is_neighborly": self.is_neighborly,
        }


def expected_commensurability(rows: Sequence, atom: AtomDistribution | None, r: int, eps,
                              mode: str = "comm", budget: Budget | None = None) -> CommExpectation:
    """Exact ``E_y Comm(v_1.y, ..., v_k.y)`` (mode ``comm``) or ``Comm*`` (mode ``comm_star``)."""
    mode = mode.lower().replace("*", "_star").replace("-", "_")
    if mode not in ("comm", "comm_star", "commstar"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    mode = "comm" if mode == "comm" else "comm_star"
    _check_r(r)
    eps = as_rational(eps)
    expo = _floor_exponent(eps)
    atom = atom or RADEMACHER
    law = joint_distribution([LinearForm(v, atom) for v in rows], budget)
    rational = Fraction(0)
    floor = Fraction(0)
    for vec, p in law.support.items():
        vals = [_real(x, "form value") for x in vec]
        if mode == "comm_star" and any(v == 0 for v in vals):
            continue
        inv = _inverse_length(vals)
        if inv is None:
            rational += p
        elif _floor_dominates(inv, r, expo):
            floor += p
        else:
            rational += p * inv
    return CommExpectation(rational, floor, r, eps, mode)


def classify_typical(B: BilinearForm, y: Sequence, r: int, eps) -> bool:
    """True when ``Ay`` has at least ``r**(1 - eps/4)`` nonzero entries."""
    eps = as_rational(eps)
    y = [as_gaussian(v) for v in y]
    if len(y) != B.shape[1]:
        raise InvalidArgument("assignment length does not match columns")
    count = sum(1 for row in B.matrix if not sum((a * b for a, b in zip(row, y)), ZERO).is_zero())
    return power_at_least(Fraction(count), r, 1 - eps / 4)


# ---------------------------------------------------------------------------
# pairs and tuples

def degenerate_pair(a: Sequence, b: Sequence, r: int, search_bound: int):
    """Coprime integers ``(l1, l2)`` with ``l1*a_i == l2*b_i`` on at least ``n - r/5`` coordinates.

    Candidates come from coordinate quotients ``b_i/a_i`` plus ``(1, 0)`` and
    ``(0, 1)``; signs are normalized to ``l2 > 0`` (or ``l2 == 0, l1 > 0``).
    Among qualifying pairs the one with most agreements wins, then smaller
    ``max(|l1|, |l2|)``, then lexicographic order.  Returns None if none qualify.
    """
    if search_bound < 1:
        raise InvalidArgument("search_bound must be >= 1")
    a = [as_gaussian(v) for v in a]
    b = [as_gaussian(v) for v in b]
    if len(a) != len(b):
        raise InvalidArgument("a and b must have equal length")
    n = len(a)
    cands = {(1, 0), (0, 1)}
    for x, y in zip(a, b):
        if x.is_zero() or y.is_zero():
            continue
        q = y / x
        if not q.is_real():
            continue
        q = q.re
        l1, l2 = q.numerator, q.denominator
        if max(abs(l1), abs(l2)) <= search_bound:
            cands.add((l1, l2))
    best = None
    for l1, l2 in cands:
        agree = sum(1 for x, y in zip(a, b) if x * l1 == y * l2)
        if 5 * agree < 5 * n - r:
            continue
        key = (-agree, max(abs(l1), abs(l2)), l1, l2)
        if best is None or key < best[0]:
            best = (key, (l1, l2))
    return None if best is None else best[1]


def _ratio_key(d: GaussianRational):
    positive = d.re > 0 or (d.re == 0 and d.im > 0)
    return (gaussian_height(d), 0 if positive else 1, d.re, d.im)


def _best_ratio(v1, vj):
    """Ratio ``d`` minimizing ``#{i : v1[i] != d * vj[i]}`` with the documented tie-break."""
    cands = {ZERO}
    for x, y in zip(v1, vj):
        if not y.is_zero():
            cands.add(x / y)
    best = None
    for d in cands:
        bad = sum(1 for x, y in zip(v1, vj) if x != d * y)
        key = (bad,) + _ratio_key(d)
        if best is None or key < best[0]:
            best = (key, d)
    return best[1]


def _capped(size: int) -> int:
    return 1 if size == 0 else min(size, 4)


def tuple_structure(v: Sequence, r: int | None = None) -> TupleStructure:
    """Ratios ``d_j`` and disagreement sets ``S_j`` of ``v_1`` against each ``v_j``.

    ``d_j`` minimizes the size of ``S_j = {i : v_1[i] != d_j v_j[i]}``; ties go
    to the smallest height, then a positive value, then ``(re, im)`` order.
    ``score`` counts the ``S_j`` escaping the union of earlier sets and
    ``product_metric`` multiplies the capped sizes of the escaping parts.
    ``r`` is accepted for symmetry with the other tuple operations and unused.
    """
    rows = [[as_gaussian(x) for x in row] for row in v]
    if len(rows) < 2:
        raise InvalidArgument("need at least two vectors")
    n = len(rows[0])
    if any(len(row) != n for row in rows):
        raise InvalidArgument("vectors must have equal length")
    v1 = rows[0]
    if all(x.is_zero() for x in v1):
        raise InvalidArgument("v_1 must not be identically zero")
    ratios, sets, escapes = [], [], []
    union: set = set()
    score = 0
    metric = 1
    for j, vj in enumerate(rows[1:], start=1):
        d = _best_ratio(v1, vj)
        S = frozenset(i for i, (x, y) in enumerate(zip(v1, vj)) if x != d * y)
        new = S - union
        if new:
            score += 1
            escapes.append(j)
        metric *= _capped(len(new))
        union |= S
        ratios.append(d)
        sets.append(S)
    return TupleStructure(tuple(ratios), tuple(sets), score, metric, tuple(escapes))


def friendly_probability(v: Sequence, atom: AtomDistribution | None = None,
                         budget: Budget | None = None) -> Fraction:
    """Exact ``P(v_1.y = ... = v_k.y = 0)``."""
    atom = atom or RADEMACHER
    law = joint_distribution([LinearForm(row, atom) for row in v], budget)
    return law.prob(tuple(ZERO for _ in v))


def is_friendly(v: Sequence, atom: AtomDistribution | None, r: int, eps,
                budget: Budget | None = None) -> bool:
    """Exact test of ``P(all forms vanish) >= (1/3) r**(-1 + eps)``."""
    p = friendly_probability(v, atom, budget)
    return power_at_least(3 * p, r, -1 + as_rational(eps))


# ---------------------------------------------------------------------------
# rank-one extraction

class _GaussGrid:
    """Matrix scaled to Gaussian integers, stored as real/imag int arrays."""

    def __init__(self, matrix):
        flat = [as_gaussian(a) for row in matrix for a in row]
        scale = 1
        for z in flat:
            scale = math.lcm(scale, z.re.denominator, z.im.denominator)
        m, n = len(matrix), len(matrix[0])
        re = [int(z.re * scale) for z in flat]
        im = [int(z.im * scale) for z in flat]
        big = max((abs(x) for x in re + im), default=0)
        dtype = np.int64 if 8 * big * big < _INT64_SAFE else object
        self.re = np.array(re, dtype=dtype).reshape(m, n)
        self.im = np.array(im, dtype=dtype).reshape(m, n)
        self.shape = (m, n)

    def minors(self, i: int, j: int):
        """Boolean n x n array: True where ``a_ik a_jl != a_il a_jk``."""
        ar, ai, br, bi = self.re[i], self.im[i], self.re[j], self.im[j]
        pr = np.outer(ar, br) - np.outer(ai, bi)
        pi = np.outer(ar, bi) + np.outer(ai, br)
        return (pr != pr.T) | (pi != pi.T)

    def nonzero(self, i: int):
        return (self.re[i] != 0) | (self.im[i] != 0)


def _first_violation(grid, upper_rows, lower_rows, cols):
    """First ``(i, j, k, l)`` with ``i`` in upper_rows, ``j`` in lower_rows, ``k < l`` in cols."""
    if len(cols) < 2:
        return None
    idx = np.array(sorted(cols))
    for j in sorted(lower_rows):
        for i in sorted(upper_rows):
            if i == j:
                continue
            bad = np.triu(grid.minors(i, j)[np.ix_(idx, idx)], k=1)
            hit = np.argwhere(bad)
            if len(hit):
                k, l = hit[0]
                return i, j, int(idx[k]), int(idx[l])
    return None


def _row_agreement(A, p: int, i: int) -> int:
    """Most columns on which row i equals ``lam * row p`` for a single ``lam``."""
    zero_cols = 0
    ratios = Counter()
    for x, y in zip(A[p], A[i]):
        if x.is_zero():
            zero_cols += y.is_zero()
        else:
            ratios[y / x] += 1
    return zero_cols + max(ratios.values(), default=0)


def _seed_row(A) -> int:
    m = len(A)
    best = None
    for p in range(m):
        if all(x.is_zero() for x in A[p]):
            continue
        score = sum(_row_agreement(A, p, i) for i in range(m) if i != p)
        key = (-score, -sum(1 for x in A[p] if not x.is_zero()), p)
        if best is None or key < best:
            best = key
    return 0 if best is None else best[2]


def _factor(A, grid, rows, cols) -> RankOneCertificate:
    rows, cols = sorted(rows), sorted(cols)
    pivot = None
    for i in rows:
        for k in cols:
            if not A[i][k].is_zero():
                pivot = (i, k)
                break
        if pivot:
            break
    if pivot is None:
        u = {i: ZERO for i in rows}
        v = {k: GaussianRational(1) for k in cols}
    else:
        p, k0 = pivot
        v = {k: A[p][k] for k in cols}
        u = {i: A[i][k0] / A[p][k0] for i in rows}
    return RankOneCertificate(rows, cols, u, v)


def rank_one_extract(B: BilinearForm, seed_cert: RankOneCertificate | None = None,
                     trace: list | None = None) -> RankOneCertificate:
    """Grow a rank-one block by demoting rows that break a 2x2 minor.

    ``X1`` holds certified rows, ``X2`` candidates, ``Y1`` surviving columns.
    Each step finds the first minor ``a_ik a_jl != a_il a_jk`` with ``i`` in
    X1, ``j`` in X2 and ``k < l`` in Y1, rejects row ``j`` and deletes columns
    ``k`` and ``l``.  When every X1 row vanishes on Y1 but X2 is not yet
    rank one, the first X2 row that is nonzero on Y1 is promoted to X1.
    Without a seed, X1 starts as the row agreeing (up to scaling) with the
    most entries of the other rows, and Y1 as all columns.

    If ``trace`` is a list, each demotion is appended as ``(j, k, l)``.
    """
    A = [[as_gaussian(x) for x in row] for row in B.matrix]
    m, n = B.shape
    grid = _GaussGrid(A)
    if seed_cert is not None:
        if not seed_cert.verify(A):
            raise CertificateError("seed certificate does not factor its block")
        X1 = set(seed_cert.rows)
        Y1 = set(seed_cert.cols)
    else:
        X1 = {_seed_row(A)}
        Y1 = set(range(n))
    X2 = set(range(m)) - X1
    while True:
        hit = _first_violation(grid, X1, X2, Y1)
        if hit is not None:
            _, j, k, l = hit
            X2.discard(j)
            Y1 -= {k, l}
            if trace is not None:
                trace.append((j, k, l))
            continue
        inner = _first_violation(grid, X2, X2, Y1)
        if inner is None:
            break
        cols = sorted(Y1)
        promote = next(j for j in sorted(X2) if grid.nonzero(j)[cols].any())
        X2.discard(promote)
        X1.add(promote)
    cert = _factor(A, grid, X1 | X2, Y1)
    cert.check(A)
    return cert


# ---------------------------------------------------------------------------
# dilated integer fits

def gap_fit(coeffs: Sequence, B: int, max_exceptions: int) -> GAPCertificate | None:
    """Search for ``d`` with ``a_i = d * b_i``, integer ``|b_i| <= B``, off few exceptions.

    Candidates are ``a_s / t`` for ``t = 1..B`` over the first distinct nonzero
    values ``a_s`` (capped sample).  The fit with fewest exceptions wins, then
    smaller ``max |b_i|``, then smaller height of ``d``.  A heuristic: it is
    complete only when some ``a_s`` with ``|b_s| <= B`` is in the sample.
    The returned certificate is verified exactly.
    """
    if B < 1:
        raise InvalidArgument("B must be >= 1")
    vals = [as_gaussian(a) for a in coeffs]
    n = len(vals)
    scale = 1
    for z in vals:
        scale = math.lcm(scale, z.re.denominator, z.im.denominator)
    re = [int(z.re * scale) for z in vals]
    im = [int(z.im * scale) for z in vals]
    sample = []
    seen = set()
    for x, y in zip(re, im):
        if (x or y) and (x, y) not in seen:
            seen.add((x, y))
            sample.append((x, y))
            if len(sample) >= GAP_SAMPLE_CAP:
                break
    if not sample:
        return None
    big = max(abs(v) for v in re + im)
    dtype = np.int64 if 2 * big * big * B < _INT64_SAFE else object
    R = np.array(re, dtype=dtype)
    I = np.array(im, dtype=dtype)
    best = None
    for sr, si in sample:
        # a_i * conj(s) = P + iQ; b_i = t * a_i / s = t * (P + iQ) / |s|^2
        P = R * sr + I * si
        Q = I * sr - R * si
        N = sr * sr + si * si
        real = Q == 0
        for t in range(1, B + 1):
            num = P * t
            ok = real & (num % N == 0)
            b = np.where(ok, num // N, 0)
            ok &= np.abs(b) <= B
            exc = n - int(np.count_nonzero(ok))
            if exc > max_exceptions:
                continue
            d = GaussianRational(Fraction(sr, scale * t), Fraction(si, scale * t))
            if d.re < 0 or (d.re == 0 and d.im < 0):
                d = -d
                b = -b
            maxb = int(np.abs(b[ok]).max()) if ok.any() else 0
            key = (exc, maxb, gaussian_height(d), d.re, d.im)
            if best is None or key < best[0]:
                coords = {i: int(b[i]) for i in range(n) if ok[i]}
                bad = tuple(i for i in range(n) if not ok[i])
                best = (key, d, coords, bad)
    if best is None:
        return None
    _, d, coords, bad = best
    cert = GAPCertificate(d, coords, B, bad)
    if not cert.verify(vals):
        raise CertificateError("gap_fit produced an invalid certificate")
    return cert


# ---------------------------------------------------------------------------
# dense principal minors

def dense_principal_minor(Q: QuadraticForm, threshold: int) -> tuple:
    """Indices surviving k-core peeling of the off-diagonal nonzero pattern."""
    if threshold < 0:
        raise InvalidArgument("threshold must be >= 0")
    n = Q.n
    adj = [{j for j in range(n) if j != i and not as_gaussian(Q.matrix[i][j]).is_zero()}
           for i in range(n)]
    alive = set(range(n))
    deg = {i: len(adj[i]) for i in alive}
    stack = [i for i in alive if deg[i] < threshold]
    removed = set()
    while stack:
        i = stack.pop()
        if i in removed:
            continue
        removed.add(i)
        for j in adj[i]:
            if j not in removed:
                deg[j] -= 1
                if deg[j] < threshold:
                    stack.append(j)
    return tuple(sorted(alive - removed))


# ---------------------------------------------------------------------------
# low-height values of Mobius maps

def low_height_scan(a: int, b: int, c: int, d: int, n: int, q: int):
    """``(count, skipped)``: z in 1..n with height((az+b)/(cz+d)) <= q, and poles skipped."""
    if a * d == b * c:
        raise DegenerateMap("ad == bc: the map is constant")
    if n < 0 or q < 0:
        raise InvalidArgument("n and q must be nonnegative")
    if n == 0:
        return 0, ()
    bound = max(abs(a), abs(c)) * n + max(abs(b), abs(d))
    if bound < _INT64_SAFE:
        z = np.arange(1, n + 1, dtype=np.int64)
        num = a * z + b
        den = c * z + d
        pole = den == 0
        skipped = tuple(int(x) for x in z[pole])
        num, den = num[~pole], den[~pole]
        g = np.gcd(num, den)
        h = np.maximum(np.abs(num // g), np.abs(den // g))
        return int(np.count_nonzero(h <= q)), skipped
    count, skipped = 0, []
    for z in range(1, n + 1):
        den = c * z + d
        if den == 0:
            skipped.append(z)
            continue
        f = Fraction(a * z + b, den)
        if max(abs(f.numerator), f.denominator) <= q:
            count += 1
    return count, tuple(skipped)


def count_low_height(a: int, b: int, c: int, d: int, n: int, q: int) -> int:
    """Number of z in 1..n with ``(az+b)/(cz+d)`` of height at most q (poles skipped)."""
    return low_height_scan(a, b, c, d, n, q)[0]
