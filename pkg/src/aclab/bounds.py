"""Closed-form concentration bounds and the counting quantities behind them.

Bounds with an explicit constant are compared exactly against rational
probabilities (cross-multiplied integer comparisons, never floats).  Bounds
stated only up to a constant are checked as ratios against constants frozen
in :mod:`aclab.config`; the pass/fail decision is again exact.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import C_HALASZ, C_HALASZ_2D, C_ST, DEFAULT_BUDGET, MAX_ENUM_DIM, Budget
from .dist import (ValueDistribution, _Codec, _check_enum, _fast_atom, _grid_block, _blocks,
                   _run_blocks, _weight_dtype, concentration, joint_distribution,
                   linear_distribution)
from .errors import BudgetExceeded, InvalidArgument
from .forms import ZERO, BilinearForm, LinearForm
from .scalars import GaussianRational, as_gaussian, format_rational

__all__ = [
    "BoundReport",
    "lo_bound",
    "lo_bound_holds",
    "bilo_bound",
    "bilo_bound_holds",
    "row_zero_count_distribution",
    "halasz_rk",
    "halasz_bound_report",
    "joint_multiplicity",
    "subspace_deficiency_2d",
    "halasz2d_report",
    "st_incidence_report",
    "incidence_mass",
]


def _num(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    return x


@dataclass(frozen=True)
class BoundReport:
    """Outcome of comparing a probability with a bound.

    Absolute bounds pass when ``prob <= bound_value``; fitted-constant bounds
    pass when ``ratio <= constant``.  ``passes`` is always decided exactly.
    """

    bound_name: str
    bound_value: float
    prob: Fraction | float
    ratio: float
    passes: bool
    constant: float | None = None
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "bound_name": self.bound_name,
            "bound_value": self.bound_value,
            "prob": _num(self.prob),
            "ratio": self.ratio,
            "passes": self.passes,
            "constant": self.constant,
            "details": {k: _num(v) for k, v in sorted(self.details.items())},
        }


# ---------------------------------------------------------------------------
# explicit bounds

def lo_bound(m: int) -> float:
    """``min(1/2, 1/sqrt(m))``; use :func:`lo_bound_holds` for exact checks."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    return min(0.5, 1 / math.sqrt(m))


def lo_bound_holds(p, m: int) -> bool:
    """Exact ``p <= min(1/2, 1/sqrt(m))``, i.e. ``p <= 1/2`` and ``p*p*m <= 1``."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    p = Fraction(p)
    return p <= Fraction(1, 2) and p * p * m <= 1


def bilo_bound(r: int) -> float:
    """``min(1, 4/sqrt(r) + sqrt(4/(3r)))``.

    The first term is the Markov step on the number of vanishing ``W_i`` (mean
    at most ``r/sqrt(r)``, threshold ``r/4``); the second is the linear bound
    with at least ``3r/4`` nonzero coefficients.
    """
    if r < 1:
        raise InvalidArgument("r must be >= 1")
    return min(1.0, 4 / math.sqrt(r) + math.sqrt(4 / (3 * r)))


def bilo_bound_holds(p, r: int) -> bool:
    """Exact ``p <= min(1, (4 + 2/sqrt(3)) / sqrt(r))``.

    Squares to ``p^2 r - 52/3 <= 16/sqrt(3)`` and squares again when the left
    side is positive.
    """
    if r < 1:
        raise InvalidArgument("r must be >= 1")
    p = Fraction(p)
    if p > 1:
        return False
    lhs = p * p * r - Fraction(52, 3)
    return lhs <= 0 or lhs * lhs <= Fraction(256, 3)


# ---------------------------------------------------------------------------
# counting quantities

def row_zero_count_distribution(B: BilinearForm, rows, budget: Budget | None = None) -> ValueDistribution:
    """Exact law of ``#{i in rows : (A y)_i = 0}`` over the y atom."""
    budget = budget or DEFAULT_BUDGET
    rows = sorted(set(rows))
    m, n = B.shape
    if any(not 0 <= i < m for i in rows):
        raise InvalidArgument("row index out of range")
    if n > MAX_ENUM_DIM:
        raise BudgetExceeded("y-dimension too large for enumeration", n, MAX_ENUM_DIM)
    sub = [B.matrix[i] for i in rows]
    atom = B.y_atom
    if _fast_atom(atom) and rows:
        yv, yw, yden = atom.int_support()
        size = _check_enum([len(yv)] * n, budget, "y assignments")
        codec = _Codec.build([([a for r in sub for a in r], max(abs(v) for v in yv))])
        if codec.fits:
            A = codec.encode_grid(sub)
            wdt = _weight_dtype(yden ** n)

            def block(s, e):
                Y, w = _grid_block(yv, yw, n, s, e, wdt)
                zeros = np.count_nonzero((Y @ A.T) == 0, axis=1)
                out = [0] * (len(rows) + 1)
                for k in range(len(rows) + 1):
                    out[k] = int(w[zeros == k].sum())
                return out

            counts = [0] * (len(rows) + 1)
            for part in _run_blocks(block, _blocks(size), budget.threads):
                counts = [a + b for a, b in zip(counts, part)]
            total = yden ** n
            return ValueDistribution._trusted(
                {k: Fraction(c, total) for k, c in enumerate(counts) if c})
    _check_enum([len(atom.support)] * n, budget, "y assignments")
    law: dict = defaultdict(Fraction)
    for combo in itertools.product(atom.support, repeat=n):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        y = [v for v, _ in combo]
        k = sum(1 for r in sub if sum((a * b for a, b in zip(r, y)), ZERO).is_zero())
        law[k] += p
    return ValueDistribution._trusted(dict(law))


def _ksum_counts(base: dict, k: int, cap: int) -> dict:
    """Ordered k-tuple counts by (vector) sum; keys are integer tuples."""
    width = len(next(iter(base)))
    acc = {(0,) * width: 1}
    for _ in range(k):
        out: dict = defaultdict(int)
        for ka, ca in acc.items():
            for kb, cb in base.items():
                out[tuple(x + y for x, y in zip(ka, kb))] += ca * cb
        acc = dict(out)
        if len(acc) > cap:
            raise BudgetExceeded("k-sum support too large", len(acc), cap)
    return acc


def _scaled_keys(values):
    codec = _Codec.build([(values, 1)])
    return [(int(as_gaussian(v).re * codec.scale), int(as_gaussian(v).im * codec.scale))
            for v in values]


def halasz_rk(coeffs: Sequence, k: int, budget: Budget | None = None) -> int:
    """Number of ordered 2k-tuples of indices whose two k-sums agree.

    Computed as ``sum_s N_k(s)^2`` where ``N_k`` counts ordered k-tuples by sum,
    obtained by k-fold convolution of the value multiplicities.
    """
    budget = budget or DEFAULT_BUDGET
    n = len(coeffs)
    if n < 1 or k < 1:
        raise InvalidArgument("need n >= 1 and k >= 1")
    if n ** k > budget.ksum_cap:
        raise BudgetExceeded("k-sum space too large", n ** k, budget.ksum_cap)
    base = Counter(_scaled_keys(coeffs))
    nk = _ksum_counts(dict(base), k, budget.support_cap)
    return sum(c * c for c in nk.values())


def joint_multiplicity(a: Sequence, b: Sequence, j: int, budget: Budget | None = None) -> int:
    """Largest number of ordered j-tuples sharing both their a-sum and b-sum."""
    budget = budget or DEFAULT_BUDGET
    if len(a) != len(b):
        raise InvalidArgument("a and b must have equal length")
    n = len(a)
    if n < 1 or j < 1:
        raise InvalidArgument("need n >= 1 and j >= 1")
    if n ** j > budget.ksum_cap:
        raise BudgetExceeded("j-sum space too large", n ** j, budget.ksum_cap)
    ka, kb = _scaled_keys(a), _scaled_keys(b)
    base = Counter((x[0], x[1], y[0], y[1]) for x, y in zip(ka, kb))
    return max(_ksum_counts(dict(base), j, budget.support_cap).values())


def _direction(v):
    x, y = as_gaussian(v[0]), as_gaussian(v[1])
    if not x.is_zero():
        return (GaussianRational(1), y / x)
    if not y.is_zero():
        return (ZERO, GaussianRational(1))
    return None


def subspace_deficiency_2d(vectors: Sequence) -> int:
    """``n`` minus the most vectors on one line through the origin.

    Zero vectors lie on every line.
    """
    n = len(vectors)
    dirs = [_direction(v) for v in vectors]
    zeros = sum(1 for d in dirs if d is None)
    groups = Counter(d for d in dirs if d is not None)
    best = max(groups.values(), default=0)
    return n - (best + zeros)


def halasz_bound_report(f: LinearForm, k: int, constant=C_HALASZ,
                        budget: Budget | None = None) -> BoundReport:
    """Ratio ``sup_c P * n^(2k+1/2) / R_k`` against a fitted constant."""
    budget = budget or DEFAULT_BUDGET
    if any(a.is_zero() for a in f.coeffs):
        raise InvalidArgument("halasz_bound_report needs all coefficients nonzero")
    n = f.n
    sup = concentration(linear_distribution(f, budget)).sup_prob
    rk = halasz_rk(f.coeffs, k, budget)
    bound = rk / n ** (2 * k + 0.5)
    ratio = float(sup * n ** (2 * k)) * math.sqrt(n) / rk
    c = Fraction(constant)
    lhs = sup * n ** (2 * k)
    passes = lhs * lhs * n <= (c * rk) ** 2
    return BoundReport("halasz", bound, sup, ratio, passes, float(constant),
                       {"n": n, "k": k, "R_k": rk})


def halasz2d_report(vectors: Sequence, atom=None, constant=C_HALASZ_2D,
                    budget: Budget | None = None) -> BoundReport:
    """Two-dimensional sums ``sum_i v_i x_i``: ratio ``sup_c P * m`` with ``m`` the subspace deficiency."""
    from .forms import RADEMACHER
    atom = atom or RADEMACHER
    m = subspace_deficiency_2d(vectors)
    if m < 1:
        raise InvalidArgument("all vectors lie on one line; deficiency is 0")
    forms = [LinearForm([v[0] for v in vectors], atom), LinearForm([v[1] for v in vectors], atom)]
    sup = concentration(joint_distribution(forms, budget)).sup_prob
    c = Fraction(constant)
    return BoundReport("halasz2d", 1 / m, sup, float(sup * m), sup * m <= c, float(constant),
                       {"n": len(vectors), "m": m})


# ---------------------------------------------------------------------------
# incidences

def incidence_mass(point_dist: ValueDistribution, line_dist: ValueDistribution) -> Fraction:
    """Exact ``P(p on l)`` for independent points ``(x, y)`` and lines ``(slope, intercept)``."""
    by_x: dict = defaultdict(dict)
    for (x, y), p in point_dist.support.items():
        by_x[as_gaussian(x)][as_gaussian(y)] = p
    total = Fraction(0)
    for (s, t), q in line_dist.support.items():
        s, t = as_gaussian(s), as_gaussian(t)
        acc = Fraction(0)
        for x, ys in by_x.items():
            p = ys.get(s * x + t)
            if p is not None:
                acc += p
        total += q * acc
    return total


def st_incidence_report(point_dist: ValueDistribution, line_dist: ValueDistribution,
                        constant=C_ST) -> BoundReport:
    """Incidence probability against ``(q_p q_l)^(1/3) + q_p + q_l``.

    ``q_p``, ``q_l`` are the largest point and line masses.  Passes when
    ``P <= C * term``, decided exactly by cubing.
    """
    prob = incidence_mass(point_dist, line_dist)
    qp = max(point_dist.support.values())
    ql = max(line_dist.support.values())
    term = float(qp * ql) ** (1 / 3) + float(qp) + float(ql)
    c = Fraction(constant)
    rest = prob / c - qp - ql
    passes = rest <= 0 or rest ** 3 <= qp * ql
    return BoundReport("szemeredi_trotter", term, prob, float(prob) / term, passes, float(constant),
                       {"q_p": qp, "q_l": ql})
