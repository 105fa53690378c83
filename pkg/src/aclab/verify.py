"""Property suites over fixed seeded corpora.

Each suite returns a :class:`SuiteResult` with one row per case; the CLI
``verify`` command and the acceptance tests both run these.  Corpora are
derived from ``CORPUS_SEED`` through named substreams, so every run sees the
same instances.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import oracle
from .bounds import (bilo_bound, bilo_bound_holds, halasz_bound_report, lo_bound_holds)
from .config import (C_HALASZ, C_ST, DEFAULT_BUDGET, HEIGHT_RATIO_FROZEN, Budget)
from .decouple import (decoupling_check, equal_splits, is_balanced, reduction_check,
                       shatter_build, shatter_family_size, shatter_verify)
from .dist import (bilinear_conditional_concentration, concentration, linear_distribution,
                   quadratic_concentration)
from .errors import ShatterFailure
from .forms import (RADEMACHER, AtomDistribution, BilinearForm, LinearForm, QuadraticForm,
                    gen_extremal_bilinear, gen_near_multiple_tuple, gen_planted_rank_one,
                    gen_random_bilinear, gen_random_linear, gen_random_symmetric,
                    quadratic_from_square)
from .incidence import build_point_line, incidence_probability, incidence_report
from .rng import substream
from .scalars import format_rational
from .structure import count_low_height, expected_commensurability, rank_one_extract, tuple_structure

CORPUS_SEED = 20240917

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all", "CORPUS_SEED"]


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.cases > 0 and not self.failures

    def record(self, ok: bool, label: str, **row):
        self.cases += 1
        row = {"suite": self.name, "case": label, "pass": bool(ok), **row}
        self.rows.append(row)
        if not ok:
            self.failures.append(label)

    def summary(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "cases": self.cases,
                "failures": len(self.failures), "first_failures": self.failures[:5],
                "metrics": {k: _fmt(v) for k, v in sorted(self.metrics.items())}}


def _fmt(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    return v


def _case_seed(seed: int, label: str, i: int) -> int:
    return int(substream(seed, label, i).integers(0, 2 ** 62))


def _timed(fn):
    def wrapper(seed: int = CORPUS_SEED, budget: Budget | None = None) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(seed, budget or DEFAULT_BUDGET)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------

@_timed
def suite_lo(seed, budget):
    """All-equal coefficients hit C(n, n/2)/2^n; random vectors obey min(1/2, 1/sqrt(m))."""
    res = SuiteResult("lo")
    for n in range(2, 17, 2):
        sup = concentration(linear_distribution(LinearForm([1] * n), budget)).sup_prob
        want = Fraction(math.comb(n, n // 2), 2 ** n)
        res.record(sup == want, f"equal n={n}", n=n, prob=format_rational(sup),
                   expected=format_rational(want))
    worst = Fraction(0)
    for n in (4, 8, 12):
        for i in range(500):
            f = gen_random_linear(n, _case_seed(seed, "verify.lo", n * 1000 + i))
            sup = concentration(linear_distribution(f, budget)).sup_prob
            m = f.m
            ok = lo_bound_holds(sup, m)
            worst = max(worst, sup * sup * m)
            res.record(ok, f"random n={n} #{i}", n=n, m=m, prob=format_rational(sup),
                       ratio=float(sup * sup * m))
    res.metrics["max_p2m"] = worst
    return res


@_timed
def suite_bilo(seed, budget):
    """All-ones matrices are extremal; random matrices with row weight >= r obey bilo_bound(r)."""
    res = SuiteResult("bilo")
    for n in range(2, 13, 2):
        rep = bilinear_conditional_concentration(gen_extremal_bilinear(n, n), budget=budget)
        p = rep.target_prob
        q = Fraction(math.comb(n, n // 2), 2 ** n)
        want = 1 - (1 - q) ** 2
        ok = p == want and 4 * p * p * n >= 1
        res.record(ok, f"extremal n={n}", n=n, prob=format_rational(p), expected=format_rational(want),
                   ratio=float(p) * math.sqrt(n))
    worst = 0.0
    for i in range(200):
        rng = substream(seed, "verify.bilo", i)
        n = int(rng.integers(1, 11))
        m = int(rng.integers(1, 11))
        r = int(rng.integers(1, min(8, n) + 1))
        B = gen_random_bilinear(m, n, r, _case_seed(seed, "verify.bilo.form", i))
        rr = B.r
        sup = bilinear_conditional_concentration(B, budget=budget).sup_prob
        ok = bilo_bound_holds(sup, rr)
        worst = max(worst, float(sup) / bilo_bound(rr))
        res.record(ok, f"random #{i}", m=m, n=n, r=rr, prob=format_rational(sup),
                   bound=bilo_bound(rr), ratio=float(sup) / bilo_bound(rr))
    res.metrics["max_prob_over_bound"] = worst
    return res


@_timed
def suite_decouple(seed, budget):
    """P(E)^2 <= P(E and E') on 10^4 random event tables over at most 12 variables."""
    res = SuiteResult("decouple")
    lazy = AtomDistribution.lazy_walker(Fraction(1, 4))
    worst = Fraction(0)
    for i in range(10_000):
        rng = substream(seed, "verify.decouple", i)
        total = int(rng.integers(2, 13))
        ny = int(rng.integers(1, total))
        nz = total - ny
        atom = RADEMACHER if i % 4 else lazy
        k = len(atom.support)
        if k ** total > 1 << 13:
            atom = RADEMACHER
            k = 2
        density = rng.random()
        table = rng.random((k ** ny, k ** nz)) < density
        out = decoupling_check(table, ([atom] * ny, [atom] * nz))
        if out.rhs:
            worst = max(worst, out.lhs / out.rhs)
        res.record(out.holds, f"table #{i}", ny=ny, nz=nz, lhs=format_rational(out.lhs),
                   rhs=format_rational(out.rhs))
    res.metrics["max_lhs_over_rhs"] = worst
    return res


@_timed
def suite_quad(seed, budget):
    """sup_c P_c^2 <= P(E and E') <= P(decoupled bilinear event) for every balanced equal split."""
    res = SuiteResult("quad")
    splits = 0
    for i in range(100):
        rng = substream(seed, "verify.quad", i)
        n = int(rng.integers(2, 11))
        Q = gen_random_symmetric(n, _case_seed(seed, "verify.quad.form", i))
        ok_all = True
        count = 0
        for p in equal_splits(n):
            if not is_balanced(Q, p, 1):
                continue
            out = reduction_check(Q, p, budget)
            count += 1
            if not out.holds:
                ok_all = False
        splits += count
        res.record(ok_all, f"form #{i}", n=n, balanced_splits=count)
    res.metrics["splits_checked"] = splits
    return res


@_timed
def suite_rank1(seed, budget):
    """Planted rank-one blocks are recovered with the expected row/column accounting."""
    res = SuiteResult("rank1")
    for i in range(200):
        rng = substream(seed, "verify.rank1", i)
        c = int(rng.integers(0, 3))
        m = int(rng.integers(c + 2, 13))
        n = int(rng.integers(2 * c + 2, 13))
        B, truth = gen_planted_rank_one(m, n, c, 0, _case_seed(seed, "verify.rank1.form", i))
        trace: list = []
        cert = rank_one_extract(B, trace=trace)
        valid = cert.verify(B.matrix) and oracle.is_rank_one(B.matrix, cert.rows, cert.cols)
        rows, cols = cert.shape
        ok = valid and rows >= m - c and cols >= n - 2 * c
        res.record(ok, f"planted #{i}", m=m, n=n, corrupted=c, rows=rows, cols=cols,
                   demotions=len(trace))
    return res


@_timed
def suite_heights(seed, budget):
    """count_low_height agrees with brute force; count/(q n^(1/4)) stays under the frozen value."""
    res = SuiteResult("heights")
    n = 10 ** 4
    root = 10  # n ** (1/4), exact
    worst = Fraction(0)
    for i in range(100):
        rng = substream(seed, "verify.heights", i)
        while True:
            a, b, c, d = (int(x) for x in rng.integers(-50, 51, size=4))
            if a * d != b * c:
                break
        q = int(rng.integers(1, 101))
        got = count_low_height(a, b, c, d, n, q)
        want = oracle.low_height_count(a, b, c, d, n, q)
        ratio = Fraction(got, q * root)
        worst = max(worst, ratio)
        res.record(got == want, f"map #{i}", a=a, b=b, c=c, d=d, q=q, count=got, oracle=want,
                   ratio=float(ratio))
    res.metrics["max_ratio"] = worst
    res.metrics["frozen"] = HEIGHT_RATIO_FROZEN
    if worst > HEIGHT_RATIO_FROZEN:
        res.failures.append(f"max ratio {worst} above frozen {HEIGHT_RATIO_FROZEN}")
    return res


@_timed
def suite_shatter(seed, budget):
    """Sampled families of the stated size shatter within 50 attempts in >= 95% of seeds."""
    res = SuiteResult("shatter")
    for n in (8, 12, 16):
        Q = QuadraticForm([[0 if i == j else 1 for j in range(n)] for i in range(n)])
        wins = 0
        size = shatter_family_size(n)
        for s in range(20):
            try:
                fam = shatter_build(Q, 2, _case_seed(seed, "verify.shatter", n * 100 + s))
            except ShatterFailure:
                res.rows.append({"suite": "shatter", "case": f"n={n} seed #{s}", "pass": False})
                continue
            ok = len(fam) == size and shatter_verify(n, fam) is None
            wins += ok
            res.rows.append({"suite": "shatter", "case": f"n={n} seed #{s}", "pass": ok,
                             "size": len(fam)})
        res.cases += 1
        res.metrics[f"success_n{n}"] = wins / 20
        if wins < 19:
            res.failures.append(f"n={n}: {wins}/20 successes")
    return res


@_timed
def suite_incidence(seed, budget):
    """Point/line incidence equals the quadratic event; Szemeredi-Trotter ratio under C_st."""
    res = SuiteResult("incidence")
    worst = 0.0
    for i in range(100):
        rng = substream(seed, "verify.incidence", i)
        m = int(rng.integers(2, 15))
        b = [int(v) for v in rng.integers(1, 4, size=m) * rng.choice([-1, 1], size=m)]
        c = [int(v) for v in rng.integers(-3, 4, size=m)]
        d = int(rng.integers(-4, 10))
        model = build_point_line(b, c, d)
        p = incidence_probability(model)
        direct = quadratic_concentration(quadratic_from_square(b, c, d), budget).target_prob
        rep = incidence_report(model)
        worst = max(worst, rep.ratio)
        res.record(p == direct and rep.passes, f"model #{i}", m=m, prob=format_rational(p),
                   direct=format_rational(direct), ratio=rep.ratio)
    res.metrics["max_st_ratio"] = worst
    res.metrics["C_st"] = C_ST
    return res


def halasz_corpus(seed: int = CORPUS_SEED):
    """Fixed 200-instance corpus: (coeffs, k)."""
    out = []
    for i in range(200):
        rng = substream(seed, "verify.halasz", i)
        n = int(rng.integers(1, 15))
        k = 1 + i % 2
        kind = (i // 2) % 5
        if kind == 0:
            v = int(rng.integers(1, 6))
            coeffs = [v] * n
        elif kind == 1:
            coeffs = [int(x) for x in rng.integers(1, 4, size=n) * rng.choice([-1, 1], size=n)]
        elif kind == 2:
            coeffs = [int(x) for x in rng.integers(1, 21, size=n) * rng.choice([-1, 1], size=n)]
        elif kind == 3:
            coeffs = [2 ** j for j in range(n)]
        else:
            coeffs = [Fraction(int(p), int(q)) for p, q in
                      zip(rng.integers(1, 7, size=n) * rng.choice([-1, 1], size=n),
                          rng.integers(1, 5, size=n))]
        out.append((coeffs, k))
    return out


@_timed
def suite_halasz(seed, budget):
    """sup_c P * n^(2k+1/2) / R_k stays under the frozen C_halasz."""
    res = SuiteResult("halasz")
    worst = 0.0
    for i, (coeffs, k) in enumerate(halasz_corpus(seed)):
        rep = halasz_bound_report(LinearForm(coeffs), k, budget=budget)
        worst = max(worst, rep.ratio)
        res.record(rep.passes, f"instance #{i}", n=len(coeffs), k=k, prob=format_rational(rep.prob),
                   R_k=rep.details["R_k"], ratio=rep.ratio)
    res.metrics["max_ratio"] = worst
    res.metrics["C_halasz"] = C_HALASZ
    return res


def _planted_tuple(rng, seed, i):
    n = int(rng.integers(6, 11))
    k = int(rng.integers(2, 5))
    mults = [int(rng.integers(1, 4)) * int(rng.choice([-1, 1])) for _ in range(k - 1)]
    cap = max(1, (n - 1) // 3)
    sets = []
    for _ in range(k - 1):
        size = int(rng.integers(0, cap + 1))
        sets.append(frozenset(int(x) for x in rng.choice(n, size=size, replace=False)))
    rows = gen_near_multiple_tuple(n, mults, [sorted(s) for s in sets], _case_seed(seed, "verify.tuple.rows", i))
    return rows, mults, sets


def _expected_score(sets):
    union: set = set()
    score, metric = 0, 1
    for S in sets:
        new = S - union
        if new:
            score += 1
        metric *= 1 if not new else min(len(new), 4)
        union |= S
    return score, metric


@_timed
def suite_tuple(seed, budget):
    """Planted near-multiple tuples are recovered; expected commensurability matches enumeration."""
    res = SuiteResult("tuple")
    for i in range(40):
        rng = substream(seed, "verify.tuple", i)
        rows, mults, sets = _planted_tuple(rng, seed, i)
        ts = tuple_structure(rows)
        score, metric = _expected_score(sets)
        ok = (list(ts.ratios) == [Fraction(1, c) for c in mults]
              and list(ts.sets) == list(sets) and ts.score == score and ts.product_metric == metric)
        res.record(ok, f"planted #{i}", n=len(rows[0]), k=len(rows), score=ts.score)
    for i in range(40):
        rng = substream(seed, "verify.comm", i)
        k = int(rng.integers(1, 4))
        n = int(rng.integers(2, 11))
        if i % 2:
            base = [int(x) for x in rng.integers(1, 4, size=n) * rng.choice([-1, 1], size=n)]
            rows = [[int(rng.integers(1, 4)) * x for x in base] for _ in range(k)]
            for row in rows[1:]:
                row[int(rng.integers(0, n))] += 1
        else:
            rows = [[int(x) for x in rng.integers(-3, 4, size=n)] for _ in range(k)]
            if not any(rows[0]):
                rows[0][0] = 1
        r = [16, 100, 10 ** 4][i % 3]
        eps = [Fraction(1, 4), Fraction(1, 8), Fraction(1, 3)][(i // 3) % 3]
        mode = "comm" if (i // 9) % 2 == 0 else "comm_star"
        got = expected_commensurability(rows, RADEMACHER, r, eps, mode, budget)
        want = oracle.expected_comm(rows, RADEMACHER, r, eps, mode)
        ok = (got.rational_part, got.floor_mass) == want
        res.record(ok, f"comm #{i}", n=n, k=k, r=r, eps=format_rational(eps), mode=mode,
                   value=got.value, neighborly=got.is_neighborly)
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "lo": suite_lo,
    "bilo": suite_bilo,
    "decouple": suite_decouple,
    "quad": suite_quad,
    "rank1": suite_rank1,
    "heights": suite_heights,
    "shatter": suite_shatter,
    "incidence": suite_incidence,
    "halasz": suite_halasz,
    "tuple": suite_tuple,
}


def run_suite(name: str, seed: int = CORPUS_SEED, budget: Budget | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed, budget)


def run_all(seed: int = CORPUS_SEED, budget: Budget | None = None) -> list:
    return [fn(seed, budget) for fn in SUITES.values()]
