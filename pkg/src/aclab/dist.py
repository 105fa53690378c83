"""Exact laws of linear, bilinear, quadratic and multilinear forms.

Fast path
---------
When every atom takes integer values (Rademacher, lazy walker, the
difference atom ``{0, +-2}``), coefficients are scaled to Gaussian integers by
a common denominator ``D`` and packed into one integer per value,

    code(re + im*i) = re * M + im,      M = 2 * B_im + 1,

where ``B_im`` bounds the imaginary part of every partial sum.  The packing is
additive and commutes with multiplication by integers, so sums can be
accumulated on plain ``int64`` arrays (or object arrays of Python ints when
the bounds do not fit) and decoded exactly at the end.  Probabilities are
carried as integer weights over a known power of the atom's denominator.

Other atoms go through a dictionary DP on :class:`GaussianRational` values.
No floating point is used anywhere except in Monte Carlo estimates.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .config import BLOCK_ROWS, DEFAULT_BUDGET, MAX_ENUM_DIM, Budget
from .errors import BudgetExceeded, InvalidArgument
from .forms import (RADEMACHER, ZERO, AtomDistribution, BilinearForm, LinearForm,
                    MultilinearForm, QuadraticForm, TargetFunction)
from .rng import substream
from .scalars import GaussianRational, as_gaussian, format_rational, gaussian_to_json

__all__ = [
    "ValueDistribution",
    "ConcentrationReport",
    "linear_distribution",
    "concentration",
    "bilinear_conditional_concentration",
    "bilinear_distribution",
    "quadratic_concentration",
    "quadratic_distribution",
    "multilinear_concentration",
    "joint_distribution",
    "monte_carlo_probability",
    "wilson_halfwidth",
]

_INT64_SAFE = 1 << 62


# ---------------------------------------------------------------------------
# result types

def _value_sort_key(v):
    if isinstance(v, GaussianRational):
        return (0, v.re, v.im)
    if isinstance(v, tuple):
        return (1, tuple(_value_sort_key(x) for x in v))
    return (0, Fraction(v), Fraction(0))


def _value_json(v):
    if isinstance(v, GaussianRational):
        return gaussian_to_json(v)
    if isinstance(v, tuple):
        return [_value_json(x) for x in v]
    return int(v)


@dataclass(frozen=True)
class ValueDistribution:
    """Finite law: value -> positive Fraction, summing to exactly 1."""

    support: dict

    def __post_init__(self):
        sup = {k: Fraction(p) for k, p in dict(self.support).items()}
        if any(p <= 0 for p in sup.values()):
            raise InvalidArgument("probabilities must be positive")
        if sum(sup.values()) != 1:
            raise InvalidArgument("probabilities must sum to exactly 1")
        object.__setattr__(self, "support", sup)

    @classmethod
    def _trusted(cls, support: dict) -> "ValueDistribution":
        obj = object.__new__(cls)
        object.__setattr__(obj, "support", support)
        return obj

    def __len__(self):
        return len(self.support)

    def prob(self, value) -> Fraction:
        return self.support.get(value, Fraction(0))

    def items(self):
        return sorted(self.support.items(), key=lambda kv: _value_sort_key(kv[0]))

    def total(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def mean(self):
        return sum((as_gaussian(v) * p for v, p in self.support.items()), ZERO)

    def to_json(self):
        return [{"value": _value_json(v), "prob": format_rational(p)} for v, p in self.items()]

    def to_csv_rows(self):
        from .scalars import format_gaussian
        rows = []
        for v, p in self.items():
            if isinstance(v, tuple):
                val = " ".join(format_gaussian(as_gaussian(x)) for x in v)
            else:
                val = format_gaussian(as_gaussian(v))
            rows.append((val, format_rational(p)))
        return rows


@dataclass(frozen=True)
class ConcentrationReport:
    """``sup_prob`` is the largest point mass; ``target_prob`` is P(form = target).

    For non-constant targets the sup over constants is not defined and
    ``sup_prob`` repeats ``target_prob`` with empty ``argmax_values``.
    """

    sup_prob: Fraction
    argmax_values: tuple
    method: str = "exact"
    sample_count: int | None = None
    ci_halfwidth: float | None = None
    target_prob: Fraction | None = None

    def __post_init__(self):
        if self.method not in ("exact", "monte_carlo"):
            raise InvalidArgument(f"unknown method {self.method!r}")
        if self.method == "exact" and (self.sample_count is not None or self.ci_halfwidth is not None):
            raise InvalidArgument("exact reports carry no CI fields")

    def to_json(self):
        out = {
            "method": self.method,
            "sup_prob": format_rational(self.sup_prob) if isinstance(self.sup_prob, Fraction)
            else self.sup_prob,
            "argmax_values": [_value_json(v) for v in self.argmax_values],
        }
        if self.target_prob is not None:
            out["target_prob"] = format_rational(self.target_prob)
        if self.sample_count is not None:
            out["sample_count"] = self.sample_count
            out["ci_halfwidth"] = self.ci_halfwidth
        return out


def concentration(d: ValueDistribution) -> ConcentrationReport:
    top = max(d.support.values())
    arg = tuple(sorted((v for v, p in d.support.items() if p == top), key=_value_sort_key))
    return ConcentrationReport(top, arg)


# ---------------------------------------------------------------------------
# integer packing

class _Codec:
    """Injective additive packing of scaled Gaussian integers into one integer."""

    def __init__(self, scale: int, re_bound: int, im_bound: int):
        self.scale = scale
        self.im_bound = im_bound
        self.modulus = 2 * im_bound + 1
        self.max_code = re_bound * self.modulus + im_bound
        self.fits = self.max_code < _INT64_SAFE
        self.dtype = np.int64 if self.fits else object

    @classmethod
    def build(cls, groups):
        """``groups``: iterable of (values, multiplier bound); bounds add up."""
        groups = [([as_gaussian(v) for v in vals], int(mult)) for vals, mult in groups]
        scale = 1
        for vals, _ in groups:
            for v in vals:
                scale = math.lcm(scale, v.re.denominator, v.im.denominator)
        re_b = im_b = 0
        for vals, mult in groups:
            for v in vals:
                re_b += abs(int(v.re * scale)) * mult
                im_b += abs(int(v.im * scale)) * mult
        return cls(scale, re_b, im_b)

    def encode(self, z) -> int:
        z = as_gaussian(z)
        re, im = z.re * self.scale, z.im * self.scale
        if re.denominator != 1 or im.denominator != 1:
            raise InvalidArgument("value not representable at codec scale")
        return int(re) * self.modulus + int(im)

    def encode_array(self, values):
        return np.array([self.encode(v) for v in values], dtype=self.dtype)

    def encode_grid(self, rows):
        return np.array([[self.encode(v) for v in r] for r in rows], dtype=self.dtype)

    def decode(self, code) -> GaussianRational:
        code = int(code)
        im = (code + self.im_bound) % self.modulus - self.im_bound
        re = (code - im) // self.modulus
        return GaussianRational(Fraction(re, self.scale), Fraction(im, self.scale))


def _merge(keys, w):
    """Sum weights of equal keys; returns sorted unique keys."""
    if len(keys) == 0:
        return keys, w
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    ww = w[order]
    starts = np.flatnonzero(np.concatenate(([True], k[1:] != k[:-1])))
    return k[starts], np.add.reduceat(ww, starts)


def _merge_rows(keys2d, w):
    uniq, inv = np.unique(keys2d, axis=0, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=w.dtype)
    np.add.at(acc, inv.reshape(-1), w)
    return uniq, acc


def _fast_atom(atom: AtomDistribution) -> bool:
    return atom.is_integral_real()


def _max_abs(atom: AtomDistribution) -> int:
    vals, _, _ = atom.int_support()
    return max(abs(v) for v in vals)


def _weight_dtype(total: int):
    return np.int64 if total < _INT64_SAFE else object


def _check_enum(atom_sizes, budget: Budget, what="assignment space"):
    size = 1
    for s in atom_sizes:
        size *= s
    if size > budget.enum_cap:
        raise BudgetExceeded(f"exact enumeration of {what} too large", size, budget.enum_cap)
    return size


def _grid_block(vals, wts, n, start, stop, wdtype):
    """Rows ``start..stop-1`` of the product space (last coordinate fastest)."""
    K = len(vals)
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        digits[:, j] = idx % K
        idx //= K
    v = np.asarray(vals, dtype=np.int64)[digits]
    if all(x == wts[0] for x in wts):
        w = np.full(stop - start, wts[0] ** n, dtype=wdtype)
    else:
        w = np.ones(stop - start, dtype=wdtype)
        wa = np.asarray(wts, dtype=wdtype)
        for j in range(n):
            w = w * wa[digits[:, j]]
    return v, w


def _blocks(total, block=BLOCK_ROWS):
    return [(s, min(s + block, total)) for s in range(0, total, block)]


def _run_blocks(fn, spans, threads):
    if threads <= 1 or len(spans) <= 1:
        return [fn(s, e) for s, e in spans]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda se: fn(*se), spans))


# ---------------------------------------------------------------------------
# linear forms

def _linear_law_codes(codes, atom: AtomDistribution, cap: int, dtype):
    """Law of sum codes[i]*x_i: (sorted keys, weights, #nonzero terms)."""
    xv, xw, xden = atom.int_support()
    keys = np.zeros(1, dtype=dtype)
    used = sum(1 for c in codes if c)
    w = np.ones(1, dtype=_weight_dtype(xden ** max(used, 1)))
    wa = [w.dtype.type(x) if w.dtype != object else int(x) for x in xw]
    for c in codes:
        if not c:
            continue
        keys = np.concatenate([keys + c * v for v in xv])
        w = np.concatenate([w * x for x in wa])
        keys, w = _merge(keys, w)
        if len(keys) > cap:
            raise BudgetExceeded("linear distribution support too large", len(keys), cap)
    return keys, w, used


def _linear_dict(coeffs, atom: AtomDistribution, cap: int):
    law = {ZERO: Fraction(1)}
    for a in coeffs:
        if not a:
            continue
        new: dict = defaultdict(Fraction)
        for v, p in law.items():
            for x, q in atom.support:
                new[v + a * x] += p * q
        law = dict(new)
        if len(law) > cap:
            raise BudgetExceeded("linear distribution support too large", len(law), cap)
    return law


def linear_distribution(f: LinearForm, budget: Budget | None = None) -> ValueDistribution:
    """Exact law of ``sum a_i x_i`` by iterated sparse convolution."""
    budget = budget or DEFAULT_BUDGET
    if _fast_atom(f.atom):
        codec = _Codec.build([(f.coeffs, _max_abs(f.atom))])
        if codec.fits:
            codes = [codec.encode(a) for a in f.coeffs]
            keys, w, used = _linear_law_codes(codes, f.atom, budget.support_cap, codec.dtype)
            total = f.atom.int_support()[2] ** used
            return ValueDistribution._trusted(
                {codec.decode(k): Fraction(int(x), total) for k, x in zip(keys, w)})
    return ValueDistribution._trusted(_linear_dict(f.coeffs, f.atom, budget.support_cap))


# ---------------------------------------------------------------------------
# bilinear forms

def _target_groups(f: TargetFunction, ymax: int):
    if f.kind == "constant":
        return [([f.value], 1)]
    if f.kind == "affine":
        return [([f.value], 1), (f.coeffs, ymax)]
    return [(list(f.table.values()), 1)]


def _target_codes(f: TargetFunction, codec: _Codec, Y, yvals_py=None):
    if f.kind == "constant":
        return np.full(len(Y), codec.encode(f.value), dtype=codec.dtype)
    if f.kind == "affine":
        if len(f.coeffs) != Y.shape[1]:
            raise InvalidArgument("affine target length mismatch")
        ac = codec.encode_array(f.coeffs)
        return Y.astype(codec.dtype) @ ac + codec.encode(f.value)
    return np.array([codec.encode(f(tuple(int(v) for v in row))) for row in Y], dtype=codec.dtype)


class _LawCache:
    """Linear laws over x keyed by canonical coefficient-code tuples."""

    def __init__(self, atom, cap, dtype):
        self.atom = atom
        self.cap = cap
        self.dtype = dtype
        self.sym = atom.is_symmetric()
        self.den = atom.int_support()[2]
        self._laws = {}

    def canon(self, W):
        """Canonicalize coefficient rows (2-D array)."""
        if self.sym:
            return np.sort(np.abs(W), axis=1)
        return W

    def law(self, key):
        hit = self._laws.get(key)
        if hit is None:
            hit = _linear_law_codes(list(key), self.atom, self.cap, self.dtype)
            self._laws[key] = hit
        return hit

    def mass(self, key, target):
        keys, w, _ = self.law(key)
        pos = np.searchsorted(keys, target)
        if pos < len(keys) and keys[pos] == target:
            return int(w[pos])
        return 0


def _conditional_fast(matrix, x_atom, y_atom, f, budget, want_law):
    """Shared engine: law of x^T A y conditioned on y, averaged over y.

    Returns (event weight, total weight, mixture (keys, weights) or None, codec).
    """
    m, n = len(matrix), len(matrix[0])
    yv, yw, yden = y_atom.int_support()
    xden = x_atom.int_support()[2]
    size = _check_enum([len(yv)] * n, budget, "y assignments")
    xmax, ymax = _max_abs(x_atom), _max_abs(y_atom)
    flat = [a for r in matrix for a in r]
    codec = _Codec.build([(flat, xmax * ymax)] + _target_groups(f, ymax))
    if not codec.fits:
        return None
    A = codec.encode_grid(matrix)
    wdt = _weight_dtype(yden ** n)
    cache = _LawCache(x_atom, budget.support_cap, codec.dtype)

    def block(s, e):
        Y, wy = _grid_block(yv, yw, n, s, e, wdt)
        W = Y.astype(codec.dtype) @ A.T
        t = _target_codes(f, codec, Y)
        key = np.concatenate([cache.canon(W), t.reshape(-1, 1)], axis=1)
        if codec.dtype == object:
            acc = defaultdict(int)
            for row, wt in zip(map(tuple, key), wy):
                acc[row] += int(wt)
            return acc
        uniq, wsum = _merge_rows(key, wy)
        return {tuple(int(x) for x in row): int(wt) for row, wt in zip(uniq, wsum)}

    groups: dict = defaultdict(int)
    for part in _run_blocks(block, _blocks(size), budget.threads):
        for k, v in part.items():
            groups[k] += v

    total = yden ** n * xden ** m
    hit = 0
    mix_keys, mix_w = [], []
    for k, wy in sorted(groups.items()):
        coeffs, target = k[:-1], k[-1]
        keys, w, used = cache.law(coeffs)
        scale = wy * xden ** (m - used)
        hit += scale * cache.mass(coeffs, target)
        if want_law:
            mix_keys.append(keys)
            mix_w.append(w.astype(object) * scale)
    mixture = None
    if want_law:
        keys = np.concatenate(mix_keys)
        w = np.concatenate(mix_w)
        if keys.dtype != object and total < _INT64_SAFE:
            w = w.astype(np.int64)
        mixture = _merge(keys, w)
    return hit, total, mixture, codec


def _conditional_generic(matrix, x_atom, y_atom, f, budget, want_law):
    n = len(matrix[0])
    _check_enum([len(y_atom.support)] * n, budget, "y assignments")
    cache: dict = {}
    hit = Fraction(0)
    mixture: dict = defaultdict(Fraction)
    for combo in itertools.product(y_atom.support, repeat=n):
        y = [v for v, _ in combo]
        py = Fraction(1)
        for _, p in combo:
            py *= p
        W = tuple(sum((a * yj for a, yj in zip(row, y)), ZERO) for row in matrix)
        law = cache.get(W)
        if law is None:
            law = cache[W] = _linear_dict(W, x_atom, budget.support_cap)
        hit += py * law.get(f(y), Fraction(0))
        if want_law:
            for v, p in law.items():
                mixture[v] += py * p
    return hit, dict(mixture) if want_law else None


def _report_from_codes(keys, w, total, codec, target_prob=None):
    top = max(int(x) for x in w)
    arg = tuple(sorted((codec.decode(k) for k, x in zip(keys, w) if int(x) == top),
                       key=_value_sort_key))
    return ConcentrationReport(Fraction(top, total), arg, target_prob=target_prob)


def _report_from_dict(law, target_prob=None):
    top = max(law.values())
    arg = tuple(sorted((v for v, p in law.items() if p == top), key=_value_sort_key))
    return ConcentrationReport(top, arg, target_prob=target_prob)


def _check_ydim(n):
    if n > MAX_ENUM_DIM:
        raise BudgetExceeded("y-dimension too large for enumeration", n, MAX_ENUM_DIM)


def bilinear_conditional_concentration(B: BilinearForm, f: TargetFunction | None = None,
                                       budget: Budget | None = None) -> ConcentrationReport:
    """Exact ``P(x^T A y = f(y)) = E_y P_x(sum_i W_i x_i = f(y))`` with ``W = A y``.

    For a constant target the report also carries the sup over all constants.
    """
    budget = budget or DEFAULT_BUDGET
    f = f if f is not None else TargetFunction.constant(0)
    m, n = B.shape
    _check_ydim(n)
    want = f.is_constant
    if _fast_atom(B.x_atom) and _fast_atom(B.y_atom):
        res = _conditional_fast(B.matrix, B.x_atom, B.y_atom, f, budget, want)
        if res is not None:
            hit, total, mixture, codec = res
            tp = Fraction(hit, total)
            if want:
                return _report_from_codes(*mixture, total, codec, target_prob=tp)
            return ConcentrationReport(tp, (), target_prob=tp)
    hit, law = _conditional_generic(B.matrix, B.x_atom, B.y_atom, f, budget, want)
    if want:
        return _report_from_dict(law, target_prob=hit)
    return ConcentrationReport(hit, (), target_prob=hit)


def bilinear_distribution(B: BilinearForm, budget: Budget | None = None) -> ValueDistribution:
    """Full law of ``x^T A y``."""
    budget = budget or DEFAULT_BUDGET
    _check_ydim(B.shape[1])
    f = TargetFunction.constant(0)
    if _fast_atom(B.x_atom) and _fast_atom(B.y_atom):
        res = _conditional_fast(B.matrix, B.x_atom, B.y_atom, f, budget, True)
        if res is not None:
            _, total, (keys, w), codec = res
            return ValueDistribution._trusted(
                {codec.decode(k): Fraction(int(x), total) for k, x in zip(keys, w)})
    _, law = _conditional_generic(B.matrix, B.x_atom, B.y_atom, f, budget, True)
    return ValueDistribution._trusted(law)


# ---------------------------------------------------------------------------
# quadratic forms

def _quadratic_fast(Q: QuadraticForm, budget: Budget):
    n = Q.n
    xv, xw, xden = Q.atom.int_support()
    size = _check_enum([len(xv)] * n, budget)
    xmax = _max_abs(Q.atom)
    flat = [a for r in Q.matrix for a in r]
    codec = _Codec.build([(flat, xmax * xmax), (Q.linear, xmax), ([Q.constant], 1)])
    if not codec.fits:
        return None
    A = codec.encode_grid(Q.matrix)
    L = codec.encode_array(Q.linear)
    wdt = _weight_dtype(xden ** n)

    def block(s, e):
        X, w = _grid_block(xv, xw, n, s, e, wdt)
        Xc = X.astype(codec.dtype)
        vals = ((Xc @ A) * Xc).sum(axis=1) - Xc @ L
        return _merge(vals, w)

    parts = _run_blocks(block, _blocks(size), budget.threads)
    keys = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    keys, w = _merge(keys, w)
    if len(keys) > budget.support_cap:
        raise BudgetExceeded("quadratic support too large", len(keys), budget.support_cap)
    return keys, w, xden ** n, codec


def _quadratic_generic(Q: QuadraticForm, budget: Budget):
    _check_enum([len(Q.atom.support)] * Q.n, budget)
    law: dict = defaultdict(Fraction)
    for combo in itertools.product(Q.atom.support, repeat=Q.n):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        law[Q.evaluate([v for v, _ in combo])] += p
    return dict(law)


def quadratic_distribution(Q: QuadraticForm, budget: Budget | None = None) -> ValueDistribution:
    """Law of ``x^T A x - L(x)`` (the event holds where this equals the constant)."""
    budget = budget or DEFAULT_BUDGET
    _check_ydim(Q.n)
    if _fast_atom(Q.atom):
        res = _quadratic_fast(Q, budget)
        if res is not None:
            keys, w, total, codec = res
            return ValueDistribution._trusted(
                {codec.decode(k): Fraction(int(x), total) for k, x in zip(keys, w)})
    return ValueDistribution._trusted(_quadratic_generic(Q, budget))


def quadratic_concentration(Q: QuadraticForm, budget: Budget | None = None) -> ConcentrationReport:
    """sup_c P(x^T A x - L(x) = c), plus P at the form's own constant."""
    budget = budget or DEFAULT_BUDGET
    _check_ydim(Q.n)
    if _fast_atom(Q.atom):
        res = _quadratic_fast(Q, budget)
        if res is not None:
            keys, w, total, codec = res
            c = codec.encode(Q.constant)
            pos = np.searchsorted(keys, c)
            hit = int(w[pos]) if pos < len(keys) and keys[pos] == c else 0
            return _report_from_codes(keys, w, total, codec, target_prob=Fraction(hit, total))
    law = _quadratic_generic(Q, budget)
    return _report_from_dict(law, target_prob=law.get(Q.constant, Fraction(0)))


# ---------------------------------------------------------------------------
# multilinear forms

def _mode_assignments(atom: AtomDistribution, n: int):
    for combo in itertools.product(atom.support, repeat=n):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        yield tuple(v for v, _ in combo), p


def multilinear_concentration(M: MultilinearForm, f: TargetFunction | None = None,
                              budget: Budget | None = None) -> ConcentrationReport:
    """Exact ``P(A(y_1..y_k) = f(y_2..y_k))``; f sees the concatenated tail blocks."""
    budget = budget or DEFAULT_BUDGET
    f = f if f is not None else TargetFunction.constant(0)
    k = M.order
    total_vars = sum(M.dims)
    if total_vars > MAX_ENUM_DIM:
        raise BudgetExceeded("too many variables for exact multilinear enumeration",
                             total_vars, MAX_ENUM_DIM)
    if k == 1:
        lf = LinearForm([M.coeffs.get((i,), ZERO) for i in range(M.dims[0])], M.atoms[0])
        law = linear_distribution(lf, budget).support
        if f.kind != "constant":
            raise InvalidArgument("order-1 form admits only constant targets")
        return _report_from_dict(law, target_prob=law.get(f.value, Fraction(0)))
    _check_enum([len(a.support) ** d for a, d in zip(M.atoms[1:], M.dims[1:])], budget,
                "tail assignments")
    head = M.dims[0]
    by_head = defaultdict(list)
    for idx, a in M.coeffs.items():
        by_head[idx[0]].append((idx[1:], a))
    want = f.is_constant
    fast = all(_fast_atom(a) for a in M.atoms)
    x_atom = M.atoms[0]
    cache: dict = {}
    hit = Fraction(0)
    mixture: dict = defaultdict(Fraction)
    tails = [list(_mode_assignments(a, d)) for a, d in zip(M.atoms[1:], M.dims[1:])]
    for combo in itertools.product(*tails):
        blocks = [b for b, _ in combo]
        p = Fraction(1)
        for _, q in combo:
            p *= q
        W = []
        for i in range(head):
            acc = ZERO
            for rest, a in by_head.get(i, ()):
                term = a
                for blk, j in zip(blocks, rest):
                    term = term * blk[j]
                acc += term
            W.append(acc)
        W = tuple(W)
        law = cache.get(W)
        if law is None:
            law = cache[W] = linear_distribution(LinearForm(W, x_atom), budget).support \
                if fast else _linear_dict(W, x_atom, budget.support_cap)
        tail_flat = tuple(v for b in blocks for v in b)
        hit += p * law.get(f(tail_flat), Fraction(0))
        if want:
            for v, q in law.items():
                mixture[v] += p * q
    if want:
        return _report_from_dict(dict(mixture), target_prob=hit)
    return ConcentrationReport(hit, (), target_prob=hit)


# ---------------------------------------------------------------------------
# joint laws

def joint_distribution(forms: Sequence[LinearForm], budget: Budget | None = None) -> ValueDistribution:
    """Exact law of the vector ``(v_1^T y, ..., v_k^T y)`` over shared variables."""
    budget = budget or DEFAULT_BUDGET
    if not forms:
        raise InvalidArgument("need at least one form")
    n = forms[0].n
    atom = forms[0].atom
    if any(fm.n != n or not fm.atom.same_law(atom) for fm in forms):
        raise InvalidArgument("joint forms must share length and atom")
    k = len(forms)
    if _fast_atom(atom):
        flat = [a for fm in forms for a in fm.coeffs]
        codec = _Codec.build([(flat, _max_abs(atom))])
        xv, xw, xden = atom.int_support()
        if codec.fits and xden ** n < _INT64_SAFE:
            cols = np.array([[codec.encode(fm.coeffs[i]) for fm in forms] for i in range(n)],
                            dtype=np.int64)
            keys = np.zeros((1, k), dtype=np.int64)
            w = np.ones(1, dtype=np.int64)
            used = 0
            for i in range(n):
                c = cols[i]
                if not c.any():
                    continue
                used += 1
                keys = np.concatenate([keys + c * v for v in xv])
                w = np.concatenate([w * x for x in xw])
                keys, w = _merge_rows(keys, w)
                if len(keys) > budget.support_cap:
                    raise BudgetExceeded("joint support too large", len(keys), budget.support_cap)
            total = xden ** used
            return ValueDistribution._trusted(
                {tuple(codec.decode(x) for x in row): Fraction(int(p), total)
                 for row, p in zip(keys, w)})
    law = {(ZERO,) * k: Fraction(1)}
    for i in range(n):
        col = tuple(fm.coeffs[i] for fm in forms)
        if not any(col):
            continue
        new: dict = defaultdict(Fraction)
        for v, p in law.items():
            for x, q in atom.support:
                new[tuple(a + c * x for a, c in zip(v, col))] += p * q
        law = dict(new)
        if len(law) > budget.support_cap:
            raise BudgetExceeded("joint support too large", len(law), budget.support_cap)
    return ValueDistribution._trusted(law)


# ---------------------------------------------------------------------------
# Monte Carlo

_Z95 = NormalDist().inv_cdf(0.975)


def wilson_halfwidth(successes: int, samples: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval."""
    p = successes / samples
    return z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / (1 + z * z / samples)


def monte_carlo_probability(event: Callable, atoms, samples: int, seed: int, *,
                            vectorized: bool = False, block: int = 1 << 16):
    """Estimate P(event) by sampling; returns ``(estimate, ci_halfwidth)``.

    ``atoms`` is a list of per-variable atoms or a pair ``(atom, n)``.  Block
    ``b`` draws from substream ``(seed, "dist.monte_carlo", b)``, so results
    depend only on ``seed`` and ``block``.  With ``vectorized=True`` the event
    receives a 2-D array of assignments and must return a boolean array.
    The half-width is the 95% Wilson score interval.
    """
    if samples < 100:
        raise InvalidArgument("monte_carlo_probability needs samples >= 100")
    if isinstance(atoms, tuple) and len(atoms) == 2 and isinstance(atoms[1], int):
        atoms = [atoms[0]] * atoms[1]
    atoms = list(atoms)
    integral = all(_fast_atom(a) for a in atoms)
    hits = 0
    for b, start in enumerate(range(0, samples, block)):
        size = min(block, samples - start)
        rng = substream(seed, "dist.monte_carlo", b)
        cols = []
        for a in atoms:
            probs = np.array([float(p) for p in a.probs])
            idx = rng.choice(len(probs), size=size, p=probs / probs.sum())
            if integral:
                cols.append(np.asarray(a.int_support()[0], dtype=np.int64)[idx])
            else:
                vals = np.empty(len(a.values), dtype=object)
                vals[:] = a.values
                cols.append(vals[idx])
        X = np.stack(cols, axis=1) if cols else np.zeros((size, 0), dtype=np.int64)
        if vectorized:
            hits += int(np.count_nonzero(np.asarray(event(X), dtype=bool)))
        else:
            hits += sum(1 for row in X if event(row))
    return hits / samples, wilson_halfwidth(hits, samples)
