"""Forms in independent random variables and instance generators.

All coefficient grids are dense tuples of :class:`GaussianRational`; only
multilinear forms are stored sparsely.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .certs import RankOneCertificate
from .config import MAX_ENUM_DIM
from .errors import InvalidArgument, InvalidCoefficient, ParseError
from .rng import substream
from .scalars import (GaussianRational, as_gaussian, as_rational, format_rational,
                      gaussian_from_json, gaussian_to_json, parse_gaussian, parse_rational)

SCHEMA_VERSION = 1

ZERO = GaussianRational(0)
ONE = GaussianRational(1)


# ---------------------------------------------------------------------------
# atoms

@dataclass(frozen=True)
class AtomDistribution:
    """Law of a single variable: Rademacher, lazy walker or explicit finite support."""

    kind: str
    support: tuple  # ((GaussianRational, Fraction), ...) sorted by value
    rho: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("rademacher", "lazy_walker", "finite"):
            raise InvalidArgument(f"unknown atom kind {self.kind!r}")
        pairs = [(as_gaussian(v), as_rational(p)) for v, p in self.support]
        if not pairs:
            raise InvalidArgument("empty atom support")
        if any(p <= 0 for _, p in pairs):
            raise InvalidArgument("atom probabilities must be positive")
        if sum(p for _, p in pairs) != 1:
            raise InvalidArgument("atom probabilities must sum to exactly 1")
        if len({v for v, _ in pairs}) != len(pairs):
            raise InvalidArgument("atom support values must be distinct")
        pairs.sort(key=lambda vp: vp[0].sort_key())
        object.__setattr__(self, "support", tuple(pairs))

    @classmethod
    def rademacher(cls):
        return cls("rademacher", ((-1, Fraction(1, 2)), (1, Fraction(1, 2))))

    @classmethod
    def lazy_walker(cls, rho):
        """P(0) = 2*rho, P(+1) = P(-1) = (1 - 2*rho)/2, for 0 < rho < 1/2."""
        rho = as_rational(rho)
        if not 0 < rho < Fraction(1, 2):
            raise InvalidArgument("lazy walker needs 0 < rho < 1/2")
        side = (1 - 2 * rho) / 2
        return cls("lazy_walker", ((-1, side), (0, 2 * rho), (1, side)), rho)

    @classmethod
    def finite(cls, pairs):
        return cls("finite", tuple(pairs))

    @property
    def values(self):
        return [v for v, _ in self.support]

    @property
    def probs(self):
        return [p for _, p in self.support]

    def max_mass(self) -> Fraction:
        return max(self.probs)

    def is_integral_real(self) -> bool:
        return all(v.is_real() and v.re.denominator == 1 for v in self.values)

    def is_symmetric(self) -> bool:
        law = dict(self.support)
        return all(law.get(-v) == p for v, p in self.support)

    def int_support(self):
        """(integer values, integer weights, weight total) for integral real atoms."""
        if not self.is_integral_real():
            raise InvalidArgument("atom is not integer valued")
        den = math.lcm(*(p.denominator for p in self.probs))
        vals = [int(v.re) for v in self.values]
        wts = [int(p * den) for p in self.probs]
        return vals, wts, den

    def difference(self) -> "AtomDistribution":
        """Law of y - y' for independent copies y, y'."""
        law: dict = {}
        for v, p in self.support:
            for w, q in self.support:
                law[v - w] = law.get(v - w, Fraction(0)) + p * q
        return AtomDistribution.finite(tuple(law.items()))

    def same_law(self, other: "AtomDistribution") -> bool:
        return self.support == other.support

    def to_json(self):
        if self.kind == "rademacher":
            return {"kind": "rademacher"}
        if self.kind == "lazy_walker":
            return {"kind": "lazy_walker", "rho": format_rational(self.rho)}
        return {"kind": "finite",
                "support": [{"value": gaussian_to_json(v), "prob": format_rational(p)}
                            for v, p in self.support]}

    @classmethod
    def from_json(cls, obj):
        if obj is None:
            return cls.rademacher()
        kind = obj.get("kind")
        if kind == "rademacher":
            return cls.rademacher()
        if kind == "lazy_walker":
            return cls.lazy_walker(parse_rational(str(obj["rho"])))
        if kind == "finite":
            return cls.finite(tuple((gaussian_from_json(e["value"]), parse_rational(str(e["prob"])))
                                    for e in obj["support"]))
        raise ParseError(f"unknown atom kind {kind!r}")


RADEMACHER = AtomDistribution.rademacher()


def _coerce_vec(values):
    return tuple(as_gaussian(v) for v in values)


def _coerce_grid(rows):
    grid = tuple(_coerce_vec(r) for r in rows)
    if not grid:
        raise InvalidArgument("empty matrix")
    width = len(grid[0])
    if width == 0 or any(len(r) != width for r in grid):
        raise InvalidArgument("matrix rows must be non-empty and of equal length")
    return grid


# ---------------------------------------------------------------------------
# forms

@dataclass(frozen=True)
class LinearForm:
    coeffs: tuple
    atom: AtomDistribution = RADEMACHER
    nonzero: int = field(init=False, compare=False)

    def __post_init__(self):
        c = _coerce_vec(self.coeffs)
        if not c:
            raise InvalidArgument("linear form needs n >= 1")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "nonzero", sum(1 for a in c if a))

    @property
    def n(self):
        return len(self.coeffs)

    @property
    def m(self):
        return self.nonzero

    def evaluate(self, x):
        return sum((a * xi for a, xi in zip(self.coeffs, x)), ZERO)


@dataclass(frozen=True)
class BilinearForm:
    """``x^T A y`` with ``x`` of length m (rows) and ``y`` of length n (cols)."""

    matrix: tuple
    x_atom: AtomDistribution = RADEMACHER
    y_atom: AtomDistribution = RADEMACHER
    row_counts: tuple = field(init=False, compare=False)

    def __post_init__(self):
        g = _coerce_grid(self.matrix)
        object.__setattr__(self, "matrix", g)
        object.__setattr__(self, "row_counts", tuple(sum(1 for a in r if a) for r in g))

    @property
    def shape(self):
        return (len(self.matrix), len(self.matrix[0]))

    @property
    def r(self) -> int:
        """Minimum number of nonzero entries over rows."""
        return min(self.row_counts)

    def rows_with_at_least(self, r: int):
        return [i for i, c in enumerate(self.row_counts) if c >= r]

    def evaluate(self, x, y):
        total = ZERO
        for i, xi in enumerate(x):
            if not xi:
                continue
            acc = sum((a * yj for a, yj in zip(self.matrix[i], y)), ZERO)
            total += acc * xi
        return total


@dataclass(frozen=True)
class QuadraticForm:
    """Event ``x^T A x = L(x) + c`` with symmetric ``A``; the full grid is stored."""

    matrix: tuple
    linear: tuple = None
    constant: GaussianRational = ZERO
    atom: AtomDistribution = RADEMACHER
    row_counts: tuple = field(init=False, compare=False)

    def __post_init__(self):
        g = _coerce_grid(self.matrix)
        n = len(g)
        if len(g[0]) != n:
            raise InvalidArgument("quadratic form needs a square matrix")
        for i in range(n):
            for j in range(i + 1, n):
                if g[i][j] != g[j][i]:
                    raise InvalidArgument(f"matrix not symmetric at ({i}, {j})")
        lin = _coerce_vec(self.linear) if self.linear is not None else (ZERO,) * n
        if len(lin) != n:
            raise InvalidArgument("linear part has wrong length")
        object.__setattr__(self, "matrix", g)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "constant", as_gaussian(self.constant))
        object.__setattr__(self, "row_counts", tuple(sum(1 for a in r if a) for r in g))

    @property
    def n(self):
        return len(self.matrix)

    def offdiag_counts(self):
        return tuple(sum(1 for j, a in enumerate(r) if a and j != i)
                     for i, r in enumerate(self.matrix))

    def evaluate(self, x):
        """``x^T A x - L(x)``; the event holds when this equals the constant."""
        quad = ZERO
        for i, xi in enumerate(x):
            if not xi:
                continue
            quad += xi * sum((a * xj for a, xj in zip(self.matrix[i], x)), ZERO)
        lin = sum((b * xi for b, xi in zip(self.linear, x)), ZERO)
        return quad - lin


@dataclass(frozen=True)
class MultilinearForm:
    """``sum a[i1..ik] y1[i1] ... yk[ik]`` over k independent blocks."""

    order: int
    dims: tuple
    coeffs: Mapping
    atoms: tuple = None

    def __post_init__(self):
        k = int(self.order)
        if k < 1:
            raise InvalidArgument("order must be positive")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != k or any(d < 1 for d in dims):
            raise InvalidArgument("dims must list k positive sizes")
        co = {}
        for idx, val in dict(self.coeffs).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != k or any(not 0 <= i < d for i, d in zip(idx, dims)):
                raise InvalidArgument(f"coefficient index {idx} out of bounds")
            val = as_gaussian(val)
            if val:
                co[idx] = val
        atoms = tuple(self.atoms) if self.atoms is not None else (RADEMACHER,) * k
        if len(atoms) != k:
            raise InvalidArgument("need one atom per block")
        object.__setattr__(self, "order", k)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "coeffs", co)
        object.__setattr__(self, "atoms", atoms)

    def evaluate(self, blocks):
        total = ZERO
        for idx, a in self.coeffs.items():
            term = a
            for b, i in zip(blocks, idx):
                term = term * b[i]
            total += term
        return total


# ---------------------------------------------------------------------------
# targets

@dataclass(frozen=True)
class TargetFunction:
    """Right-hand side f(y): constant, affine in y, or an explicit table."""

    kind: str
    value: GaussianRational = ZERO
    coeffs: tuple = ()
    table: Mapping | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "affine", "table"):
            raise InvalidArgument(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "value", as_gaussian(self.value))
        object.__setattr__(self, "coeffs", _coerce_vec(self.coeffs))
        if self.kind == "table":
            tab = {tuple(k): as_gaussian(v) for k, v in dict(self.table).items()}
            dims = {len(k) for k in tab}
            if len(dims) > 1:
                raise InvalidArgument("table keys have inconsistent lengths")
            dim = dims.pop() if dims else (self.dim or 0)
            if dim > MAX_ENUM_DIM:
                raise InvalidArgument(f"table targets need y-dimension <= {MAX_ENUM_DIM}")
            object.__setattr__(self, "table", tab)
            object.__setattr__(self, "dim", dim)

    @classmethod
    def constant(cls, c=0):
        return cls("constant", value=c)

    @classmethod
    def affine(cls, coeffs, c=0):
        return cls("affine", value=c, coeffs=coeffs)

    @classmethod
    def from_table(cls, table):
        return cls("table", table=table)

    @property
    def is_constant(self):
        return self.kind == "constant"

    def __call__(self, y):
        if self.kind == "constant":
            return self.value
        if self.kind == "affine":
            if len(self.coeffs) != len(y):
                raise InvalidArgument("affine target length mismatch")
            return self.value + sum((a * yi for a, yi in zip(self.coeffs, y)), ZERO)
        key = tuple(int(v) if isinstance(v, (int, np.integer)) else v for v in y)
        try:
            return self.table[key]
        except KeyError:
            try:
                return self.table[tuple(as_gaussian(v) for v in y)]
            except KeyError:
                raise InvalidArgument(f"target table has no entry for {key}") from None

    def to_json(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": gaussian_to_json(self.value)}
        if self.kind == "affine":
            return {"kind": "affine", "value": gaussian_to_json(self.value),
                    "coeffs": [gaussian_to_json(a) for a in self.coeffs]}
        return {"kind": "table",
                "entries": [{"y": [int(v) if isinstance(v, int) else str(v) for v in k],
                             "value": gaussian_to_json(val)}
                            for k, val in sorted(self.table.items(), key=lambda kv: str(kv[0]))]}

    @classmethod
    def from_json(cls, obj):
        if obj is None:
            return cls.constant(0)
        kind = obj.get("kind")
        if kind == "constant":
            return cls.constant(gaussian_from_json(obj.get("value", 0)))
        if kind == "affine":
            return cls.affine([gaussian_from_json(a) for a in obj["coeffs"]],
                              gaussian_from_json(obj.get("value", 0)))
        if kind == "table":
            tab = {}
            for e in obj["entries"]:
                key = tuple(v if isinstance(v, int) else parse_gaussian(v) for v in e["y"])
                tab[key] = gaussian_from_json(e["value"])
            return cls.from_table(tab)
        raise ParseError(f"unknown target kind {kind!r}")


# ---------------------------------------------------------------------------
# generators

def gen_extremal_bilinear(m: int, n: int) -> BilinearForm:
    """All-ones matrix: the form (x1+...+xm)(y1+...+yn)."""
    if m < 1 or n < 1:
        raise InvalidArgument("dimensions must be positive")
    return BilinearForm([[1] * n for _ in range(m)])


def gen_lowrank_sum(f: Sequence, g: Sequence) -> BilinearForm:
    """Matrix with entries f(i) + g(j)."""
    f = [as_rational(v) for v in f]
    g = [as_rational(v) for v in g]
    if not f or not g:
        raise InvalidArgument("f and g must be non-empty")
    return BilinearForm([[fi + gj for gj in g] for fi in f])


def _distinct_nonzero(rng, count, span):
    pool = np.array([v for v in range(-span, span + 1) if v != 0])
    return [int(v) for v in rng.choice(pool, size=count, replace=False)]


def _nonzero_ints(rng, count, span):
    vals = rng.integers(1, span + 1, size=count) * rng.choice([-1, 1], size=count)
    return [int(v) for v in vals]


def gen_planted_rank_one(m: int, n: int, corrupt_rows: int, corrupt_cols: int, seed: int,
                         span: int = 5):
    """Outer product ``u v^T`` with corrupted rows/columns.

    A corrupted row i gets entries ``v[k] * rho[k]`` with pairwise distinct
    ``rho``, so every 2x2 minor against a clean row is nonzero; columns are
    handled symmetrically.  Returns ``(form, ground_truth_certificate)``.
    """
    if not (0 <= corrupt_rows < m and 0 <= corrupt_cols < n):
        raise InvalidArgument("need corrupt_rows < m and corrupt_cols < n")
    rng = substream(seed, "forms.planted_rank_one", m, n, corrupt_rows, corrupt_cols)
    u = _nonzero_ints(rng, m, span)
    v = _nonzero_ints(rng, n, span)
    bad_rows = set(int(i) for i in rng.choice(m, size=corrupt_rows, replace=False))
    bad_cols = set(int(j) for j in rng.choice(n, size=corrupt_cols, replace=False))
    a = [[u[i] * v[j] for j in range(n)] for i in range(m)]
    spread = 3 * max(m, n) + 3
    for i in sorted(bad_rows):
        rho = _distinct_nonzero(rng, n, spread)
        for j in range(n):
            a[i][j] = v[j] * rho[j]
    for j in sorted(bad_cols):
        sigma = _distinct_nonzero(rng, m, spread)
        for i in range(m):
            a[i][j] = u[i] * sigma[i]
    rows = [i for i in range(m) if i not in bad_rows]
    cols = [j for j in range(n) if j not in bad_cols]
    cert = RankOneCertificate(rows, cols, {i: u[i] for i in rows}, {j: v[j] for j in cols})
    return BilinearForm(a), cert


def quadratic_from_square(b: Sequence, c: Sequence, d) -> QuadraticForm:
    """Form whose event is ``(sum b_i x_i)^2 = sum c_i x_i + d``."""
    b = [as_rational(v) for v in b]
    if any(v == 0 for v in b):
        raise InvalidCoefficient("all b_i must be nonzero")
    if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
        c = [c] * len(b)
    c = [as_rational(v) for v in c]
    if len(c) != len(b):
        raise InvalidArgument("b and c must have equal length")
    mat = [[bi * bj for bj in b] for bi in b]
    return QuadraticForm(mat, c, as_rational(d))


def gen_random_linear(n: int, seed: int, *, label="forms.random_linear", span=6,
                      zero_prob=0.2, den_span=4) -> LinearForm:
    """Random rational coefficients p/q with |p| <= span, 1 <= q <= den_span."""
    rng = substream(seed, label, n)
    nums = rng.integers(-span, span + 1, size=n)
    dens = rng.integers(1, den_span + 1, size=n)
    zero = rng.random(n) < zero_prob
    coeffs = [Fraction(0) if z else Fraction(int(p), int(q)) for p, q, z in zip(nums, dens, zero)]
    if all(c == 0 for c in coeffs):
        coeffs[0] = Fraction(1)
    return LinearForm(coeffs)


def gen_random_bilinear(m: int, n: int, r: int, seed: int, *, span=3,
                        label="forms.random_bilinear") -> BilinearForm:
    """Small-integer matrix whose every row has at least r nonzero entries."""
    if not 1 <= r <= n:
        raise InvalidArgument("need 1 <= r <= n")
    rng = substream(seed, label, m, n, r)
    rows = []
    for _ in range(m):
        k = int(rng.integers(r, n + 1))
        support = set(int(j) for j in rng.choice(n, size=k, replace=False))
        vals = _nonzero_ints(rng, n, span)
        rows.append([vals[j] if j in support else 0 for j in range(n)])
    return BilinearForm(rows)


def gen_random_symmetric(n: int, seed: int, *, span=3, density=0.7,
                         label="forms.random_symmetric", linear=True) -> QuadraticForm:
    rng = substream(seed, label, n)
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            if rng.random() < density:
                v = int(rng.integers(1, span + 1)) * int(rng.choice([-1, 1]))
                a[i][j] = a[j][i] = v
    lin = [int(v) for v in rng.integers(-span, span + 1, size=n)] if linear else None
    c = int(rng.integers(-span, span + 1))
    return QuadraticForm(a, lin, c)


def gen_planted_gap(n: int, d, bound: int, exceptions: int, seed: int):
    """Coefficients ``d * b_i`` (|b_i| <= bound, b_i != 0) with some indices replaced
    by values that are not integer multiples of d.  Returns (coeffs, exceptional set)."""
    d = as_gaussian(d)
    rng = substream(seed, "forms.planted_gap", n, bound, exceptions)
    bs = _nonzero_ints(rng, n, bound)
    bad = set(int(i) for i in rng.choice(n, size=exceptions, replace=False))
    coeffs = []
    for i, b in enumerate(bs):
        if i in bad:
            # half-integer multiple is never d * integer
            coeffs.append(d * Fraction(2 * int(rng.integers(1, bound + 1)) + 1, 2))
        else:
            coeffs.append(d * b)
    return coeffs, bad


def gen_near_multiple_tuple(n: int, multipliers: Sequence, perturb: Sequence, seed: int,
                            span: int = 4):
    """Rows ``v_1`` and ``v_j = c_j * v_1`` perturbed on planted index sets.

    ``multipliers[j-2]`` is c_j and ``perturb[j-2]`` the planted set S_j.  Then
    ``v_1 == (1/c_j) v_j`` exactly off S_j and differs on every index of S_j.
    """
    rng = substream(seed, "forms.near_multiple", n, len(multipliers))
    v1 = _nonzero_ints(rng, n, span)
    rows = [[Fraction(x) for x in v1]]
    for c, S in zip(multipliers, perturb):
        c = as_rational(c)
        row = [c * x for x in v1]
        for i in S:
            row[i] = row[i] + int(rng.integers(1, span + 1))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# ingestion / serialization

def parse_matrix_csv(text: str):
    """Rows of Rational/GaussianRational literals, one row per line."""
    rows = []
    reader = csv.reader(io.StringIO(text))
    for lineno, rec in enumerate(reader, start=1):
        if not rec or all(not f.strip() for f in rec):
            continue
        if rec[0].lstrip().startswith("#"):
            continue
        row = []
        for col, field_ in enumerate(rec, start=1):
            try:
                row.append(parse_gaussian(field_))
            except ParseError as exc:
                raise ParseError(str(exc), line=lineno, column=col) from None
        rows.append(row)
    if not rows:
        raise ParseError("no matrix rows found")
    width = len(rows[0])
    for i, r in enumerate(rows, start=1):
        if len(r) != width:
            raise ParseError(f"row has {len(r)} entries, expected {width}", line=i)
    return rows


def parse_matrix_json(obj):
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ParseError('matrix JSON must be an object with a "rows" list')
    rows = [[gaussian_from_json(v) for v in r] for r in obj["rows"]]
    if not rows or any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
        raise ParseError("matrix rows must be non-empty and of equal length")
    return rows


def matrix_to_json(rows):
    return {"rows": [[gaussian_to_json(v) for v in r] for r in rows]}


def form_to_json(form) -> dict:
    if isinstance(form, LinearForm):
        body = {"kind": "linear", "coeffs": [gaussian_to_json(a) for a in form.coeffs],
                "atom": form.atom.to_json()}
    elif isinstance(form, BilinearForm):
        body = {"kind": "bilinear", "matrix": matrix_to_json(form.matrix)["rows"],
                "x_atom": form.x_atom.to_json(), "y_atom": form.y_atom.to_json()}
    elif isinstance(form, QuadraticForm):
        body = {"kind": "quadratic", "matrix": matrix_to_json(form.matrix)["rows"],
                "linear": [gaussian_to_json(a) for a in form.linear],
                "constant": gaussian_to_json(form.constant), "atom": form.atom.to_json()}
    elif isinstance(form, MultilinearForm):
        body = {"kind": "multilinear", "order": form.order, "dims": list(form.dims),
                "coeffs": [{"index": [i + 1 for i in k], "value": gaussian_to_json(v)}
                           for k, v in sorted(form.coeffs.items())],
                "atoms": [a.to_json() for a in form.atoms]}
    else:
        raise InvalidArgument(f"not a form: {type(form).__name__}")
    return {"schema_version": SCHEMA_VERSION, **body}


def form_from_json(obj):
    """Decode a form written by :func:`form_to_json` (extra keys are ignored)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    ver = obj.get("schema_version")
    if ver != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {ver!r}")
    kind = obj.get("kind")
    try:
        if kind == "linear":
            return LinearForm([gaussian_from_json(a) for a in obj["coeffs"]],
                              AtomDistribution.from_json(obj.get("atom")))
        if kind == "bilinear":
            return BilinearForm([[gaussian_from_json(a) for a in r] for r in obj["matrix"]],
                                AtomDistribution.from_json(obj.get("x_atom")),
                                AtomDistribution.from_json(obj.get("y_atom")))
        if kind == "quadratic":
            mat = [[gaussian_from_json(a) for a in r] for r in obj["matrix"]]
            lin = obj.get("linear")
            return QuadraticForm(mat, None if lin is None else [gaussian_from_json(a) for a in lin],
                                 gaussian_from_json(obj.get("constant", 0)),
                                 AtomDistribution.from_json(obj.get("atom")))
        if kind == "multilinear":
            co = {tuple(int(i) - 1 for i in e["index"]): gaussian_from_json(e["value"])
                  for e in obj["coeffs"]}
            atoms = obj.get("atoms")
            atoms = None if atoms is None else [AtomDistribution.from_json(a) for a in atoms]
            return MultilinearForm(obj["order"], obj["dims"], co, atoms)
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r} in {kind} form") from None
    except InvalidArgument as exc:
        raise ParseError(str(exc)) from None
    raise ParseError(f"unknown form kind {kind!r}")
