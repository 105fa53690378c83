"""Decoupling, balanced partitions, shattering families and the
quadratic-to-bilinear reduction.

A quadratic event ``x^T A x - L(x) = c`` with ``x = (y, z)`` split over a
partition ``Y | Z`` is decoupled by replacing ``z`` with an independent copy
``z'``; on the joint event the difference of the two equations is the
bilinear event

    2 y^T A_YZ (z - z') = L_Z(z) - L_Z(z') - z^T A_ZZ z + z'^T A_ZZ z'.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import DEFAULT_BUDGET, DEFAULT_MAX_ATTEMPTS, SMALL_N_SHATTER, Budget
from .dist import _Codec, _check_enum, _fast_atom, _grid_block, quadratic_concentration
from .errors import InvalidArgument, ShatterFailure
from .forms import ZERO, AtomDistribution, BilinearForm, QuadraticForm
from .rng import substream
from .scalars import GaussianRational, as_gaussian, format_rational

__all__ = [
    "Partition", "PartitionFamily", "DecouplingResult", "DecouplingNote", "ReductionResult",
    "decoupling_check", "product_weights", "is_balanced", "equal_splits", "shatter_family_size",
    "shatter_verify", "shatter_build", "quad_to_bilinear", "reduction_check",
]


# ---------------------------------------------------------------------------
# decoupling inequality

@dataclass(frozen=True)
class DecouplingResult:
    lhs: Fraction
    rhs: Fraction
    holds: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


def product_weights(atoms: Sequence[AtomDistribution]):
    """Integer weights (and their total) of all assignments, last variable fastest."""
    w = [1]
    total = 1
    for a in atoms:
        den = math.lcm(*(p.denominator for p in a.probs))
        ws = [int(p * den) for p in a.probs]
        w = [x * y for x in w for y in ws]
        total *= den
    return w, total


def decoupling_check(event_table, atoms=None, *, y_weights=None, z_weights=None) -> DecouplingResult:
    """Exact ``P(E(Y,Z))^2`` against ``P(E(Y,Z) and E(Y,Z'))``.

    ``event_table[a][b]`` is the event at the a-th y-assignment and b-th
    z-assignment.  ``atoms`` is ``(y_atoms, z_atoms)`` (assignments enumerated
    in product order, last variable fastest); alternatively pass integer
    weight vectors.  With neither, assignments are equally likely.
    """
    E = np.asarray(event_table, dtype=bool)
    if E.ndim != 2:
        raise InvalidArgument("event table must be two-dimensional")
    ny, nz = E.shape
    if atoms is not None:
        y_weights, wy_total = product_weights(atoms[0])
        z_weights, wz_total = product_weights(atoms[1])
    else:
        y_weights = list(y_weights) if y_weights is not None else [1] * ny
        z_weights = list(z_weights) if z_weights is not None else [1] * nz
        wy_total, wz_total = sum(y_weights), sum(z_weights)
    if len(y_weights) != ny or len(z_weights) != nz:
        raise InvalidArgument("weights do not match the event table shape")
    wz = np.array(z_weights, dtype=object)
    inner = [int(x) for x in E.astype(object) @ wz]
    mass = sum(int(a) * b for a, b in zip(y_weights, inner))
    pair = sum(int(a) * b * b for a, b in zip(y_weights, inner))
    lhs = Fraction(mass, wy_total * wz_total) ** 2
    rhs = Fraction(pair, wy_total * wz_total ** 2)
    return DecouplingResult(lhs, rhs, lhs <= rhs)


# ---------------------------------------------------------------------------
# partitions

@dataclass(frozen=True)
class Partition:
    """Split of variables ``0..n-1`` into ``Y`` and ``Z`` with ``|Y| - |Z|`` in {0, 1}."""

    Y: tuple
    Z: tuple

    def __post_init__(self):
        Y, Z = tuple(sorted(set(self.Y))), tuple(sorted(set(self.Z)))
        if set(Y) & set(Z):
            raise InvalidArgument("Y and Z must be disjoint")
        if set(Y) | set(Z) != set(range(len(Y) + len(Z))):
            raise InvalidArgument("Y and Z must cover 0..n-1")
        if len(Y) - len(Z) not in (0, 1):
            raise InvalidArgument("need |Y| = |Z| or |Y| = |Z| + 1")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self):
        return len(self.Y) + len(self.Z)

    def to_json(self):
        return {"Y": [i + 1 for i in self.Y], "Z": [i + 1 for i in self.Z]}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(int(i) - 1 for i in obj["Y"]), tuple(int(i) - 1 for i in obj["Z"]))


@dataclass(frozen=True)
class PartitionFamily:
    partitions: tuple
    n: int
    balanced_for: tuple | None = None  # (QuadraticForm, r)

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        if any(p.n != self.n for p in self.partitions):
            raise InvalidArgument("partition sizes disagree with n")
        if self.balanced_for is not None:
            Q, r = self.balanced_for
            if not all(is_balanced(Q, p, r) for p in self.partitions):
                raise InvalidArgument("family is not balanced for the given form")

    def __len__(self):
        return len(self.partitions)

    def to_json(self):
        out = {"n": self.n, "size": len(self.partitions),
               "partitions": [p.to_json() for p in self.partitions]}
        if self.balanced_for is not None:
            out["balanced_r"] = self.balanced_for[1]
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(Partition.from_json(p) for p in obj["partitions"]), int(obj["n"]))


def is_balanced(Q: QuadraticForm, p: Partition, r: int) -> bool:
    """Every ``i`` in Y has at least ``r`` indices ``j`` in Z with ``a_ij != 0``."""
    if p.n != Q.n:
        raise InvalidArgument("partition size does not match the form")
    for i in p.Y:
        row = Q.matrix[i]
        if sum(1 for j in p.Z if not as_gaussian(row[j]).is_zero()) < r:
            return False
    return True


def equal_splits(n: int):
    """All partitions with ``|Y| = ceil(n/2)``, Y in lexicographic order."""
    full = range(n)
    for Y in itertools.combinations(full, (n + 1) // 2):
        sY = set(Y)
        yield Partition(Y, tuple(i for i in full if i not in sY))


def shatter_family_size(n: int) -> int:
    return math.ceil(5 * math.log(n) / math.log(17 / 16))


def _pair_index(n):
    pairs = list(itertools.combinations(range(n), 2))
    return pairs, {pq: k for k, pq in enumerate(pairs)}


def shatter_verify(n: int, family) -> tuple | None:
    """First ``(i, j, k, l)`` (``i < j``, ``k < l``, all distinct, lexicographic)
    such that no partition has ``i, j`` in Y and ``k, l`` in Z; None if the
    family shatters."""
    if n < 4:
        raise InvalidArgument("shattering needs n >= 4")
    parts = family.partitions if isinstance(family, PartitionFamily) else tuple(family)
    pairs, _ = _pair_index(n)
    P = np.array(pairs)
    covered = np.zeros((len(pairs), len(pairs)), dtype=bool)
    for part in parts:
        inY = np.zeros(n, dtype=bool)
        inY[list(part.Y)] = True
        both_y = inY[P[:, 0]] & inY[P[:, 1]]
        both_z = ~inY[P[:, 0]] & ~inY[P[:, 1]]
        covered |= np.outer(both_y, both_z)
    a, b = P[:, 0], P[:, 1]
    disjoint = ((a[:, None] != a[None, :]) & (a[:, None] != b[None, :])
                & (b[:, None] != a[None, :]) & (b[:, None] != b[None, :]))
    hit = np.argwhere(disjoint & ~covered)
    if len(hit) == 0:
        return None
    p, q = hit[0]
    return (int(a[p]), int(b[p]), int(a[q]), int(b[q]))


def _random_split(rng, n) -> Partition:
    perm = rng.permutation(n)
    h = (n + 1) // 2
    return Partition(tuple(int(i) for i in perm[:h]), tuple(int(i) for i in perm[h:]))


def shatter_build(Q: QuadraticForm | None, r: int, seed: int,
                  max_attempts: int = DEFAULT_MAX_ATTEMPTS, n: int | None = None,
                  transcript: list | None = None) -> PartitionFamily:
    """Sample a shattering family of balanced equal splits.

    Each attempt draws ``ceil(5 ln n / ln(17/16))`` uniform equal splits from
    substream ``(seed, "decouple.shatter", attempt)``; the first attempt whose
    family shatters and whose every split is balanced for ``(Q, r)`` wins.
    For ``n <= SMALL_N_SHATTER`` the family of all balanced equal splits is
    used instead.  ``r <= 0`` makes balance vacuous and ``Q`` optional.
    """
    if Q is not None:
        n = Q.n
    if n is None:
        raise InvalidArgument("need Q or n")
    if n < 4:
        raise InvalidArgument("shattering needs n >= 4")
    need_balance = r > 0
    if need_balance and Q is None:
        raise InvalidArgument("balance requires a form")
    balanced_for = (Q, r) if need_balance else None

    def ok(p):
        return not need_balance or is_balanced(Q, p, r)

    if n <= SMALL_N_SHATTER:
        fam = tuple(p for p in equal_splits(n) if ok(p))
        bad = shatter_verify(n, fam)
        if transcript is not None:
            transcript.append({"attempt": 0, "mode": "exhaustive", "size": len(fam),
                               "balanced": True, "violation": bad})
        if bad is not None:
            raise ShatterFailure("balanced equal splits do not shatter",
                                 {"n": n, "r": r, "violation": bad, "size": len(fam)})
        return PartitionFamily(fam, n, balanced_for)
    size = shatter_family_size(n)
    last = None
    for attempt in range(max_attempts):
        rng = substream(seed, "decouple.shatter", attempt)
        fam = tuple(_random_split(rng, n) for _ in range(size))
        unbalanced = sum(1 for p in fam if not ok(p))
        bad = shatter_verify(n, fam) if unbalanced == 0 else None
        last = {"attempt": attempt, "unbalanced": unbalanced, "violation": bad}
        if transcript is not None:
            transcript.append(dict(last, mode="sampled", size=size))
        if unbalanced == 0 and bad is None:
            return PartitionFamily(fam, n, balanced_for)
    raise ShatterFailure(f"no shattering balanced family in {max_attempts} attempts",
                         {"n": n, "r": r, "size": size, "attempts": max_attempts, "last": last})


# ---------------------------------------------------------------------------
# quadratic -> bilinear

@dataclass(frozen=True)
class DecouplingNote:
    """The y-side of the reduced form is ``z - z'`` for independent copies."""

    difference_atom: AtomDistribution
    Y: tuple
    Z: tuple
    text: str = ("columns carry differences z_j - z'_j of independent copies; "
                 "the target is L_Z(z) - L_Z(z') - z^T A_ZZ z + z'^T A_ZZ z'")

    def to_json(self):
        return {"difference_atom": self.difference_atom.to_json(),
                "Y": [i + 1 for i in self.Y], "Z": [i + 1 for i in self.Z], "text": self.text}


_RADEMACHER_DIFF = {GaussianRational(-2): Fraction(1, 4), ZERO: Fraction(1, 2),
                    GaussianRational(2): Fraction(1, 4)}


def quad_to_bilinear(Q: QuadraticForm, p: Partition):
    """``(BilinearForm(2 A_YZ), note)``; the bilinear y-atom is the difference law."""
    if p.n != Q.n:
        raise InvalidArgument("partition size does not match the form")
    diff = Q.atom.difference()
    if Q.atom.kind == "rademacher" and dict(diff.support) != _RADEMACHER_DIFF:
        raise AssertionError("difference of Rademachers must be {0: 1/2, +-2: 1/4}")
    mat = [[2 * as_gaussian(Q.matrix[i][j]) for j in p.Z] for i in p.Y]
    return BilinearForm(mat, Q.atom, diff), DecouplingNote(diff, p.Y, p.Z)


@dataclass(frozen=True)
class ReductionResult:
    """``p_event = sup_c P_c``; ``p_pair = P(E_c and E'_c)`` at the maximizing c;
    ``p_decoupled`` = probability of the bilinear difference event."""

    c: GaussianRational
    p_event: Fraction
    p_pair: Fraction
    p_decoupled: Fraction

    @property
    def holds(self) -> bool:
        return self.p_event ** 2 <= self.p_pair <= self.p_decoupled

    def to_json(self):
        return {"c": str(self.c), "p_event": format_rational(self.p_event),
                "p_pair": format_rational(self.p_pair),
                "p_decoupled": format_rational(self.p_decoupled), "holds": self.holds}


def _sub(mat, rows, cols):
    return [[mat[i][j] for j in cols] for i in rows]


def reduction_check(Q: QuadraticForm, p: Partition, budget: Budget | None = None) -> ReductionResult:
    """Exact ``sup_c P_c^2 <= P(E_c and E'_c) <= P(decoupled bilinear event)``.

    ``P_c`` comes from the distribution engine; the pair and decoupled
    probabilities are enumerated here over ``y``, ``z`` and ``(z, z')``.
    """
    budget = budget or DEFAULT_BUDGET
    if not _fast_atom(Q.atom):
        raise InvalidArgument("reduction_check supports integer-valued atoms")
    rep = quadratic_concentration(Q, budget)
    c = rep.argmax_values[0]
    B, _ = quad_to_bilinear(Q, p)
    Y, Z = p.Y, p.Z
    A = Q.matrix
    L = Q.linear
    vals, wts, den = Q.atom.int_support()
    ny, nz = len(Y), len(Z)
    _check_enum([len(vals)] * (ny + 2 * nz), budget, "decoupled assignments")
    xmax = max(abs(v) for v in vals)
    flat = [a for row in A for a in row]
    codec = _Codec.build([(flat, 4 * xmax * xmax), (L, 2 * xmax), ([c], 1)])
    dt = codec.dtype
    enc = codec.encode_grid
    AYY, AYZ, AZZ = enc(_sub(A, Y, Y)), enc(_sub(A, Y, Z)), enc(_sub(A, Z, Z))
    Bm = enc([[x for x in row] for row in B.matrix]) if ny and nz else np.zeros((ny, nz), dtype=dt)
    LY = codec.encode_array([L[i] for i in Y])
    LZ = codec.encode_array([L[j] for j in Z])
    Yg, wy = _grid_block(vals, wts, ny, 0, len(vals) ** ny, object)
    Zg, wz = _grid_block(vals, wts, nz, 0, len(vals) ** nz, object)
    Yg, Zg = Yg.astype(dt), Zg.astype(dt)
    qy = ((Yg @ AYY) * Yg).sum(axis=1) - Yg @ LY
    qz = ((Zg @ AZZ) * Zg).sum(axis=1) - Zg @ LZ
    V = qy[:, None] + 2 * (Yg @ AYZ @ Zg.T) + qz[None, :]
    hit = (V == codec.encode(c)).astype(object) @ wz
    wy_l = [int(x) for x in wy]
    pair = sum(a * int(h) * int(h) for a, h in zip(wy_l, hit))
    # decoupled event over (y, z, z')
    zi, zj = np.meshgrid(np.arange(len(Zg)), np.arange(len(Zg)), indexing="ij")
    zi, zj = zi.ravel(), zj.ravel()
    Wd = Zg[zi] - Zg[zj]
    g = Zg @ LZ - ((Zg @ AZZ) * Zg).sum(axis=1)
    target = g[zi] - g[zj]
    lhs = Yg @ Bm @ Wd.T
    wpair = (wz[zi] * wz[zj]).astype(object)
    dec = ((lhs == target[None, :]).astype(object) @ wpair)
    decoupled = sum(a * int(x) for a, x in zip(wy_l, dec))
    wy_t, wz_t = den ** ny, den ** nz
    return ReductionResult(c, rep.sup_prob, Fraction(pair, wy_t * wz_t * wz_t),
                           Fraction(decoupled, wy_t * wz_t * wz_t))
