"""Certificate records emitted by the structure detectors.

Indices are 0-based in Python and 1-based in JSON.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CertificateError, ParseError
from .scalars import (GaussianRational, as_gaussian, as_rational, format_rational,
                      gaussian_from_json, gaussian_to_json, parse_rational)


def _idx_out(ix):
    return [i + 1 for i in sorted(ix)]


def _idx_in(lst):
    try:
        return tuple(sorted(int(i) - 1 for i in lst))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad index list {lst!r}") from exc


@dataclass(frozen=True)
class RankOneCertificate:
    """``a[i][j] == u[i] * v[j]`` for all i in rows, j in cols."""

    rows: tuple
    cols: tuple
    u: dict
    v: dict

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows)))
        object.__setattr__(self, "cols", tuple(sorted(self.cols)))
        object.__setattr__(self, "u", {i: as_gaussian(self.u[i]) for i in self.rows})
        object.__setattr__(self, "v", {j: as_gaussian(self.v[j]) for j in self.cols})

    @property
    def shape(self):
        return (len(self.rows), len(self.cols))

    def verify(self, matrix) -> bool:
        for i in self.rows:
            row = matrix[i]
            ui = self.u[i]
            for j in self.cols:
                if as_gaussian(row[j]) != ui * self.v[j]:
                    return False
        return True

    def check(self, matrix):
        if not self.verify(matrix):
            raise CertificateError("rank-one certificate does not factor the block")

    def to_json(self):
        return {
            "kind": "rank1",
            "rows": _idx_out(self.rows),
            "cols": _idx_out(self.cols),
            "u": [gaussian_to_json(self.u[i]) for i in self.rows],
            "v": [gaussian_to_json(self.v[j]) for j in self.cols],
        }

    @classmethod
    def from_json(cls, obj):
        rows, cols = _idx_in(obj["rows"]), _idx_in(obj["cols"])
        if len(obj["u"]) != len(rows) or len(obj["v"]) != len(cols):
            raise ParseError("factor lengths do not match index lists")
        u = {i: gaussian_from_json(x) for i, x in zip(rows, obj["u"])}
        v = {j: gaussian_from_json(x) for j, x in zip(cols, obj["v"])}
        return cls(rows, cols, u, v)


@dataclass(frozen=True)
class APCertificate:
    """Progression ``{j*d : min_index <= j <= max_index}`` through 0."""

    d: Fraction
    min_index: int
    max_index: int
    coords: tuple
    covered: tuple
    exceptional: tuple = ()

    @property
    def length(self) -> int:
        return self.max_index - self.min_index

    def verify(self, values) -> bool:
        vals = [as_rational(v) for v in values]
        if self.d <= 0 or not (self.min_index <= 0 <= self.max_index):
            return False
        if set(self.covered) | set(self.exceptional) != set(range(len(vals))):
            return False
        for i, j in zip(self.covered, self.coords):
            if not (self.min_index <= j <= self.max_index) or vals[i] != j * self.d:
                return False
        return True

    def to_json(self):
        return {
            "kind": "ap",
            "d": format_rational(self.d),
            "min_index": self.min_index,
            "max_index": self.max_index,
            "length": self.length,
            "coords": list(self.coords),
            "covered": _idx_out(self.covered),
            "exceptional": _idx_out(self.exceptional),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(parse_rational(obj["d"]), int(obj["min_index"]), int(obj["max_index"]),
                   tuple(int(c) for c in obj["coords"]), _idx_in(obj["covered"]),
                   _idx_in(obj.get("exceptional", [])))


@dataclass(frozen=True)
class GAPCertificate:
    """``a[i] == d * b[i]`` with integer ``|b[i]| <= bound`` off the exceptional set."""

    d: GaussianRational
    coords: dict
    bound: int
    exceptional: tuple = ()

    def verify(self, values) -> bool:
        vals = [as_gaussian(v) for v in values]
        if self.d.is_zero():
            return False
        if set(self.coords) | set(self.exceptional) != set(range(len(vals))):
            return False
        if set(self.coords) & set(self.exceptional):
            return False
        for i, b in self.coords.items():
            if not isinstance(b, int) or abs(b) > self.bound or vals[i] != self.d * b:
                return False
        return True

    def to_json(self):
        keys = sorted(self.coords)
        return {
            "kind": "gap",
            "d": gaussian_to_json(self.d),
            "bound": self.bound,
            "indices": _idx_out(keys),
            "coords": [self.coords[i] for i in keys],
            "exceptional": _idx_out(self.exceptional),
        }

    @classmethod
    def from_json(cls, obj):
        idx = _idx_in(obj["indices"])
        coords = {i: int(b) for i, b in zip(idx, obj["coords"])}
        return cls(gaussian_from_json(obj["d"]), coords, int(obj["bound"]),
                   _idx_in(obj.get("exceptional", [])))


@dataclass(frozen=True)
class TupleStructure:
    """Ratios ``d[j]`` and disagreement sets ``S[j]`` (``v1 == d[j]*v[j]`` off ``S[j]``)."""

    ratios: tuple
    sets: tuple
    score: int
    product_metric: int
    escapes: tuple = field(default=())

    def to_json(self):
        return {
            "kind": "tuple",
            "ratios": [gaussian_to_json(d) for d in self.ratios],
            "sets": [_idx_out(s) for s in self.sets],
            "score": self.score,
            "product_metric": self.product_metric,
            "escapes": _idx_out(self.escapes),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(gaussian_from_json(d) for d in obj["ratios"]),
                   tuple(frozenset(_idx_in(s)) for s in obj["sets"]),
                   int(obj["score"]), int(obj["product_metric"]),
                   tuple(_idx_in(obj.get("escapes", []))))
