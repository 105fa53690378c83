"""Point/line model of the event ``(sum b_i x_i)^2 = sum c_i x_i + d``.

Split the variables at ``h = floor(m/2)`` and write ``t1, s1`` for the
b- and c-sums over the first half, ``t2, s2`` over the second.  With

    p = (t2, s2 - t2^2),      l = {y = 2 t1 x + t1^2 - s1 - d},

``p`` lies on ``l`` exactly when ``(t1 + t2)^2 = s1 + s2 + d``.  Points and
lines depend on disjoint variables, so they are independent.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bounds import BoundReport, incidence_mass, st_incidence_report
from .config import C_ST, Budget
from .dist import ValueDistribution, joint_distribution
from .errors import InvalidArgument, InvalidCoefficient
from .forms import RADEMACHER, AtomDistribution, LinearForm
from .scalars import as_rational, format_rational, gaussian_to_json

__all__ = ["PointLineModel", "build_point_line", "incidence_probability", "incidence_report"]


@dataclass(frozen=True)
class PointLineModel:
    """Independent laws of points ``(x, y)`` and lines ``(slope, intercept)``."""

    point_dist: ValueDistribution
    line_dist: ValueDistribution
    split: int

    def to_json(self):
        def enc(law):
            return [{"value": [gaussian_to_json(a), gaussian_to_json(b)], "prob": format_rational(p)}
                    for (a, b), p in law.items()]
        return {"split": self.split, "points": enc(self.point_dist), "lines": enc(self.line_dist)}


def _pair_law(b, c, atom, budget):
    return joint_distribution([LinearForm(b, atom), LinearForm(c, atom)], budget)


def build_point_line(b: Sequence, c: Sequence, d, atom: AtomDistribution | None = None,
                     budget: Budget | None = None) -> PointLineModel:
    atom = atom or RADEMACHER
    b = [as_rational(v) for v in b]
    c = [as_rational(v) for v in c]
    d = as_rational(d)
    m = len(b)
    if len(c) != m:
        raise InvalidArgument("b and c must have equal length")
    if m < 2:
        raise InvalidArgument("need m >= 2")
    if any(v == 0 for v in b):
        raise InvalidCoefficient("all b_i must be nonzero")
    h = m // 2
    first = _pair_law(b[:h], c[:h], atom, budget)
    second = _pair_law(b[h:], c[h:], atom, budget)
    points: dict = defaultdict(Fraction)
    for (t2, s2), p in second.support.items():
        points[(t2, s2 - t2 * t2)] += p
    lines: dict = defaultdict(Fraction)
    for (t1, s1), p in first.support.items():
        lines[(2 * t1, t1 * t1 - s1 - d)] += p
    return PointLineModel(ValueDistribution._trusted(dict(points)),
                          ValueDistribution._trusted(dict(lines)), h)


def incidence_probability(model: PointLineModel) -> Fraction:
    """Exact ``P(p on l)``."""
    return incidence_mass(model.point_dist, model.line_dist)


def incidence_report(model: PointLineModel, constant=C_ST) -> BoundReport:
    return st_incidence_report(model.point_dist, model.line_dist, constant)
