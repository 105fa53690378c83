from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from aclab import oracle
from aclab.dist import quadratic_concentration
from aclab.errors import InvalidCoefficient
from aclab.forms import AtomDistribution, quadratic_from_square
from aclab.incidence import build_point_line, incidence_probability, incidence_report

nz = st.integers(-4, 4).filter(bool)


@given(st.integers(2, 8), st.data())
def test_incidence_equals_direct_event(m, data):
    b = [data.draw(nz) for _ in range(m)]
    c = [data.draw(st.integers(-4, 4)) for _ in range(m)]
    d = data.draw(st.integers(-10, 10))
    model = build_point_line(b, c, d)
    p = incidence_probability(model)
    assert p == oracle.incidence_direct(b, c, d, AtomDistribution.rademacher())
    assert p == quadratic_concentration(quadratic_from_square(b, c, d)).target_prob
    assert incidence_report(model).passes


def test_lazy_atoms_and_split():
    lazy = AtomDistribution.lazy_walker(Fraction(1, 4))
    model = build_point_line([1, 2, 1, 1, 3], [0, 1, 0, 2, 1], 1, atom=lazy)
    assert model.split == 2
    assert incidence_probability(model) == oracle.incidence_direct([1, 2, 1, 1, 3], [0, 1, 0, 2, 1], 1, lazy)


def test_zero_b_rejected():
    with pytest.raises(InvalidCoefficient):
        build_point_line([1, 0], [1, 1], 0)
