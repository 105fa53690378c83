import json
from fractions import Fraction

import pytest

from aclab.scalars import GaussianRational
from aclab.errors import InvalidArgument, ParseError
from aclab.forms import (AtomDistribution, BilinearForm, LinearForm, MultilinearForm, QuadraticForm,
                         TargetFunction, form_from_json, form_to_json, gen_extremal_bilinear,
                         gen_random_bilinear, parse_matrix_csv, parse_matrix_json)


def test_lazy_walker_law():
    a = AtomDistribution.lazy_walker(Fraction(1, 4))
    assert dict(a.support) == {0: Fraction(1, 2), 1: Fraction(1, 4), -1: Fraction(1, 4)}
    assert a.is_symmetric()


def test_rademacher_difference():
    diff = AtomDistribution.rademacher().difference()
    assert dict(diff.support) == {-2: Fraction(1, 4), 0: Fraction(1, 2), 2: Fraction(1, 4)}


def test_csv_parsing_and_errors():
    assert parse_matrix_csv("1, 1/2\n-3, 2i\n")[1][1] == GaussianRational(0, 2)
    rows = parse_matrix_csv("1,1/2\n-3,4\n")
    assert rows[0][1] == Fraction(1, 2)
    with pytest.raises(ParseError) as exc:
        parse_matrix_csv("1,2\n3\n")
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_matrix_json({"rows": [[{"re": "1"}], [{"re": "1"}, {"re": "2"}]]})


def test_bilinear_row_counts():
    B = BilinearForm([[1, 0, 0], [1, 1, 1]])
    assert B.r == 1 and B.shape == (2, 3)
    assert gen_random_bilinear(5, 6, 3, seed=1).r >= 3


def test_quadratic_requires_symmetry():
    with pytest.raises(InvalidArgument):
        QuadraticForm([[0, 1], [2, 0]])


@pytest.mark.parametrize("form", [
    LinearForm([1, Fraction(-2, 3), 0]),
    gen_extremal_bilinear(2, 3),
    QuadraticForm([[1, 2], [2, 0]], [1, -1]),
    MultilinearForm(3, (2, 1, 2), {(0, 0, 1): 3, (1, 0, 0): -1}),
])
def test_form_json_roundtrip(form):
    assert form_from_json(json.loads(json.dumps(form_to_json(form)))) == form


def test_multilinear_json_uses_one_based_indices():
    M = MultilinearForm(2, (2, 2), {(0, 1): 5})
    obj = form_to_json(M)
    assert obj["coeffs"] == [{"index": [1, 2], "value": {"re": "5"}}]


@pytest.mark.parametrize("f", [TargetFunction.constant(3), TargetFunction.affine([1, -1], 2),
                               TargetFunction.from_table({(1, 1): 0, (1, -1): 2})])
def test_target_roundtrip(f):
    again = TargetFunction.from_json(json.loads(json.dumps(f.to_json())))
    assert again((1, -1)) == f((1, -1))
