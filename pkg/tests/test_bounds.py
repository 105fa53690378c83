import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from aclab import oracle
from aclab.bounds import (bilo_bound, bilo_bound_holds, halasz2d_report, halasz_bound_report, halasz_rk,
                          incidence_mass, lo_bound, lo_bound_holds, row_zero_count_distribution,
                          st_incidence_report, subspace_deficiency_2d)
from aclab.dist import ValueDistribution
from aclab.errors import BudgetExceeded, InvalidArgument
from aclab.config import Budget
from aclab.forms import BilinearForm, LinearForm


def test_lo_bound_values():
    assert lo_bound(1) == 0.5 and lo_bound(4) == 0.5 and lo_bound(16) == 0.25
    assert lo_bound_holds(Fraction(1, 4), 16)
    assert not lo_bound_holds(Fraction(1, 4) + Fraction(1, 10**9), 16)


@given(st.integers(1, 400), st.fractions(min_value=0, max_value=1, max_denominator=500))
def test_lo_bound_holds_matches_float_check(m, p):
    b = min(0.5, 1 / math.sqrt(m))
    if abs(float(p) - b) > 1e-9:
        assert lo_bound_holds(p, m) == (float(p) <= b)


@given(st.integers(1, 10**4), st.fractions(min_value=0, max_value=1, max_denominator=300))
def test_bilo_bound_holds_matches_float_check(r, p):
    b = bilo_bound(r)
    if abs(float(p) - b) > 1e-9:
        assert bilo_bound_holds(p, r) == (float(p) <= b)


def test_bilo_bound_is_trivial_for_small_r():
    assert bilo_bound(26) == 1 and bilo_bound(27) < 1


def test_halasz_rk_against_direct_count():
    for coeffs in ([1, 2, 3], [1, 1, 1, 1], [1, -1, 2], [3, 5, 7, 11]):
        for k in (1, 2):
            assert halasz_rk(coeffs, k) == oracle.ordered_ksum_collisions(coeffs, k)


def test_halasz_rk_budget():
    with pytest.raises(BudgetExceeded):
        halasz_rk(list(range(1, 15)), 4, Budget(ksum_cap=1000))


def test_halasz_report_all_ones():
    rep = halasz_bound_report(LinearForm([1, 1, 1, 1]), 1)
    assert rep.prob == Fraction(3, 8) and rep.details["R_k"] == 16 and rep.passes
    with pytest.raises(InvalidArgument):
        halasz_bound_report(LinearForm([1, 0, 1]), 1)


def test_subspace_deficiency_and_2d_report():
    vecs = [(1, 0), (0, 1), (1, 1), (2, 2)]
    # removing the two vectors on the diagonal leaves a spanning set, removing 3 forces a line
    assert subspace_deficiency_2d(vecs) == 2
    rep = halasz2d_report(vecs)
    assert rep.passes and rep.details["m"] == 2


def test_row_zero_count_distribution_sums_to_one():
    B = BilinearForm([[1, 1, 0], [1, -1, 1], [0, 2, 2]])
    W = row_zero_count_distribution(B, range(3))
    assert sum(W.support.values()) == 1
    # direct: number of rows i with (A y)_i == 0
    import itertools
    want = {}
    for y in itertools.product([-1, 1], repeat=3):
        c = sum(1 for row in B.matrix if sum(a * v for a, v in zip(row, y)) == 0)
        want[c] = want.get(c, 0) + Fraction(1, 8)
    assert {int(k.re) if hasattr(k, "re") else int(k): v for k, v in W.support.items()} == want


def test_incidence_mass_and_st_report():
    pts = ValueDistribution({(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)})
    lines = ValueDistribution({(1, 0): Fraction(1, 2), (0, 5): Fraction(1, 2)})
    assert incidence_mass(pts, lines) == Fraction(1, 2)
    assert st_incidence_report(pts, lines).passes
