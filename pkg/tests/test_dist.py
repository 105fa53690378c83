import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aclab import oracle
from aclab.config import Budget
from aclab.dist import (ValueDistribution, bilinear_conditional_concentration, bilinear_distribution,
                        concentration, joint_distribution, linear_distribution, monte_carlo_probability,
                        multilinear_concentration, quadratic_concentration, quadratic_distribution,
                        wilson_halfwidth)
from aclab.errors import BudgetExceeded, InvalidArgument
from aclab.forms import (RADEMACHER, AtomDistribution, BilinearForm, LinearForm, MultilinearForm,
                         QuadraticForm, TargetFunction, gen_extremal_bilinear, quadratic_from_square)
from aclab.scalars import GaussianRational

small_ints = st.integers(-4, 4)
atoms = st.sampled_from([RADEMACHER, AtomDistribution.lazy_walker(Fraction(1, 3)),
                         AtomDistribution.finite([(0, Fraction(1, 2)), (1, Fraction(1, 4)), (2, Fraction(1, 4))])])


def as_dict(law):
    return dict(law.support)


def test_all_ones_linear():
    law = linear_distribution(LinearForm([1] * 10))
    assert concentration(law).sup_prob == Fraction(63, 256)
    assert sum(law.support.values()) == 1


def test_extremal_bilinear_zero_probability():
    rep = bilinear_conditional_concentration(gen_extremal_bilinear(4, 4))
    assert rep.sup_prob == Fraction(39, 64)


def test_square_event():
    Q = quadratic_from_square([1, 1, 1], [0, 0, 0], 1)
    assert quadratic_concentration(Q).target_prob == Fraction(3, 4)


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), min_size=1, max_size=7), atoms)
def test_linear_law_matches_enumeration(coeffs, atom):
    law = linear_distribution(LinearForm(coeffs, atom))
    assert as_dict(law) == oracle.linear_law(coeffs, atom)


@given(st.lists(st.tuples(small_ints, small_ints), min_size=1, max_size=6))
def test_gaussian_coefficients(pairs):
    coeffs = [GaussianRational(a, b) for a, b in pairs]
    law = linear_distribution(LinearForm(coeffs))
    assert as_dict(law) == oracle.linear_law(coeffs, RADEMACHER)


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_bilinear_law_matches_enumeration(m, n, data):
    A = [[data.draw(small_ints) for _ in range(n)] for _ in range(m)]
    law = bilinear_distribution(BilinearForm(A))
    assert as_dict(law) == oracle.bilinear_law(A, RADEMACHER, RADEMACHER)


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_bilinear_affine_target(m, n, data):
    A = [[data.draw(small_ints) for _ in range(n)] for _ in range(m)]
    w = [data.draw(small_ints) for _ in range(n)]
    f = TargetFunction.affine(w, data.draw(small_ints))
    rep = bilinear_conditional_concentration(BilinearForm(A), f)
    assert rep.target_prob == oracle.bilinear_event(A, f, RADEMACHER, RADEMACHER)


def test_bilinear_table_target_and_lazy_atoms():
    A = [[1, 2, 0], [0, 1, -1]]
    lazy = AtomDistribution.lazy_walker(Fraction(1, 4))
    table = {y: sum(y) for y in itertools.product([-1, 0, 1], repeat=3)}
    f = TargetFunction.from_table(table)
    rep = bilinear_conditional_concentration(BilinearForm(A, lazy, lazy), f)
    assert rep.target_prob == oracle.bilinear_event(A, f, lazy, lazy)


@given(st.integers(1, 5), st.data())
def test_quadratic_law_and_permutation_invariance(n, data):
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = A[j][i] = data.draw(small_ints)
    lin = [data.draw(small_ints) for _ in range(n)]
    law = as_dict(quadratic_distribution(QuadraticForm(A, lin)))
    assert law == oracle.quadratic_law(A, lin, RADEMACHER)
    perm = data.draw(st.permutations(range(n)))
    B = [[A[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
    assert as_dict(quadratic_distribution(QuadraticForm(B, [lin[p] for p in perm]))) == law


def test_multilinear_against_enumeration():
    rng = np.random.default_rng(0)
    coeffs = {(i, j, k): int(rng.integers(-2, 3)) for i in range(2) for j in range(2) for k in range(2)}
    M = MultilinearForm(3, (2, 2, 2), coeffs)
    f = TargetFunction.constant(0)
    rep = multilinear_concentration(M, f)
    assert rep.target_prob == oracle.multilinear_event(coeffs, (2, 2, 2), [RADEMACHER] * 3, f)


def test_joint_distribution_tuple_keys():
    vs = [[1, 1, 0], [0, 1, 1]]
    law = joint_distribution([LinearForm(v) for v in vs])
    assert as_dict(law) == oracle.joint_law(vs, RADEMACHER)


def test_thread_count_does_not_change_results():
    A = [[(i * j) % 5 - 2 for j in range(9)] for i in range(8)]
    one = bilinear_conditional_concentration(BilinearForm(A), budget=Budget(threads=1))
    many = bilinear_conditional_concentration(BilinearForm(A), budget=Budget(threads=4))
    assert one == many


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        linear_distribution(LinearForm([2 ** j for j in range(16)]), Budget(support_cap=1000))
    with pytest.raises(BudgetExceeded):
        bilinear_conditional_concentration(gen_extremal_bilinear(4, 12), budget=Budget(enum_cap=100))


def test_value_distribution_validates():
    with pytest.raises(InvalidArgument):
        ValueDistribution({0: Fraction(1, 2)})
    d = ValueDistribution({0: Fraction(1, 2), 1: Fraction(1, 2)})
    assert d.prob(1) == Fraction(1, 2) and d.prob(5) == 0


def test_monte_carlo_is_reproducible_and_covers_truth():
    atoms_ = [RADEMACHER] * 6

    def event(x):
        return sum(x) == 0
    est1, hw1 = monte_carlo_probability(event, atoms_, 4000, seed=7)
    est2, hw2 = monte_carlo_probability(event, atoms_, 4000, seed=7)
    assert (est1, hw1) == (est2, hw2)
    assert abs(est1 - 20 / 64) <= hw1
    assert wilson_halfwidth(0, 100) > 0
