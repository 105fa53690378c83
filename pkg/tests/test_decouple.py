import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aclab import oracle
from aclab.decouple import (Partition, PartitionFamily, decoupling_check, equal_splits, is_balanced,
                            quad_to_bilinear, reduction_check, shatter_build, shatter_family_size,
                            shatter_verify)
from aclab.errors import InvalidArgument
from aclab.forms import QuadraticForm, gen_random_symmetric


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_decoupling_check_matches_direct_sum(ny, nz, data):
    table = [[data.draw(st.booleans()) for _ in range(nz)] for _ in range(ny)]
    yw = [data.draw(st.integers(1, 5)) for _ in range(ny)]
    zw = [data.draw(st.integers(1, 5)) for _ in range(nz)]
    lhs, rhs, holds = decoupling_check(table, y_weights=yw, z_weights=zw)
    Ty, Tz = sum(yw), sum(zw)
    p = sum(Fraction(yw[a] * zw[b], Ty * Tz) for a in range(ny) for b in range(nz) if table[a][b])
    pair = sum(Fraction(yw[a] * zw[b] * zw[c], Ty * Tz * Tz)
               for a in range(ny) for b in range(nz) for c in range(nz) if table[a][b] and table[a][c])
    assert lhs == p * p and rhs == pair and holds and lhs <= rhs


def test_partition_validation():
    with pytest.raises(InvalidArgument):
        Partition((0,), (0, 1))
    with pytest.raises(InvalidArgument):
        Partition((0,), (1, 2))
    assert Partition((2, 0), (1,)).Y == (0, 2)


def test_equal_splits_count():
    assert len(list(equal_splits(6))) == 20
    assert all(len(p.Y) == 3 for p in equal_splits(5))


def test_single_split_misses_quadruple():
    assert shatter_verify(4, [Partition((0, 1), (2, 3))]) == (0, 2, 1, 3)


def test_family_size_values():
    assert [shatter_family_size(n) for n in (8, 12, 16)] == [
        int(np.ceil(5 * np.log(n) / np.log(17 / 16))) for n in (8, 12, 16)]


@given(st.integers(4, 7), st.integers(1, 8), st.integers(0, 10**6))
def test_shatter_verify_matches_oracle_and_is_permutation_invariant(n, size, seed):
    rng = np.random.default_rng(seed)
    fam = []
    for _ in range(size):
        perm = rng.permutation(n)
        h = (n + 1) // 2
        fam.append(Partition(tuple(perm[:h].tolist()), tuple(perm[h:].tolist())))
    got = shatter_verify(n, fam) is None
    assert got == oracle.shatters(n, fam)
    sigma = rng.permutation(n)
    moved = [Partition(tuple(int(sigma[i]) for i in p.Y), tuple(int(sigma[i]) for i in p.Z)) for p in fam]
    assert (shatter_verify(n, moved) is None) == got


@pytest.mark.parametrize("n", [5, 8, 12])
def test_shatter_build_succeeds_and_roundtrips(n):
    fam = shatter_build(None, 0, seed=11, n=n)
    assert shatter_verify(n, fam) is None
    if n > 7:
        assert len(fam) == shatter_family_size(n)
    again = PartitionFamily.from_json(json.loads(json.dumps(fam.to_json())))
    assert again.partitions == fam.partitions


def test_shatter_build_is_seed_deterministic():
    a = shatter_build(None, 0, seed=5, n=10)
    b = shatter_build(None, 0, seed=5, n=10)
    assert a.partitions == b.partitions


def test_balance():
    Q = QuadraticForm([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]])
    assert is_balanced(Q, Partition((0, 2), (1, 3)), 2)
    assert not is_balanced(Q, Partition((0, 1), (2, 3)), 2)


def test_quad_to_bilinear_coefficients():
    Q = QuadraticForm([[1, 2, 3], [2, 0, 5], [3, 5, 1]])
    B, _ = quad_to_bilinear(Q, Partition((0, 1), (2,)))
    assert [list(r) for r in B.matrix] == [[6], [10]]


def _direct_reduction(Q, p, c):
    """Pair and decoupled probabilities by plain enumeration."""
    A, L, n = Q.matrix, Q.linear, Q.n

    def value(x):
        return sum(A[i][j] * x[i] * x[j] for i in range(n) for j in range(n)) - sum(
            l * xi for l, xi in zip(L, x))

    Y, Z = p.Y, p.Z
    pair = Fraction(0)
    for y in itertools.product((-1, 1), repeat=len(Y)):
        hits = 0
        for z in itertools.product((-1, 1), repeat=len(Z)):
            x = [0] * n
            for i, v in zip(Y, y):
                x[i] = v
            for i, v in zip(Z, z):
                x[i] = v
            hits += value(x) == c
        pair += Fraction(hits * hits, 2 ** (len(Y) + 2 * len(Z)))

    def g(z):
        return sum(L[j] * zj for j, zj in zip(Z, z)) - sum(
            A[i][j] * zi * zj for i, zi in zip(Z, z) for j, zj in zip(Z, z))

    dec = Fraction(0)
    for y in itertools.product((-1, 1), repeat=len(Y)):
        for z in itertools.product((-1, 1), repeat=len(Z)):
            for w in itertools.product((-1, 1), repeat=len(Z)):
                lhs = sum(2 * A[i][j] * yi * (zj - wj) for i, yi in zip(Y, y) for j, zj, wj in zip(Z, z, w))
                dec += lhs == g(z) - g(w)
    return pair, dec / 2 ** (len(Y) + 2 * len(Z))


@pytest.mark.parametrize("seed", range(6))
def test_reduction_check_against_enumeration(seed):
    Q = gen_random_symmetric(5, seed)
    p = next(iter(equal_splits(5)))
    res = reduction_check(Q, p)
    pair, dec = _direct_reduction(Q, p, res.c)
    assert res.p_pair == pair and res.p_decoupled == dec
    assert res.holds
