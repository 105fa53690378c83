import json
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from aclab import oracle
from aclab.certs import APCertificate, GAPCertificate, RankOneCertificate, TupleStructure
from aclab.errors import AllZero, DegenerateMap
from aclab.forms import (RADEMACHER, AtomDistribution, BilinearForm, QuadraticForm, gen_near_multiple_tuple,
                         gen_planted_gap, gen_planted_rank_one)
from aclab.structure import (commensurability, count_low_height, degenerate_pair, dense_principal_minor,
                             expected_commensurability, gap_fit, rank_one_extract, shortest_ap,
                             tuple_structure)

nonzero_ints = st.integers(-30, 30)


def test_shortest_ap_example():
    c = shortest_ap([2, 4, -6])
    assert c.d == 2 and c.length == 5 and c.verify([2, 4, -6])
    with pytest.raises(AllZero):
        shortest_ap([0, 0])


@given(st.lists(st.fractions(min_value=-6, max_value=6, max_denominator=4), min_size=1, max_size=5)
       .filter(lambda v: any(v)))
def test_shortest_ap_is_minimal(values):
    assert shortest_ap(values).length == oracle.shortest_progression_length(values)


def test_commensurability_floor_and_rational():
    # R = 1 beats any floor below 1
    assert commensurability([3, 3], 100, Fraction(1, 4)) == 1
    val = commensurability([1, 1000], 100, Fraction(1, 4))
    assert isinstance(val, float) and val == pytest.approx(100 ** (-0.5 + 1 / 16))


@pytest.mark.parametrize("mode", ["comm", "comm_star"])
def test_expected_commensurability_matches_enumeration(mode):
    rows = [[1, 2, 0, 1, 3], [2, 4, 1, 2, 6]]
    for r, eps in ((4, Fraction(1, 3)), (100, Fraction(1, 4))):
        got = expected_commensurability(rows, RADEMACHER, r, eps, mode)
        rat, floor = oracle.expected_comm(rows, RADEMACHER, r, eps, mode)
        assert got.rational_part == rat and got.floor_mass == floor


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
       st.integers(1, 300), st.integers(1, 20))
def test_count_low_height_matches_brute_force(a, b, c, d, n, q):
    assume(a * d != b * c)
    assert count_low_height(a, b, c, d, n, q) == oracle.low_height_count(a, b, c, d, n, q)


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
       st.integers(1, 200), st.integers(1, 15))
def test_count_low_height_is_monotone(a, b, c, d, n, q):
    assume(a * d != b * c)
    base = count_low_height(a, b, c, d, n, q)
    assert count_low_height(a, b, c, d, n + 1, q) >= base
    assert count_low_height(a, b, c, d, n, q + 1) >= base


def test_count_low_height_example():
    assert count_low_height(1, 0, 1, 1, 10, 20) == 10
    with pytest.raises(DegenerateMap):
        count_low_height(2, 4, 1, 2, 10, 5)


def test_degenerate_pair():
    a = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
    b = [2 * x for x in a]
    b[0] += 1
    pair = degenerate_pair(a, b, 15, 5)
    assert pair is not None
    l1, l2 = pair
    assert sum(1 for x, y in zip(a, b) if l1 * x == l2 * y) >= 7
    assert degenerate_pair([1, 2, 3, 4], [1, 5, 7, 11], 1, 3) is None


@pytest.mark.parametrize("seed", range(10))
def test_tuple_structure_recovers_planted_sets(seed):
    rng = np.random.default_rng(seed)
    n = 10
    S2 = tuple(sorted(rng.choice(n, 2, replace=False).tolist()))
    S3 = tuple(sorted(set(rng.choice(n, 2, replace=False).tolist()) | {S2[0]}))
    rows = gen_near_multiple_tuple(n, [2, -3], [S2, S3], seed)
    ts = tuple_structure(rows)
    assert list(ts.ratios) == [Fraction(1, 2), Fraction(-1, 3)]
    assert list(ts.sets) == [frozenset(S2), frozenset(S3)]
    assert ts.score == 1 + (1 if set(S3) - set(S2) else 0)


@pytest.mark.parametrize("seed", range(15))
def test_rank_one_extract_planted(seed):
    rng = np.random.default_rng(100 + seed)
    c = int(rng.integers(0, 3))
    m, n = int(rng.integers(c + 2, 10)), int(rng.integers(2 * c + 2, 10))
    B, _ = gen_planted_rank_one(m, n, c, 0, seed)
    cert = rank_one_extract(B)
    assert cert.verify(B.matrix) and oracle.is_rank_one(B.matrix, cert.rows, cert.cols)
    assert len(cert.rows) >= m - c and len(cert.cols) >= n - 2 * c


def test_gap_fit_planted():
    coeffs, bad = gen_planted_gap(12, Fraction(3, 7), 5, 2, 1)
    cert = gap_fit(coeffs, 5, 2)
    assert cert is not None and cert.verify(coeffs)
    assert set(cert.exceptional) == bad
    assert gap_fit([1, Fraction(1, 1000)], 3, 0) is None


@given(st.integers(3, 9), st.floats(0.1, 0.9), st.integers(0, 4), st.integers(0, 10**6))
def test_dense_principal_minor_matches_networkx_k_core(n, density, t, seed):
    rng = np.random.default_rng(seed)
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                A[i][j] = A[j][i] = int(rng.integers(1, 4))
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from((i, j) for i in range(n) for j in range(i + 1, n) if A[i][j])
    assert dense_principal_minor(QuadraticForm(A), t) == tuple(sorted(nx.k_core(G, t).nodes))


def test_certificates_roundtrip_through_json():
    B, _ = gen_planted_rank_one(5, 6, 1, 0, 3)
    for cert, cls in ((rank_one_extract(B), RankOneCertificate), (shortest_ap([2, 4, -6]), APCertificate),
                      (tuple_structure([[1, 2, 3], [2, 4, 7]]), TupleStructure)):
        again = cls.from_json(json.loads(json.dumps(cert.to_json())))
        assert again == cert
    coeffs, _ = gen_planted_gap(8, 2, 3, 0, 0)
    g = gap_fit(coeffs, 3, 0)
    assert GAPCertificate.from_json(json.loads(json.dumps(g.to_json()))) == g


def test_rank_one_certificate_rejects_bad_entry():
    cert = RankOneCertificate((0, 1), (0, 1), {0: 1, 1: 2}, {0: 1, 1: 1})
    assert cert.verify([[1, 1], [2, 2]])
    assert not cert.verify([[1, 1], [2, 3]])
