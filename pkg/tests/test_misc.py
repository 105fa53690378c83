import numpy as np
import pytest

from aclab.certs import RankOneCertificate
from aclab.cli import _parse_budget
from aclab.config import Budget, default_threads
from aclab.forms import BilinearForm
from aclab.rng import substream
from aclab.structure import rank_one_extract


def test_substreams_are_deterministic_and_distinct():
    a = substream(1, "x", 0).integers(0, 2**32, 8)
    b = substream(1, "x", 0).integers(0, 2**32, 8)
    c = substream(1, "x", 1).integers(0, 2**32, 8)
    d = substream(1, "y", 0).integers(0, 2**32, 8)
    assert np.array_equal(a, b) and not np.array_equal(a, c) and not np.array_equal(a, d)


def test_budget_parsing():
    assert _parse_budget("123").enum_cap == 123
    b = _parse_budget("support_cap=5, ksum_cap=7")
    assert (b.support_cap, b.ksum_cap, b.enum_cap) == (5, 7, Budget().enum_cap)


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("ACLAB_THREADS", "4")
    assert default_threads() == 4


def test_single_demotion_on_two_by_two():
    seed = RankOneCertificate((0,), (0, 1), {0: 1}, {0: 1, 1: 1})
    trace = []
    cert = rank_one_extract(BilinearForm([[1, 1], [1, 2]]), seed, trace)
    assert trace == [(1, 0, 1)]
    assert cert.rows == (0,) and cert.cols == ()


def test_bad_seed_certificate_rejected():
    from aclab.errors import CertificateError
    seed = RankOneCertificate((0,), (0,), {0: 1}, {0: 5})
    with pytest.raises(CertificateError):
        rank_one_extract(BilinearForm([[1, 1], [1, 2]]), seed)
