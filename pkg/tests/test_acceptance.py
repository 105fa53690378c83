"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""
import math

import pytest

from aclab import oracle
from aclab.config import HEIGHT_RATIO_FROZEN
from aclab.decouple import shatter_family_size
from aclab.verify import run_suite

# criterion number -> (suite name, runtime limit in seconds)
CRITERIA = {
    1: ("lo", 60),
    2: ("bilo", 300),
    3: ("decouple", 120),
    4: ("quad", 600),
    5: ("rank1", 60),
    6: ("heights", 120),
    7: ("shatter", 300),
    8: ("incidence", 300),
    9: ("halasz", 300),
    10: ("tuple", 120),
}


def _extra(number, res):
    """Checks beyond the suite's own pass flag."""
    if number == 1:
        return oracle.comb_ratio(4) * 8 == 3
    if number == 6:
        return res.metrics["max_ratio"] <= HEIGHT_RATIO_FROZEN
    if number == 7:
        sizes = all(shatter_family_size(n) == math.ceil(5 * math.log(n) / math.log(17 / 16))
                    for n in (8, 12, 16))
        rates = all(res.metrics[f"success_n{n}"] >= 0.95 for n in (8, 12, 16))
        return sizes and rates
    return True


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    name, limit = CRITERIA[number]
    res = run_suite(name)
    ok = res.passed and res.seconds < limit and _extra(number, res)
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({name}): "
          f"{res.cases} cases, {len(res.failures)} failures, {res.seconds:.1f}s < {limit}s, "
          f"metrics={ {k: str(v) for k, v in res.metrics.items()} }")
    assert res.passed, res.failures[:5]
    assert res.seconds < limit
    assert _extra(number, res)
