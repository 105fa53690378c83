"""Recover planted arithmetic structure and print the certificates.

1. A rank-one block with two corrupted rows.
2. Coefficients that are small multiples of 3/7 except at two indices.
3. A tuple v_1, 2 v_1, -3 v_1 perturbed on small index sets.
"""
import json

from aclab.forms import gen_near_multiple_tuple, gen_planted_gap, gen_planted_rank_one
from aclab.structure import gap_fit, rank_one_extract, tuple_structure

B, truth = gen_planted_rank_one(8, 9, 2, 0, seed=4)
trace = []
cert = rank_one_extract(B, trace=trace)
print("rank-one block", cert.shape, "after demotions", trace)
print(json.dumps(cert.to_json()))

coeffs, bad = gen_planted_gap(12, "3/7", 5, 2, seed=1)
g = gap_fit(coeffs, 5, 2)
print("\ngap step", g.d, "exceptions (0-based)", sorted(g.exceptional), "planted", sorted(bad))

rows = gen_near_multiple_tuple(10, [2, -3], [(1, 4), (4, 7, 8)], seed=2)
ts = tuple_structure(rows)
print("\ntuple ratios", [str(d) for d in ts.ratios], "sets", [sorted(s) for s in ts.sets],
      "score", ts.score)
