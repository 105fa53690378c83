"""Follow one quadratic form through the decoupling reduction.

For each equal split (Y, Z) the squared point probability of x^T A x - L.x
is compared with the probability of the decoupled bilinear event, both
computed exactly.
"""
from aclab.decouple import equal_splits, is_balanced, reduction_check
from aclab.forms import gen_random_symmetric

Q = gen_random_symmetric(6, seed=3)
for row in Q.matrix:
    print(" ".join(f"{str(a):>3}" for a in row))
print("linear part", [str(a) for a in Q.linear])
for p in equal_splits(6):
    if not is_balanced(Q, p, 1):
        continue
    res = reduction_check(Q, p)
    print(f"Y={p.Y} Z={p.Z}  P^2={res.p_event ** 2}  pair={res.p_pair}  decoupled={res.p_decoupled}"
          f"  {'ok' if res.holds else 'VIOLATED'}")
