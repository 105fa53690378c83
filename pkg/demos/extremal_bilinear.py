"""Zero probability of x^T J y for the all-ones matrix J.

The all-ones form factors as (sum x)(sum y), so it vanishes when either sum
does.  The exact probability decays like n^(-1/2); the last column shows it
stays above 0.5 n^(-1/2).
"""
import math

from aclab.dist import bilinear_conditional_concentration
from aclab.forms import gen_extremal_bilinear
from aclab.oracle import comb_ratio

print(f"{'n':>3} {'P(x^T J y = 0)':>18} {'1-(1-C(n,n/2)/2^n)^2':>22} {'0.5/sqrt(n)':>12}")
for n in range(2, 13, 2):
    p = bilinear_conditional_concentration(gen_extremal_bilinear(n, n)).target_prob
    q = comb_ratio(n)
    print(f"{n:>3} {str(p):>18} {str(1 - (1 - q) ** 2):>22} {0.5 / math.sqrt(n):>12.3f}")
