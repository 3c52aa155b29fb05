"""Integral periods of the weight filtration for rank 2, q = 4 and q = 10.

For each pair i < m the period b is the least exponent for which ell^b splits
W^-i / W^-m equivariantly over Z_3.  The table shows b next to the valuation
cap v_bound(i, m) and the linear bound c_bound.
"""

from proell.eigenlift import sweep_periods
from proell.galois import sigma_cyclotomic
from proell.ncseries import Alphabet

alphabet = Alphabet.punctured(2)
for q in (4, 10):
    action = sigma_cyclotomic(q, alphabet, 3, 4)
    print(f"q = {q}")
    print(f"{'i':>3} {'m':>3} {'b':>3} {'v_bound':>8} {'c_bound':>8}")
    nonzero = 0
    for rec in sweep_periods(action, 3, 7):
        nonzero += rec.b > 0
        print(f"{rec.i:>3} {rec.m:>3} {rec.b:>3} {rec.v_bound:>8} {str(rec.c_bound):>8}")
    print(f"rows needing a denominator: {nonzero}\n")
