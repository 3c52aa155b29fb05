"""Lift every graded class of the rank-1 group ring to an eigenvector.

The cyclotomic action gamma -> gamma^q on Z_3[[T]] (T = gamma - 1) has the
powers of log(1+T) as eigenvectors, with eigenvalues q^k.  We recover them by
level-by-level lifting and watch the denominators grow like -floor(log_3(n-1)).
"""

from proell.eigenlift import dense_eigenbasis
from proell.filtration import iadic_valuation
from proell.galois import sigma_cyclotomic
from proell.ncseries import Alphabet

ELL, Q, N = 3, 4, 8

alphabet = Alphabet.punctured(1)
action = sigma_cyclotomic(Q, alphabet, ELL, N)
basis = dense_eigenbasis(action, N, r=2)

print(f"action gamma -> gamma^{Q} over Z_{ELL}, truncation T^{N}")
print(f"radius threshold r_alpha = {basis.threshold}, using r = {basis.r}\n")
for lf in basis.lifts:
    print(f"level {lf.level:>2}  eigenvalue {str(lf.eigenvalue.rational_guess()):>6}  lift {lf.lift!r}")

log = basis.lifts[1].lift
print("\ndenominators of the first lift, log(1+T):")
for n in range(2, N + 1):
    print(f"  v_{n} = {iadic_valuation(log, n)}")

print(f"\nspans: {basis.spans}  unitriangular: {basis.unitriangular}  "
      f"all convergence reports consistent: {basis.all_consistent}")
