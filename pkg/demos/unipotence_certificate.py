"""Decide unipotence of small 3-adic representations two ways.

A rep trivial mod 3^N that is compatible with the cyclotomic action through
a target matrix M must kill every eigenvector beyond the levels where q^k
matches an eigenvalue of conjugation by M.  We run that certification on a
unipotent example, then show that a diagonal rep admits no compatible M at
all, and compare both with the direct nilpotence test.
"""

from proell.galois import sigma_cyclotomic
from proell.ncseries import Alphabet
from proell.reps import MatrixRep, certify_pipeline, diagonal_candidates, is_unipotent, socle_filtration

ELL = 3
alphabet = Alphabet.punctured(1)
action = sigma_cyclotomic(4, alphabet, ELL, 6)

unip = MatrixRep.from_ints([[[1, 9], [0, 1]]], ELL, alphabet)
report = certify_pipeline(unip, action, [[4, 0], [0, 1]], n=2)
print("rho(gamma) = [[1, 9], [0, 1]] with M = diag(4, 1)")
for key, value in report.to_json().items():
    print(f"  {key}: {value}")
print(f"  socle layers: {socle_filtration(unip).dims}\n")

diag = MatrixRep.from_ints([[[10, 0], [0, 1]]], ELL, alphabet)
units = [u for u in range(-20, 21) if u % ELL]
reports = diagonal_candidates(diag, action, 2, units)
failed = sum(r.status == "equivariance-failure" for r in reports)
print("rho(gamma) = diag(10, 1)")
print(f"  diagonal targets tried: {len(reports)}, equivariance failures: {failed}")
ok, cert = is_unipotent(diag)
print(f"  direct test: unipotent = {ok}, witness trace = {cert.witness_trace}")
