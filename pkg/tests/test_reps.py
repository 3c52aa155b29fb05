import random
from fractions import Fraction

import pytest
import sympy

from oracles import charpoly_is_unipotent, sym_matrix
from reps_fixtures import non_unipotent_rep, trivial_mod_rep, unipotent_rep
from proell import linalg
from proell.eigenlift import HypothesisUnmet
from proell.galois import sigma_cyclotomic, sigma_ihara
from proell.ncseries import Alphabet, GroupWord, NcSeries, log_grouplike, magnus_embed
from proell.padics import get_precision
from proell.reps import (
    MatrixRep,
    bound_N,
    certify_pipeline,
    diagonal_candidates,
    evaluate_series,
    genus2_fixture,
    is_trivial_mod,
    is_unipotent,
    magnus_check,
    socle_filtration,
    triviality_level,
)

ELL = 3
A1 = Alphabet.punctured(1)
A2 = Alphabet.punctured(2)


def rep(images, alphabet=None, ell=ELL):
    return MatrixRep.from_ints(images, ell, alphabet)


def test_trivial_mod_examples():
    ident = MatrixRep.trivial(A2, ELL, 3)
    assert all(is_trivial_mod(ident, n) for n in (1, 5, 40))
    r = rep([[[10, 0], [0, 1]]])
    assert is_trivial_mod(r, 2) and not is_trivial_mod(r, 3)
    u = rep([[[1, 3], [0, 1]]])
    assert is_trivial_mod(u, 1) and not is_trivial_mod(u, 2)
    assert triviality_level(u) == 1
    # 1 - 1 is zero only to the working precision
    assert triviality_level(ident) == get_precision()


def test_rep_validation():
    with pytest.raises(ValueError):
        rep([[[3, 0], [0, 1]]])
    with pytest.raises(ValueError):
        rep([[[1, 0, 0], [0, 1, 0]]])
    with pytest.raises(ValueError):
        MatrixRep.from_ints([[[1, 0], [0, 1]]], ELL, A2)


def test_rep_json_roundtrip():
    r = rep([[[1, 9], [0, 1]], [[10, 0], [9, 1]]], A2)
    back = MatrixRep.from_json(r.to_json())
    assert back.to_json() == r.to_json()


def test_evaluate_polynomial_generator():
    r = rep([[[1, 9], [0, 1]], [[10, 0], [9, 1]]], A2)
    a = NcSeries(A2, ELL, 3, {(): 1, (0,): 1})
    ev = evaluate_series(r, a, 1)
    assert linalg.to_ints(ev.matrix) == [[1, 9], [0, 1]]


def test_evaluate_magnus_of_word():
    r = rep([[[1, 9], [0, 1]], [[10, 0], [9, 1]]], A2)
    w = GroupWord.parse(A2, [[0, 1], [1, -1]])
    ev, direct = magnus_check(r, w, 6, 1)
    diff = linalg.matrix_valuation(linalg.matsub(ev.matrix, direct))
    assert diff >= ev.tail_exponent


def test_evaluate_log_of_unipotent():
    r = rep([[[1, 9], [0, 1]]], A1)
    a = log_grouplike(NcSeries(A1, ELL, 8, {(): 1, (0,): 1}))
    ev = evaluate_series(r, a, 1)
    # N^2 = 0 so the matrix logarithm is exactly N
    assert [[x.rational_guess() for x in row] for row in ev.matrix] == [[0, 9], [0, 0]]


def test_evaluate_log_matches_matrix_log_oracle():
    rng = random.Random(4)
    for _ in range(5):
        (img,) = trivial_mod_rep(2, 1, rng, ELL, 2)
        r = rep([img], A1)
        a = log_grouplike(NcSeries(A1, ELL, 10, {(): 1, (0,): 1}))
        ev = evaluate_series(r, a, 1)
        n = sym_matrix(img) - sympy.eye(2)
        want = sympy.zeros(2)
        for j in range(1, 10):
            want += sympy.Rational((-1) ** (j + 1), j) * n**j
        for i in range(2):
            for j in range(2):
                assert ev.matrix[i][j] == Fraction(int(want[i, j].p), int(want[i, j].q))


def test_evaluate_requires_small_radius():
    r = rep([[[1, 3], [0, 1]]], A1)
    with pytest.raises(HypothesisUnmet):
        evaluate_series(r, NcSeries.variable(0, A1, ELL, 3), 1)


def test_evaluate_ring_map_on_polynomials():
    rng = random.Random(9)
    for _ in range(10):
        r = rep(trivial_mod_rep(2, 2, rng, ELL, 2), A2)
        a = NcSeries(A2, ELL, 7, {tuple(rng.randrange(2) for _ in range(rng.randint(0, 3))): rng.randint(-5, 5) for _ in range(4)})
        b = NcSeries(A2, ELL, 7, {tuple(rng.randrange(2) for _ in range(rng.randint(0, 3))): rng.randint(-5, 5) for _ in range(4)})
        lhs = evaluate_series(r, a * b, 1).matrix
        rhs = linalg.matmul(evaluate_series(r, a, 1).matrix, evaluate_series(r, b, 1).matrix)
        assert linalg.is_zero_matrix(linalg.matsub(lhs, rhs))


def test_unipotent_examples():
    ok, cert = is_unipotent(rep([[[1, 5, 2], [0, 1, 7], [0, 0, 1]], [[1, 0, 3], [0, 1, 1], [0, 0, 1]]]))
    assert ok and cert.nilpotency_degree <= 3
    ok, cert = is_unipotent(rep([[[1 + 9, 0], [0, 1]]]))
    assert not ok and cert.witness == (0,) and not cert.witness_trace.is_zero()


def test_unipotence_against_charpoly_oracle():
    rng = random.Random(2024)
    for t in range(40):
        d, gens = rng.choice([2, 3]), rng.choice([1, 2])
        if t % 2:
            images = unipotent_rep(d, gens, rng)
        else:
            images = non_unipotent_rep(d, gens, rng, ELL)
        got, _ = is_unipotent(rep(images))
        assert got == charpoly_is_unipotent(images)


def test_socle_irreducible():
    sf = socle_filtration(rep([[[0, -1], [1, 0]]]))
    assert sf.dims == [0, 2] and sf.quotients_semisimple and sf.radical_dim == 0


def test_socle_unitriangular():
    sf = socle_filtration(rep([[[1, 3], [0, 1]]]))
    assert sf.dims == [0, 1, 2] and sf.quotients_semisimple
    # the fixed line is spanned by e1
    (v,) = sf.layers[0]
    assert v[1].is_zero() and not v[0].is_zero()


def test_socle_block_sum():
    blk = [[1, 3, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    sf = socle_filtration(rep([blk]))
    assert sf.dims == [0, 3, 4] and sf.quotients_semisimple


def test_socle_size_limit():
    with pytest.raises(ValueError):
        socle_filtration(MatrixRep.trivial(A1, ELL, 13))


def test_bound_examples():
    assert bound_N(3, 2).n_min == 1 and bound_N(3, 2).bound == Fraction(3, 4)
    b = bound_N(5, 2)
    assert (b.s, b.bound, b.n_min) == (4, Fraction(5, 16), 1)
    b = bound_N(2, 3)
    assert (b.s, b.epsilon, b.bound, b.n_min) == (2, 1, Fraction(5, 2), 3)
    with pytest.raises(ValueError):
        bound_N(3, 1)
    with pytest.raises(ValueError):
        bound_N(3, 6)


def test_bound_monotone_in_valuation():
    # q = 1 + 3^j u has v(q - 1) = j; N_min never decreases as j grows
    for ell in (3, 5, 7):
        prev = 0
        for j in range(1, 8):
            n = bound_N(ell, 1 + ell**j * 2).n_min
            assert n >= prev
            prev = n


def test_genus2_fixture():
    g = genus2_fixture([[1, 0], [0, 1]], [[1, 0], [0, 1]], ELL, 2)
    assert is_unipotent(g)[0] and triviality_level(g) == get_precision()
    g = genus2_fixture([[1, 9], [0, 1]], [[1, 0], [0, 1]], ELL, 2)
    assert is_unipotent(g)[0]
    rng = random.Random(5)
    for _ in range(5):
        x, y = trivial_mod_rep(2, 2, rng, ELL, 2)
        genus2_fixture(x, y, ELL, 2)
    with pytest.raises(ValueError):
        genus2_fixture([[1, 3], [0, 1]], [[1, 0], [0, 1]], ELL, 2)


def test_certify_unipotent_fixture():
    r = rep([[[1, 9], [0, 1]]], A1)
    e = sigma_cyclotomic(4, A1, ELL, 6)
    report = certify_pipeline(r, e, [[4, 0], [0, 1]], 2)
    assert report.equivariant and report.status == "unipotent"
    assert report.agrees and report.i0 == 4


def test_certify_identity_rep():
    r = MatrixRep.trivial(A1, ELL, 2)
    report = certify_pipeline(r, sigma_cyclotomic(4, A1, ELL, 6), [[1, 0], [0, 1]], 2)
    assert report.status == "unipotent" and report.agrees


def test_certify_diagonal_fixture_fails_everywhere():
    r = rep([[[10, 0], [0, 1]]], A1)
    e = sigma_cyclotomic(4, A1, ELL, 6)
    units = [u for u in range(-20, 21) if u % ELL]
    reports = diagonal_candidates(r, e, 2, units)
    assert reports and all(x.status == "equivariance-failure" for x in reports)


def test_certify_refuses_small_n():
    r = rep([[[1, 3], [0, 1]]], A1)
    with pytest.raises(HypothesisUnmet):
        certify_pipeline(r, sigma_cyclotomic(4, A1, ELL, 6), [[4, 0], [0, 1]], 1)


def test_certify_rank2_ihara():
    # rho(c1) = [[1,9],[0,1]], rho(c2) = 1 with conjugator c2 on c1
    r = rep([[[1, 9], [0, 1]], [[1, 0], [0, 1]]], A2)
    f = [GroupWord.gen(A2, 1), GroupWord.identity(A2)]
    e = sigma_ihara(4, f, A2, ELL, 6)
    report = certify_pipeline(r, e, [[4, 0], [0, 1]], 2)
    assert report.status == "unipotent" and report.agrees
