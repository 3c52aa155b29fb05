import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ref_log_one_plus_t, ref_power, ref_rank, series_to_dict, val
from proell.eigenlift import (
    CapViolation,
    EigenvalueCollision,
    HypothesisUnmet,
    c_bound,
    check_semisimple,
    dense_eigenbasis,
    integral_period,
    lift_eigenvector,
    lift_eigenvector_global,
    multiplicative_order,
    r_alpha,
    sweep_periods,
    v_bound,
    vl_qpow,
)
from proell.filtration import iadic_valuation, weight_part
from proell.galois import Endomorphism, apply, identity_endomorphism, sigma_cyclotomic, sigma_ihara
from proell.ncseries import Alphabet, GroupWord, NcSeries
from proell.padics import padic

ELL = 3
A1 = Alphabet.punctured(1)
A2 = Alphabet.punctured(2)


def random_conjugators(alphabet, rng):
    return [
        GroupWord.parse(alphabet, [[rng.randrange(alphabet.rank), rng.choice([-2, -1, 1, 2])] for _ in range(rng.randint(1, 3))])
        for _ in range(alphabet.rank)
    ]


# -- valuations of q^k - 1 -----------------------------------------------------


def test_vl_qpow_examples():
    assert vl_qpow(4, 3, 3) == 2
    assert vl_qpow(2, 3, 5) == 0
    assert vl_qpow(3, 1, 2) == 1
    assert vl_qpow(padic(4, 3), 3) == 2


def test_multiplicative_order():
    assert multiplicative_order(2, 5) == 4
    assert multiplicative_order(3, 2) == 2
    assert multiplicative_order(5, 2) == 1
    with pytest.raises(ValueError):
        multiplicative_order(6, 3)


def test_v_bound_examples():
    for i in range(5):
        assert v_bound(i, i + 1, 4, 3) == 0
    assert v_bound(0, 4, 4, 3) == 4
    assert v_bound(1, 4, 6, 5) == 2
    with pytest.raises(ValueError):
        v_bound(3, 3, 4, 3)


def test_c_bound_examples():
    assert c_bound(4, 3, 1) == Fraction(3, 2)
    assert c_bound(2, 5, 1) == Fraction(5, 16)
    assert c_bound(3, 2, 0) == Fraction(1, 2)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(2, 10**6), st.integers(1, 120))
def test_vl_qpow_matches_integer_valuation(ell, q, k):
    if q % ell == 0:
        q += 1
    assert vl_qpow(q, k, ell) == val(q**k - 1, ell)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(2, 10**4), st.integers(0, 80))
def test_sum_bounded_by_c(ell, q, k):
    if q % ell == 0:
        q += 1
    assert sum(val(q**i - 1, ell) for i in range(1, k + 1)) <= c_bound(q, ell, k)


def test_r_alpha_variants():
    assert r_alpha(sigma_cyclotomic(4, A1, ELL, 3)) == Fraction(3, 2)
    mixed = Alphabet(("a", "c"), (1, 2))
    images = (
        NcSeries(mixed, ELL, 3, {(): 1, (0,): 1}),
        NcSeries(mixed, ELL, 3, {(): 1, (1,): 1}),
    )
    e = Endomorphism(mixed, ELL, 3, images, alpha=4)
    assert r_alpha(e) == 2 * c_bound(4, ELL, 1)
    weight_one = Alphabet.uniform(1, 1)
    e1 = Endomorphism(weight_one, ELL, 3, (NcSeries(weight_one, ELL, 3, {(): 1, (0,): 1}),), alpha=4)
    assert r_alpha(e1) == c_bound(4, ELL, 1)


# -- semisimplicity --------------------------------------------------------


def test_semisimple_rank1_log_powers():
    rep = check_semisimple(sigma_cyclotomic(4, A1, ELL, 4))
    assert rep.diagonalizable and rep.dimension == 4
    assert [s.dimension for s in rep.eigenspaces] == [1, 1, 1, 1]
    log = ref_log_one_plus_t(4)
    for k, space in enumerate(rep.eigenspaces):
        (v,) = space.vectors
        target = ref_power(log, k, 4)
        lead = (0,) * k
        got = series_to_dict(v.scalar_mul(v.coeff(lead).inv()))
        assert got == target


def test_semisimple_identity():
    rep = check_semisimple(identity_endomorphism(A2, ELL, 3))
    assert len(rep.eigenspaces) == 1
    assert rep.eigenspaces[0].dimension == rep.dimension == 7
    assert rep.diagonalizable


def test_semisimple_ihara_fixed_conjugator():
    f = [GroupWord.gen(A2, 1), GroupWord.identity(A2)]
    rep = check_semisimple(sigma_ihara(4, f, A2, ELL, 4))
    assert rep.diagonalizable
    assert [s.multiplicity for s in rep.eigenspaces] == [1, 2, 4, 8]
    assert [s.dimension for s in rep.eigenspaces] == [1, 2, 4, 8]
    assert rep.eigenspace_total == 15


def test_semisimple_detects_jordan_block():
    # gamma -> gamma + T^2 style map with graded scalar 1 but a nilpotent part
    images = (NcSeries(A1, ELL, 3, {(): 1, (0,): 1, (0, 0): 1}),)
    e = Endomorphism(A1, ELL, 3, images, alpha=1, level_step=2)
    rep = check_semisimple(e)
    assert not rep.diagonalizable
    assert rep.eigenspaces[0].dimension == 2


# -- lifting ---------------------------------------------------------------


def test_lift_log_rank1():
    e = sigma_cyclotomic(4, A1, ELL, 6)
    lf = lift_eigenvector(e, (0,))
    assert series_to_dict(lf.lift) == ref_log_one_plus_t(6)
    assert lf.eigenvalue == 4 and lf.level == 2
    for n in range(2, 7):
        assert lf.denominator_profile[n] == -max(k for k in range(4) if 3**k <= n - 1)
        assert -lf.denominator_profile[n] <= lf.bound_profile[n]


def test_lift_top_level_is_seed():
    e = sigma_cyclotomic(4, A2, ELL, 4)
    lf = lift_eigenvector(e, (0, 1, 1))
    assert lf.lift == lf.seed
    assert lf.worst_denominator == 0


def test_lift_rank2_cap_chain():
    e = sigma_cyclotomic(4, A2, ELL, 6)
    lf = lift_eigenvector(e, (0, 1))
    assert lf.level == 4
    assert apply(e, lf.lift) == lf.lift.scalar_mul(16)
    for n, cap in lf.bound_profile.items():
        if cap is None:
            continue
        assert -lf.denominator_profile[n] <= cap <= lf.c_profile[n]
        assert cap == v_bound(4, 2 * n, 4, 3)


def test_lift_uniqueness_two_routes():
    rng = random.Random(11)
    for _ in range(3):
        e = sigma_ihara(4, random_conjugators(A2, rng), A2, ELL, 5)
        for seed in [(0,), (1,), (0, 1), (1, 0)]:
            a = lift_eigenvector(e, seed).lift
            b = lift_eigenvector_global(e, seed, reverse=True)
            c = lift_eigenvector_global(e, seed, reverse=False)
            assert a == b == c


def test_lift_requires_alpha_near_one():
    e = sigma_cyclotomic(2, A1, ELL, 4)
    with pytest.raises(HypothesisUnmet):
        lift_eigenvector(e, (0,))


def test_eigenvalue_collision():
    images = (NcSeries(A1, ELL, 4, {(): 1, (0,): 1, (0, 0): 1}),)
    e = Endomorphism(A1, ELL, 4, images, alpha=1, level_step=2)
    with pytest.raises(EigenvalueCollision):
        lift_eigenvector(e, (0,))


def test_seed_must_be_homogeneous():
    e = sigma_cyclotomic(4, A2, ELL, 4)
    with pytest.raises(ValueError):
        lift_eigenvector(e, NcSeries(A2, ELL, 4, {(0,): 1, (0, 1): 1}))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([4, 10, -2, 7]))
def test_lift_invariants_random_actions(seed, q):
    rng = random.Random(seed)
    e = sigma_ihara(q, random_conjugators(A2, rng), A2, ELL, 5)
    word = tuple(rng.randrange(2) for _ in range(rng.randint(0, 3)))
    lf = lift_eigenvector(e, word)
    k = lf.level
    assert apply(e, lf.lift) == lf.lift.scalar_mul(padic(q, ELL) ** (k // 2))
    # lift agrees with the seed on levels <= k
    low = lf.lift.filter(lambda w: A2.weighted_degree(w) <= k)
    assert low == lf.seed
    for n, cap in lf.bound_profile.items():
        if cap is not None:
            assert -lf.denominator_profile[n] <= cap <= lf.c_profile[n]


# -- dense eigenbases ------------------------------------------------------


def test_dense_eigenbasis_rank1():
    e = sigma_cyclotomic(4, A1, ELL, 6)
    basis = dense_eigenbasis(e, 6, 2)
    log = ref_log_one_plus_t(6)
    assert len(basis.lifts) == 6
    for k, lf in enumerate(basis.lifts):
        assert series_to_dict(lf.lift) == ref_power(log, k, 6)
    assert basis.all_consistent and basis.spans and basis.unitriangular


def test_dense_eigenbasis_trivial_truncation():
    basis = dense_eigenbasis(sigma_cyclotomic(4, A1, ELL, 1), 1, 2)
    assert len(basis.lifts) == 1
    assert basis.lifts[0].lift == 1 and basis.lifts[0].eigenvalue == 1


def test_dense_eigenbasis_rank2_spans():
    e = sigma_ihara(4, random_conjugators(A2, random.Random(5)), A2, ELL, 5)
    basis = dense_eigenbasis(e, 5, 2)
    assert len(basis.lifts) == 31
    assert basis.spans and basis.unitriangular
    rows = [[lf.lift.coeff(w).rational_guess() for w in [b.seed.support()[0] for b in basis.lifts]] for lf in basis.lifts]
    assert ref_rank(rows) == 31


def test_dense_eigenbasis_refuses_small_radius():
    e = sigma_cyclotomic(4, A1, ELL, 4)
    with pytest.raises(HypothesisUnmet):
        dense_eigenbasis(e, 4, Fraction(3, 2))
    with pytest.raises(HypothesisUnmet):
        dense_eigenbasis(e, 4, 1)


# -- periods ---------------------------------------------------------------


def test_period_adjacent_levels():
    e = sigma_cyclotomic(4, A2, ELL, 4)
    for i in range(6):
        assert integral_period(e, i, i + 1).b == 0


def test_period_rank1_log_denominator():
    e = sigma_cyclotomic(4, A1, ELL, 4)
    rec = integral_period(e, 2, 8)
    # log(1+T) through degree 3 has worst denominator 3
    assert rec.b == 1 == -min(val(c, 3) for w, c in ref_log_one_plus_t(4).items())
    assert rec.b <= rec.v_bound


def test_period_requires_truncation():
    with pytest.raises(ValueError):
        integral_period(sigma_cyclotomic(4, A1, ELL, 2), 0, 8)
    with pytest.raises(ValueError):
        integral_period(sigma_cyclotomic(4, A1, ELL, 4), 3, 3)


def test_sweep_respects_caps():
    for rank in (1, 2):
        alphabet = Alphabet.punctured(rank)
        for q in (4, 10):
            e = sigma_cyclotomic(q, alphabet, ELL, 4)
            for rec in sweep_periods(e, 4, 8):
                assert 0 <= rec.b <= rec.v_bound <= rec.c_bound


def test_cap_violation_is_an_assertion():
    assert issubclass(CapViolation, AssertionError)
