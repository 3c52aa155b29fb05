from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ref_log_one_plus_t, ref_magnus, ref_mul, series_to_dict
from proell.ncseries import (
    Alphabet,
    AlphabetMismatch,
    GroupWord,
    NcSeries,
    abelianize,
    commutator,
    exp_augzero,
    h1_coordinates,
    is_grouplike,
    log_grouplike,
    magnus_embed,
    words,
)
from proell.padics import PadicScalar, padic

A1 = Alphabet.punctured(1)
A2 = Alphabet.punctured(2)
ELL = 3


def series(alphabet, n, coeffs):
    return NcSeries(alphabet, ELL, n, coeffs)


def test_magnus_product_of_generators():
    w = GroupWord.parse(A2, [[0, 1], [1, 1]])
    assert magnus_embed(w, 3, ELL) == series(A2, 3, {(): 1, (0,): 1, (1,): 1, (0, 1): 1})


def test_magnus_inverse_generator():
    w = GroupWord.gen(A1, 0, -1)
    assert magnus_embed(w, 4, ELL) == series(A1, 4, {(): 1, (0,): -1, (0, 0): 1, (0, 0, 0): -1})


def test_magnus_padic_exponent():
    w = GroupWord.gen(A1, 0, padic(1 + ELL, ELL))
    assert magnus_embed(w, 3, ELL) == series(A1, 3, {(): 1, (0,): 4, (0, 0): 6})


def test_noncommutative_product():
    t1 = NcSeries.variable(0, A2, ELL, 4)
    t2 = NcSeries.variable(1, A2, ELL, 4)
    assert t1 * t2 != t2 * t1
    assert (t1 * t2).support() == [(0, 1)]


def test_unit_and_truncation_cubic():
    a = series(A1, 3, {(): 1, (0,): 1})
    b = series(A1, 3, {(): 1, (0,): -1, (0, 0): 1})
    assert a * NcSeries.one(A1, ELL, 3) == a
    assert a * b == 1


def test_truncation_is_minimum():
    a = series(A1, 5, {(0,): 1})
    b = series(A1, 3, {(0,): 1})
    assert (a + b).truncation == 3
    assert (a * b).truncation == 3


def test_mismatched_alphabets():
    with pytest.raises(AlphabetMismatch):
        NcSeries.one(A1, ELL, 3) + NcSeries.one(A2, ELL, 3)


def test_augmentation():
    assert magnus_embed(GroupWord.parse(A2, [[0, 3], [1, -2]]), 4, ELL).augmentation() == 1
    assert series(A2, 3, {(0,): 1, (1,): 3}).augmentation().is_zero()
    assert series(A2, 3, {(): 5, (0,): 1}).augmentation() == 5


def test_log_one_plus_t():
    g = series(A1, 4, {(): 1, (0,): 1})
    assert log_grouplike(g) == series(A1, 4, {(0,): 1, (0, 0): Fraction(-1, 2), (0, 0, 0): Fraction(1, 3)})
    assert log_grouplike(NcSeries.one(A1, ELL, 4)).is_zero()


def test_log_matches_closed_form():
    g = series(A1, 9, {(): 1, (0,): 1})
    assert series_to_dict(log_grouplike(g)) == ref_log_one_plus_t(9)


def test_log_of_power_is_multiple():
    for e in (4, -2, 7):
        g = magnus_embed(GroupWord.gen(A1, 0, e), 7, ELL)
        y = magnus_embed(GroupWord.gen(A1, 0), 7, ELL)
        assert log_grouplike(g) == log_grouplike(y).scalar_mul(e)


def test_log_rejects_bad_augmentation():
    with pytest.raises(ValueError):
        log_grouplike(series(A1, 3, {(): 2}))
    with pytest.raises(ValueError):
        exp_augzero(series(A1, 3, {(): 1}))


def test_exp():
    assert exp_augzero(NcSeries.zero(A1, ELL, 4)) == 1
    g = series(A1, 6, {(): 1, (0,): 1})
    assert exp_augzero(log_grouplike(g)) == g
    x = series(A2, 3, {(0,): 1, (1,): 1})
    expected = 1 + x + (x * x).scalar_mul(Fraction(1, 2))
    assert exp_augzero(x) == expected
    assert exp_augzero(x).coeff((0, 1)) == Fraction(1, 2)


def test_abelianize():
    assert abelianize(series(A2, 3, {(1, 0): 1})) == series(A2, 3, {(0, 1): 1})
    g1, g2 = GroupWord.gen(A2, 0), GroupWord.gen(A2, 1)
    c = magnus_embed(commutator(g1, g2), 5, ELL) - 1
    assert all(len(w) >= 2 for w in c.support())
    assert all(x.is_zero() for x in h1_coordinates(magnus_embed(commutator(g1, g2), 5, ELL)))
    assert (magnus_embed(g1 * g2, 2, ELL) - 1) == series(A2, 2, {(0,): 1, (1,): 1})


def test_words_order():
    assert words(A2, 3) == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]


def test_json_roundtrip():
    s = log_grouplike(magnus_embed(GroupWord.parse(A2, [[0, 2], [1, -1]]), 5, ELL))
    assert NcSeries.from_json(s.to_json()) == s
    assert NcSeries.from_json(s.to_json()).to_json() == s.to_json()


def test_inverse():
    g = magnus_embed(GroupWord.parse(A2, [[0, 2], [1, -1]]), 5, ELL)
    assert g * g.inverse() == 1
    assert g.inverse() == magnus_embed(GroupWord.parse(A2, [[1, 1], [0, -2]]), 5, ELL)


letters = st.lists(
    st.tuples(st.integers(0, 1), st.integers(-4, 4).filter(lambda e: e != 0)), max_size=4
)


@settings(max_examples=60, deadline=None)
@given(letters, letters, st.integers(1, 6))
def test_magnus_is_homomorphism(u, v, n):
    wu, wv = GroupWord.parse(A2, u), GroupWord.parse(A2, v)
    assert magnus_embed(wu * wv, n, ELL) == magnus_embed(wu, n, ELL) * magnus_embed(wv, n, ELL)


@settings(max_examples=60, deadline=None)
@given(letters, st.integers(1, 6))
def test_magnus_matches_reference_expansion(u, n):
    got = magnus_embed(GroupWord.parse(A2, u), n, ELL)
    assert series_to_dict(got) == ref_magnus(u, n)
    assert got.min_valuation() >= 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.just(0), st.integers(-5, 5).filter(bool)), max_size=3), st.integers(1, 6))
def test_grouplike_rank_one(u, n):
    g = magnus_embed(GroupWord.parse(A1, u), n, ELL)
    assert g.augmentation() == 1
    assert is_grouplike(g)


def test_grouplike_rejects_non_grouplike():
    assert not is_grouplike(series(A1, 4, {(): 1, (0,): 1, (0, 0): 1}))
    assert is_grouplike(magnus_embed(GroupWord.parse(A2, [[0, 1], [1, 2]]), 4, ELL))


@settings(max_examples=40, deadline=None)
@given(letters, st.integers(2, 6))
def test_log_exp_inverse(u, n):
    g = magnus_embed(GroupWord.parse(A2, u), n, ELL)
    assert exp_augzero(log_grouplike(g)) == g


coeff_maps = st.dictionaries(
    st.lists(st.integers(0, 1), max_size=3).map(tuple), st.integers(-20, 20), max_size=6
)


@settings(max_examples=60, deadline=None)
@given(coeff_maps, coeff_maps)
def test_product_matches_convolution(a, b):
    n = 4
    got = series(A2, n, a) * series(A2, n, b)
    want = ref_mul({w: Fraction(c) for w, c in a.items() if c}, {w: Fraction(c) for w, c in b.items() if c}, n)
    assert series_to_dict(got) == want
