import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles as O
from wiretap import analytic as A

UNITARY_GRID = [-6.0 + i for i in range(20)]
BCH_GRID = [2.0 + 0.3 * i for i in range(20)]


@pytest.mark.parametrize("db", UNITARY_GRID)
def test_unitary_family_against_oracle(db):
    k = 1576
    p_e = O.bpsk_ber(db)
    p_f = O.frame_error(p_e, k)
    p_r = p_e / p_f
    pt = A.unitary_unscrambled(db, k)
    assert O.rel_err(pt.p_e, p_e) < 1e-12
    assert O.rel_err(pt.p_f, p_f) < 1e-12
    assert O.rel_err(pt.p_r, p_r) < 1e-12
    assert O.rel_err(A.unitary_perfect_scrambling(db, k).p_e, p_f / 2) < 1e-12
    for w in (1, 10, 300):
        assert O.rel_err(A.unitary_scrambled(db, k, w), p_f * O.odd_parity(w, p_r)) < 1e-10


@pytest.mark.parametrize("db", BCH_GRID[::4])
def test_t_error_family_against_oracle(db):
    n, k, t = 2047, 1354, 69
    p0 = O.bpsk_ber(db, mpmath.mpf(k) / n)
    p_f = O.tail(n, p0, t + 1)
    p_e = O.tail(n, p0, t + 1, weighted=True)
    assert O.rel_err(A.channel_error(db, n, k), p0) < 1e-12
    pt = A.t_error_code(db, n, k, t)
    assert O.rel_err(pt.p_f, p_f) < 1e-10
    assert O.rel_err(pt.p_e, p_e) < 1e-10
    assert O.rel_err(A.t_error_perfect_scrambling(db, n, k, t), p_f / 2) < 1e-10
    assert O.rel_err(A.t_error_scrambled(db, n, k, t, 20), p_f * O.odd_parity(20, p_e / p_f)) < 1e-10


@pytest.mark.parametrize("db,n,k,t", [(0.0, 5, 5, 1), (1.0, 5, 3, 1), (-1.0, 6, 4, 2), (3.0, 7, 4, 1)])
def test_t_error_matches_exhaustive_enumeration(db, n, k, t):
    p0 = float(O.bpsk_ber(db, mpmath.mpf(k) / n))
    p_f, ber = O.enumerate_bounded_distance(n, k, t, p0)
    pt = A.t_error_code(db, n, k, t)
    assert pt.p_f == pytest.approx(p_f, rel=1e-12)
    assert pt.p_e == pytest.approx(ber, rel=1e-12)


def test_t_zero_reduces_to_uncoded_frame():
    for db in (-2.0, 1.0, 4.0):
        pt = A.t_error_code(db, 31, 31, 0)
        base = A.unitary_unscrambled(db, 31)
        assert pt.p_f == pytest.approx(base.p_f, rel=1e-12)
        assert pt.p_e == pytest.approx(base.p_e, rel=1e-12)


def test_weight_one_equals_unscrambled():
    for db in UNITARY_GRID:
        assert A.unitary_scrambled(db, 1576, 1) == pytest.approx(A.bpsk_ber(db), rel=1e-12)


def test_scrambled_ber_monotone_in_w_towards_perfect():
    for db in (-2.0, 3.0, 8.0):
        base = A.unitary_unscrambled(db, 1576)
        vals = [A.scrambled_ber(base.p_f, base.p_r, w) for w in (1, 2, 5, 20, 100, 300)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= base.p_f / 2 * (1 + 1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.integers(1, 2000))
def test_scrambled_ber_bounds(p_f, p_r, w):
    v = A.scrambled_ber(p_f, p_r, w)
    assert 0.0 <= v <= p_f / 2 + 1e-15
    assert v >= min(p_f * p_r, p_f / 2) - 1e-15


def test_scrambled_ber_vectorized_and_average():
    ws = np.array([1, 3, 21, 301])
    out = A.scrambled_ber(0.2, 0.01, ws)
    assert out.shape == (4,)
    assert out[0] == pytest.approx(0.002)
    assert A.average_scrambled_ber(0.2, 0.01, ws) == pytest.approx(out.mean())
    with pytest.raises(ValueError):
        A.scrambled_ber(0.2, 0.01, 0)


def test_eq8_matches_monte_carlo_of_parity():
    # odd number of errors among w independent wrong-with-p_r positions
    rng = np.random.default_rng(0)
    p_r, w = 0.02, 20
    odd = (rng.random((400_000, w)) < p_r).sum(axis=1) % 2
    assert odd.mean() == pytest.approx(A.scrambled_ber(1.0, p_r, w), abs=4 * math.sqrt(0.4 * 0.6 / 4e5))


def test_binomial_tail_edges():
    assert A.binomial_tail(10, 0.3, 0) == pytest.approx(1.0)
    assert A.binomial_tail(10, 0.3, 11) == 0.0
    assert A.binomial_tail(10, 0.0, 1) == 0.0
    assert A.binomial_tail(10, 1.0, 3) == 1.0
    assert A.binomial_tail(10, 0.3, 0, weighted=True) == pytest.approx(0.3)
    # far tail stays finite and accurate
    assert O.rel_err(A.binomial_tail(2047, 1e-4, 70), O.tail(2047, 1e-4, 70)) < 1e-10


def test_frame_error_small_p():
    assert A.frame_error(1e-20, 1000) == pytest.approx(1e-17, rel=1e-12)
    assert A.frame_error(1.0, 5) == 1.0


def test_curve_point_labels_and_errors():
    assert A.curve_point("unitary", 0.0, k=10, w=300).scheme == "unitary_w300"
    assert A.curve_point("bch_model", 4.0, k=1354, n=2047, t=69, w="perfect").scheme == "bch_model_perfect"
    with pytest.raises(ValueError):
        A.curve_point("turbo", 0.0, k=10)
    with pytest.raises(ValueError):
        A.t_error_code(0.0, 4, 5, 1)


def test_documented_bounded_distance_example():
    # n=5, k=5, t=1, P0=0.1: every pattern of two or more errors fails
    p_f, ber = O.enumerate_bounded_distance(5, 5, 1, 0.1)
    assert (round(p_f, 5), round(ber, 6)) == (0.08146, 0.034390)
    assert A.binomial_tail(5, 0.1, 2) == pytest.approx(p_f, rel=1e-12)
    assert A.binomial_tail(5, 0.1, 2, weighted=True) == pytest.approx(ber, rel=1e-12)
