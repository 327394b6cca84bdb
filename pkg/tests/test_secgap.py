import math

import pytest
from hypothesis import given, settings, strategies as st

import oracles as O
from wiretap import analytic as A
from wiretap import secgap as G


def bpsk_curve():
    return G.AnalyticCurve(lambda x: A.bpsk_ber(x), (-10.0, 20.0), "bpsk")


def test_invert_bpsk_at_zero_db():
    # 0.5*erfc(1) from the independent series oracle
    target = float(O.bpsk_ber(0.0))
    assert target == pytest.approx(0.078650, abs=5e-7)
    assert G.invert_ber(bpsk_curve(), target) == pytest.approx(0.0, abs=1e-4)


def test_invert_perfect_unitary_in_shoulder():
    curve = G.analytic_curve("unitary", k=1576, w="perfect")
    x = G.invert_ber(curve, 0.49)
    assert curve(x) == pytest.approx(0.49, abs=1e-6)
    assert curve(x - 1e-3) > 0.49


@settings(max_examples=40, deadline=None)
@given(st.floats(-7.0, -1.0))
def test_roundtrip_property(log_target):
    curve = G.analytic_curve("bch_model", k=1354, n=2047, t=69, w=20)
    target = 10.0**log_target
    x = G.invert_ber(curve, target)
    assert abs(curve(x) - target) <= 1e-6
    assert curve(x) <= target


def test_paper_gaps():
    bch = G.security_gap(G.analytic_curve("bch_model", k=1354, n=2047, t=69, w="perfect"))
    assert bch.gap_db == pytest.approx(1.3, abs=0.2)
    uni = G.security_gap(G.analytic_curve("unitary", k=1576, w="perfect"))
    assert uni.gap_db == pytest.approx(5.0, abs=0.5)
    assert uni.gap_db == pytest.approx(uni.ebn0_b_db - uni.ebn0_e_db)


def test_gap_additivity_and_degenerate():
    curve = G.analytic_curve("unitary", k=100, w=31)
    g = G.security_gap(curve, 1e-4, 0.3)
    assert g.gap_db == G.invert_ber(curve, 1e-4) - G.invert_ber(curve, 0.3)
    assert G.security_gap(curve, 1e-3, 1e-3).gap_db == 0.0
    with pytest.raises(ValueError):
        G.security_gap(curve, 0.4, 1e-5)


def test_out_of_range_names_extrema():
    curve = G.analytic_curve("unitary", k=100, w="perfect", domain=(0.0, 5.0))
    with pytest.raises(G.OutOfRangeError, match="minimum"):
        G.invert_ber(curve, 1e-12)
    with pytest.raises(G.OutOfRangeError, match="maximum"):
        G.invert_ber(curve, 0.49999)
    with pytest.raises(G.OutOfRangeError):
        curve(6.0)


def test_ber_vs_gap():
    curve = G.analytic_curve("bch_model", k=1354, n=2047, t=69, w="perfect")
    gap = G.security_gap(curve).gap_db
    pts = dict(G.ber_vs_gap(curve, 1e-5, [0.0, gap, 40.0]))
    assert pts[0.0] == pytest.approx(1e-5, rel=1e-4)
    assert pts[gap] == pytest.approx(0.4, rel=1e-4)
    assert math.isnan(pts[40.0])


def pts(*rows):
    return [G.CurvePoint(x, b, f) for x, b, f in rows]


def test_simulated_interpolation():
    curve = G.SimulatedCurve(pts((0.0, 1e-1, 500), (1.0, 1e-3, 300), (2.0, 1e-5, 100)), "s")
    assert G.invert_ber(curve, 1e-3) == 1.0
    assert G.invert_ber(curve, 1e-4) == pytest.approx(1.5)
    assert curve(0.5) == pytest.approx(1e-2)
    with pytest.raises(G.OutOfRangeError, match="achieved range"):
        G.invert_ber(curve, 1e-7)
    with pytest.raises(G.OutOfRangeError):
        G.invert_ber(curve, 0.3)


def test_simulated_drops_zero_points_and_needs_two():
    curve = G.SimulatedCurve(pts((0.0, 0.1, 100), (1.0, 0.01, 100), (2.0, 0.0, 0)))
    assert curve.domain == (0.0, 1.0)
    with pytest.raises(ValueError, match="at least 2"):
        G.SimulatedCurve(pts((0.0, 0.1, 100)))


def test_non_monotone_beyond_slack():
    with pytest.raises(G.NonMonotonicError):
        G.SimulatedCurve(pts((0.0, 1e-3, 400), (1.0, 2e-3, 400)))
    # within two standard errors the wiggle is tolerated
    G.SimulatedCurve(pts((0.0, 1.00e-3, 100), (1.0, 1.05e-3, 100)))
