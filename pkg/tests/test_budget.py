from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydlat import budget as B
from rydlat.errors import BracketFailure, UnknownTemperature

from .conftest import MHZ


@pytest.fixture(scope="module")
def calibrated(ref):
    return B.calibrate_omega1(ref, 1.0)


def test_calibration_round_trip(ref, calibrated):
    assert calibrated.loss == pytest.approx(1.0, rel=0.01)
    gam, u = B.center_loss(ref, calibrated.omega1)
    assert gam == pytest.approx(1.0, rel=0.01)
    assert u == calibrated.u0
    assert calibrated.omega1 / ref.omega2c < 1e-2


def test_calibration_fourth_root_law(ref, calibrated):
    c16 = B.calibrate_omega1(ref, 16.0)
    assert c16.omega1 / calibrated.omega1 == pytest.approx(2.0, rel=0.02)


def test_calibration_is_independent_of_start(ref, calibrated):
    c = B.calibrate_omega1(ref.with_(omega1=0.0), 1.0)
    assert c.omega1 == pytest.approx(calibrated.omega1, rel=1e-5)


def test_calibration_scan_trends(ref):
    cals = B.calibration_scan(ref, np.array([5, 10, 20, 40]) * MHZ)
    o2 = np.array([5, 10, 20, 40]) * MHZ
    ratio = np.array([c.omega1 for c in cals]) / o2
    depth = np.abs([c.u0 for c in cals])
    assert np.all(np.diff(ratio) < 0)
    assert np.all(np.diff(depth) > 0)
    for c in cals:
        assert c.loss == pytest.approx(1.0, rel=0.01)


def test_calibration_reports_shortcut(ref, calibrated):
    assert calibrated.loss_shortcut == pytest.approx(ref.gamma_p * calibrated.u0 / ref.delta)


def test_calibration_rejects_non_monotone_loss(ref, monkeypatch):
    def fake(params, omega1, *a):
        return 1.0 + 0.5 * math.sin(40 * math.log(omega1)), 0.0

    monkeypatch.setattr(B, "center_loss", fake)
    with pytest.raises(BracketFailure) as exc:
        B.calibrate_omega1(ref, 1.0)
    assert exc.value.samples


def test_calibration_rejects_bad_target(ref):
    with pytest.raises(ValueError):
        B.calibrate_omega1(ref, 0.0)


def test_bbr_rates():
    assert B.bbr_rate(300) == 1960.0
    assert B.bbr_rate(77) == 500.0
    assert B.bbr_rate(3.0) == 17.0
    with pytest.raises(UnknownTemperature):
        B.bbr_rate(4)


def test_bbr_budget_examples():
    b = B.budget_from_pr(1.0, 300)
    assert b.tau_max == -math.log(0.82) / 1960
    assert b.tau_max == pytest.approx(1.0e-4, rel=0.02)
    b3 = B.budget_from_pr(1.0, 3)
    assert b3.tau_max / b.tau_max == pytest.approx(1960 / 17, rel=1e-14)
    assert [B.budget_from_pr(1.0, t).tau_max for t in (300, 77, 3)] == sorted(B.budget_from_pr(1.0, t).tau_max for t in (300, 77, 3))


def test_bbr_budget_from_lasers(ref):
    b1 = B.bbr_budget(1, ref.omega1, ref.omega2c, 300)
    b10 = B.bbr_budget(10, ref.omega1, ref.omega2c, 300)
    assert b1.p_r == pytest.approx((ref.omega1 / ref.omega2c) ** 2)
    assert b10.tau_max == pytest.approx(b1.tau_max / 10, rel=1e-14)
    with pytest.raises(ValueError):
        B.bbr_budget(0, ref.omega1, ref.omega2c, 300)
    with pytest.raises(UnknownTemperature):
        B.bbr_budget(1, ref.omega1, ref.omega2c, 150)


@given(pr=st.floats(1e-8, 1e3), t=st.sampled_from([300, 77, 3]), thr=st.floats(0.01, 0.99))
def test_bbr_threshold_edge(pr, t, thr):
    b = B.budget_from_pr(pr, t, thr)
    assert float(b.survival(b.tau_max)) == pytest.approx(thr, abs=1e-12)
    assert b.tau_max * b.p_r * b.gamma_bbr == pytest.approx(-math.log(thr), rel=1e-12)
