import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fransonsim.analysis import (
    FitError,
    dip_test,
    dip_width,
    fit_fringe,
    fit_scan,
    subtract_accidentals,
    visibility_vs_offset,
)
from fransonsim.montecarlo import POINT_FIELDS, FringeScan, ScanKind

PHI = 2 * np.pi * np.arange(12) / 12


def fringe(B, V, phi0=0.0, phi=PHI):
    return B * (1 + V * np.cos(phi + phi0))


def make_scan(counts, acc=0.0, singles=10_000, phi=PHI):
    pts = np.zeros(len(counts), dtype=POINT_FIELDS)
    pts["scan_value"] = phi[: len(counts)]
    pts["phase"] = pts["scan_value"]
    pts["coincidences"] = counts
    pts["accidentals"] = acc
    pts["singles_a"] = pts["singles_b"] = singles
    pts["pairs"] = 1
    return FringeScan(ScanKind.PHASE, pts)


def test_noiseless_recovery():
    f = fit_fringe(PHI, fringe(200.0, 0.85, 0.4))
    assert f.visibility == pytest.approx(0.85, abs=1e-6)
    assert f.phase_offset == pytest.approx(0.4, abs=1e-9)
    assert f.baseline == pytest.approx(200.0)
    assert f.amplitude == pytest.approx(170.0)
    assert f.points_used == 12
    assert f.sigma_visibility > 0
    assert f.reduced_chi2 == pytest.approx(0.0, abs=1e-18)


def test_flat_counts_consistent_with_zero():
    f = fit_fringe(PHI, np.full(12, 150.0))
    assert f.visibility < 3 * f.sigma_visibility


def test_poisson_calibration_within_three_sigma():
    rng = np.random.default_rng(7)
    inside = 0
    n = 400
    for _ in range(n):
        f = fit_fringe(PHI, rng.poisson(fringe(120.0, 0.85)))
        inside += abs(f.visibility - 0.85) < 3 * f.sigma_visibility
    assert inside / n >= 0.99


def test_one_sigma_coverage():
    rng = np.random.default_rng(8)
    n = 600
    inside = 0
    for _ in range(n):
        f = fit_fringe(PHI, rng.poisson(fringe(120.0, 0.85)))
        inside += abs(f.visibility - 0.85) < f.sigma_visibility
    assert abs(inside / n - 0.6827) < 0.05


def test_fit_errors():
    with pytest.raises(FitError):
        fit_fringe(PHI[:3], [1, 2, 3])
    with pytest.raises(FitError, match="degenerate"):
        fit_fringe(np.zeros(6), np.arange(6) + 1.0)
    with pytest.raises(FitError, match="baseline"):
        fit_fringe(PHI, -fringe(10.0, 0.5), variance=np.ones(12))


@settings(max_examples=50)
@given(st.floats(-20, 20))
def test_phase_equivariance(shift):
    y = fringe(80.0, 0.6, 0.3) + np.linspace(0, 3, 12)
    a = fit_fringe(PHI, y)
    b = fit_fringe(PHI + shift, y)
    assert b.visibility == pytest.approx(a.visibility, abs=1e-9)
    d = math.remainder(b.phase_offset - (a.phase_offset - shift), 2 * math.pi)
    assert abs(d) < 1e-9


@settings(max_examples=50)
@given(st.floats(0.05, 50.0))
def test_scale_invariance(c):
    y = np.random.default_rng(1).poisson(fringe(500.0, 0.7)).astype(float)
    assert fit_fringe(PHI, c * y).visibility == pytest.approx(fit_fringe(PHI, y).visibility, rel=1e-9)


def test_subtract_identity_and_conservation():
    y = np.random.default_rng(2).poisson(fringe(100.0, 0.8))
    c = subtract_accidentals(make_scan(y))
    assert np.array_equal(c.counts, y)
    c = subtract_accidentals(make_scan(y, acc=7.5))
    assert c.counts.sum() == pytest.approx(y.sum() - 12 * 7.5)
    assert np.all(c.variance >= np.maximum(y, 1))


def test_subtraction_restores_visibility_under_floor():
    B, V, a = 100.0, 0.85, 20.0
    quad = PHI[::3]  # 0, pi/2, pi, 3pi/2 keep the counts integral
    raw = np.rint(fringe(B, V, phi=quad) + a)
    assert np.array_equal(raw, [205.0, 120.0, 35.0, 120.0])
    # with a floor a the raw contrast is (max-min)/(max+min) = BV / (B + a)
    assert fit_fringe(quad, raw).visibility == pytest.approx(B * V / (B + a), rel=1e-9)
    assert fit_scan(make_scan(raw, acc=a, phi=quad)).visibility == pytest.approx(V, rel=1e-9)


def test_dip_test_examples():
    x = np.arange(-10, 11) * 0.12e-3
    rng = np.random.default_rng(3)
    flat = 0.85 + rng.normal(0, 0.03, x.size)
    assert not dip_test((x, flat, np.full(x.size, 0.03)), 3).dip_detected
    dipped = np.full(x.size, 0.85)
    dipped[9:12] = 0.0
    r = dip_test((x, dipped, np.full(x.size, 0.03)), 3)
    assert r.dip_detected
    assert r.location == pytest.approx(0.0, abs=1e-12)
    assert r.depth_in_sigma > 5
    with pytest.raises(ValueError):
        dip_test((x[:2], flat[:2], np.full(2, 0.03)), 3)


def test_dip_width_interpolates():
    x = np.arange(-10, 11, dtype=float)
    v = np.where(np.abs(x) <= 2, 0.0, 1.0)
    # half-depth crossings sit halfway between 2 and 3 on each side
    assert dip_width(x, v) == pytest.approx(5.0)
    # a dip against the edge of the scan has no right flank
    assert math.isnan(dip_width(x, np.where(x >= 8, 0.0, 1.0)))


def test_quantum_curve_is_flat(qm_length_scan):
    curve = visibility_vs_offset(qm_length_scan)
    ok = np.isfinite(curve.visibility)
    assert ok.all()
    w = 1 / curve.sigma**2
    mean = np.sum(w * curve.visibility) / w.sum()
    assert np.all(np.abs(curve.visibility - mean) < 3.5 * curve.sigma)
    assert not curve.dip.dip_detected


def test_ms_curve_minimum_at_zero(ms_length_scan):
    curve = visibility_vs_offset(ms_length_scan)
    i = int(np.argmin(curve.visibility))
    assert abs(curve.offset[i]) <= 0.36e-3
    centre = curve.offset == 0.0
    assert abs(curve.visibility[centre][0]) < 3 * curve.sigma[centre][0]
    assert curve.dip.dip_detected


def test_single_scan_curve(qm_length_scan):
    off, sc = qm_length_scan.by_offset()[0]
    curve = visibility_vs_offset([(off, sc)])
    assert curve.offset.size == 1
    assert curve.dip is None


def test_failed_fits_become_gaps():
    good = make_scan(fringe(100.0, 0.5))
    bad = make_scan(np.array([5.0, 5.0, 5.0]))
    curve = visibility_vs_offset([(0.0, good), (1.0, bad)])
    assert math.isnan(curve.visibility[1])
    assert isinstance(curve.fits[1], FitError)
