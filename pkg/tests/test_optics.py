import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fransonsim import optics
from fransonsim.optics import AomParams, Arm, FiberLink, Interferometer, SourceParams
from fransonsim.relativity import C


def test_acoustic_wavelength():
    assert optics.acoustic_wavelength(AomParams(2500, 100e6)) == pytest.approx(25e-6, rel=1e-15)
    assert optics.acoustic_wavelength(AomParams(2500, 50e6)) == pytest.approx(50e-6, rel=1e-15)
    assert optics.acoustic_wavelength(AomParams(2500, 200e6)) == pytest.approx(12.5e-6, rel=1e-15)


def test_bragg_angle():
    theta = optics.bragg_angle(1313e-9, 2.6, 25e-6)
    assert math.degrees(theta) == pytest.approx(0.578697212183619, rel=1e-12)
    assert 2 * 25e-6 * math.sin(theta) == pytest.approx(1313e-9 / 2.6, rel=1e-12)
    assert optics.bragg_angle(1313e-9, 2.6, 1e3) < 1e-9
    with pytest.raises(ValueError):
        optics.bragg_angle(1e-6, 1.0, 0.4e-6)


def test_reflectance_points():
    assert optics.reflectance(1.0, 0.0) == 0.0
    assert optics.reflectance(1.0, (math.pi / 4) ** 2) == pytest.approx(0.5, abs=1e-15)
    assert optics.reflectance(1.0, (math.pi / 2) ** 2) == pytest.approx(1.0, abs=1e-15)


def test_power_for_50_50():
    assert optics.power_for_50_50(1.0) == pytest.approx(0.616850275068085, rel=1e-14)
    assert optics.power_for_50_50(2.0) == pytest.approx(optics.power_for_50_50(1.0) / 2)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            optics.power_for_50_50(bad)


@given(st.floats(1e-3, 1e3))
def test_power_round_trip(alpha):
    assert optics.reflectance(alpha, optics.power_for_50_50(alpha)) == pytest.approx(0.5, abs=1e-12)


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_reflectance_bounded(alpha, power):
    r = optics.reflectance(alpha, power)
    assert 0.0 <= r <= 1.0


def test_doppler_basic():
    assert optics.doppler_shift(0.0, 0.1, 2.6, 2e14) == 0.0
    one = optics.doppler_shift(10.0, 0.1, 2.6, 2e14)
    assert optics.doppler_shift(30.0, 0.1, 2.6, 2e14) == pytest.approx(3 * one)


def test_doppler_equals_acoustic_frequency_at_default_values():
    lam_s = optics.acoustic_wavelength(AomParams())
    theta = optics.bragg_angle(1313.2e-9, 2.6, lam_s)
    assert optics.doppler_shift(2500.0, theta, 2.6, C / 1313.2e-9) == pytest.approx(100e6, rel=1e-12)


@settings(max_examples=500)
@given(
    st.floats(500, 6000),  # acoustic speed
    st.floats(1e6, 1e9),  # rf frequency
    st.floats(1.0, 4.0),  # index
    st.floats(400e-9, 2000e-9),  # wavelength
)
def test_doppler_acoustic_equivalence(vs, nus, n, lam):
    lam_s = vs / nus
    if lam / (2 * n * lam_s) > 1:
        return
    theta = optics.bragg_angle(lam, n, lam_s)
    assert 2 * lam_s * math.sin(theta) == pytest.approx(lam / n, rel=1e-12)
    assert optics.doppler_shift(vs, theta, n, C / lam) == pytest.approx(nus, rel=1e-9)


def _pair(dir1, dir2, arm1=Arm.LONG, arm2=Arm.LONG):
    return (
        Interferometer(aom=AomParams(travel_direction=dir1), shifted_arm=arm1),
        Interferometer(aom=AomParams(travel_direction=dir2), shifted_arm=arm2),
    )


def test_double_pass_shift_is_200_mhz():
    ifo = Interferometer()
    assert abs(ifo.arm_shift(Arm.LONG)) == pytest.approx(200e6)
    assert ifo.arm_shift(Arm.SHORT) == 0.0


def test_compensating_orientations():
    ifos = _pair(-1, 1)
    ss = optics.net_frequency_shift((Arm.SHORT, Arm.SHORT), ifos)
    ll = optics.net_frequency_shift((Arm.LONG, Arm.LONG), ifos)
    assert ss == ll
    assert optics.energy_mismatch(ifos) == 0.0


def test_non_compensating_orientations():
    ifos = _pair(1, 1)
    assert optics.energy_mismatch(ifos) == pytest.approx(2 * 2 * 100e6)


@given(st.sampled_from([-1, 1]), st.sampled_from(list(Arm)), st.sampled_from(list(Arm)),
       st.floats(1e6, 1e9))
def test_energy_indistinguishability(dir1, arm1, arm2, nu):
    # compensation: opposite sign if the same arm is shifted, same sign otherwise
    dir2 = -dir1 if arm1 is arm2 else dir1
    ifos = (
        Interferometer(aom=AomParams(rf_frequency=nu, travel_direction=dir1), shifted_arm=arm1),
        Interferometer(aom=AomParams(rf_frequency=nu, travel_direction=dir2), shifted_arm=arm2),
    )
    assert optics.net_frequency_shift((Arm.SHORT, Arm.SHORT), ifos) == pytest.approx(
        optics.net_frequency_shift((Arm.LONG, Arm.LONG), ifos), abs=1e-6
    )


def test_coherence_length():
    # the quoted figure is "about 0.14 mm"
    lc = optics.coherence_length(1313e-9, 11e-9)
    assert lc == pytest.approx(0.156724454545455e-3, rel=1e-12)
    assert abs(lc - 0.14e-3) / 0.14e-3 < 0.20
    assert optics.coherence_length(1313e-9, 5.5e-9) == pytest.approx(2 * lc)
    assert optics.coherence_length(1e-6, 1e-6) == pytest.approx(1e-6)


def test_residual_pulse_spread():
    fiber = FiberLink(length=100.0)
    # a 1 nm pump error is 2 nm at each photon
    spread = optics.residual_pulse_spread(fiber, 2e-9, 11e-9)
    assert spread == pytest.approx(2.024e-13, rel=1e-12)
    assert abs(spread - 0.2e-12) / 0.2e-12 < 0.5
    assert C * spread == pytest.approx(0.06e-3, rel=0.05)
    assert optics.residual_pulse_spread(fiber, 0.0, 11e-9) == 0.0
    assert optics.residual_pulse_spread(FiberLink(length=300.0), 2e-9, 11e-9) == pytest.approx(3 * spread)


def test_source_photon_offset_doubles_pump_detuning():
    src = SourceParams(pump_detuning=1e-9)
    assert src.photon_offset(FiberLink()) == pytest.approx(2e-9)


@pytest.mark.parametrize(
    "kwargs",
    [dict(filter_bandwidth=31e-9), dict(visibility=1.2), dict(photon_center_wavelength=1550e-9)],
)
def test_source_validation(kwargs):
    with pytest.raises(ValueError):
        SourceParams(**kwargs)


def test_parameter_validation():
    with pytest.raises(ValueError):
        AomParams(acoustic_speed=0)
    with pytest.raises(ValueError):
        AomParams(travel_direction=0)
    with pytest.raises(ValueError):
        Interferometer(transmission=0.0)
    with pytest.raises(ValueError):
        FiberLink(zero_dispersion_wavelength=1550e-9)


def test_default_aom_is_50_50():
    assert AomParams().reflectance == pytest.approx(0.5)
    assert np.isclose(AomParams(coupling=3.0).reflectance, 0.5)
