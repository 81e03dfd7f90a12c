"""Acousto-optic beam splitter, interferometer bookkeeping and fibre budgets.

SI units throughout. Dispersion slopes are stored in s/m^3; use
``PS_PER_NM2_KM`` to convert from the usual datasheet unit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .relativity import C

PS_PER_NM2_KM = 1e-12 / (1e-18 * 1e3)  # ps/(nm^2 km) -> s/m^3
AOM_PASSBAND = 30e-9  # m, reflected-beam bandwidth of the AOM


class Arm(enum.Enum):
    SHORT = "short"
    LONG = "long"


@dataclass
class AomParams:
    acoustic_speed: float = 2500.0
    rf_frequency: float = 100e6
    refractive_index: float = 2.6
    coupling: float = 1.0  # 1/W
    acoustic_power: float | None = None  # None -> 50/50 operating point
    travel_direction: int = 1  # sign of the acoustic wave velocity on the lab axis

    def __post_init__(self):
        for name in ("acoustic_speed", "rf_frequency", "refractive_index", "coupling"):
            if not getattr(self, name) > 0:
                raise ValueError(f"AomParams.{name} must be > 0")
        if self.acoustic_power is None:
            self.acoustic_power = power_for_50_50(self.coupling)
        if self.acoustic_power < 0:
            raise ValueError("AomParams.acoustic_power must be >= 0")
        if self.travel_direction not in (1, -1):
            raise ValueError("AomParams.travel_direction must be +1 or -1")

    @property
    def velocity(self) -> float:
        """Signed velocity of the moving grating in the lab frame."""
        return self.travel_direction * self.acoustic_speed

    @property
    def reflectance(self) -> float:
        return reflectance(self.coupling, self.acoustic_power)


@dataclass
class Interferometer:
    arm_imbalance: float = 0.3  # m of optical path, long minus short
    phase: float = 0.0
    transmission: float = 0.5  # losses besides the output-port split
    aom: AomParams = None
    position: float = 0.0
    passes_per_reflection: int = 2
    shifted_arm: Arm = Arm.LONG  # arm reached by diffraction off the AOM
    path_uncertainty: float = 0.5e-3  # m, free-space path-length knowledge

    def __post_init__(self):
        if self.aom is None:
            self.aom = AomParams()
        self.shifted_arm = Arm(self.shifted_arm)
        if not 0 < self.transmission <= 1:
            raise ValueError("Interferometer.transmission must be in (0, 1]")
        if not self.arm_imbalance > 0:
            raise ValueError("Interferometer.arm_imbalance must be > 0")
        if self.passes_per_reflection < 1:
            raise ValueError("Interferometer.passes_per_reflection must be >= 1")

    @property
    def delay(self) -> float:
        """Arm-imbalance delay (s)."""
        return self.arm_imbalance / C

    def arm_shift(self, arm: Arm) -> float:
        """Frequency shift (Hz) picked up by a photon taking ``arm``."""
        if Arm(arm) is not self.shifted_arm:
            return 0.0
        return self.passes_per_reflection * self.aom.travel_direction * self.aom.rf_frequency


@dataclass
class FiberLink:
    length: float = 100.0
    zero_dispersion_wavelength: float = 1313.2e-9
    dispersion_slope: float = 92.0  # s/m^3, i.e. 0.092 ps/(nm^2 km)
    length_uncertainty: float = 0.1e-3

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("FiberLink.length must be > 0")
        if not 1.25e-6 <= self.zero_dispersion_wavelength <= 1.35e-6:
            raise ValueError("FiberLink.zero_dispersion_wavelength outside 1.25-1.35 um")


@dataclass
class SourceParams:
    pump_wavelength: float = 656.6e-9
    photon_center_wavelength: float = 1313.2e-9
    filter_bandwidth: float = 11e-9
    pair_rate: float = 1e8
    pump_coherence_time: float = 1e-6
    visibility: float = 0.85  # intrinsic two-photon visibility of the setup
    pump_detuning: float = 1e-9  # assumed pump-wavelength error for the dispersion budget

    def __post_init__(self):
        if abs(self.photon_center_wavelength - 2 * self.pump_wavelength) > 0.01 * self.photon_center_wavelength:
            raise ValueError("photon_center_wavelength must be ~2x pump_wavelength (degenerate pairs)")
        if not 0 < self.filter_bandwidth < AOM_PASSBAND:
            raise ValueError(
                f"filter_bandwidth must be positive and below the {AOM_PASSBAND * 1e9:.0f} nm AOM passband"
            )
        if not self.pair_rate > 0:
            raise ValueError("SourceParams.pair_rate must be > 0")
        if not self.pump_coherence_time > 0:
            raise ValueError("SourceParams.pump_coherence_time must be > 0")
        if not 0 <= self.visibility <= 1:
            raise ValueError("SourceParams.visibility must be in [0, 1]")
        if self.pump_detuning < 0:
            raise ValueError("SourceParams.pump_detuning must be >= 0")

    def photon_offset(self, fiber: FiberLink) -> float:
        """Worst-case photon-side detuning from the fibre's zero-dispersion point.

        A pump detuning maps to twice that detuning at each photon because the
        pump frequency is the sum of the two photon frequencies.
        """
        nominal = abs(self.photon_center_wavelength - fiber.zero_dispersion_wavelength)
        return nominal + 2.0 * self.pump_detuning


def acoustic_wavelength(aom: AomParams) -> float:
    return aom.acoustic_speed / aom.rf_frequency


def bragg_angle(wavelength, n, acoustic_wl):
    """Bragg angle (rad) from ``2 * acoustic_wl * sin(theta) = wavelength / n``."""
    arg = np.asarray(wavelength) / (2.0 * np.asarray(n) * np.asarray(acoustic_wl))
    if np.any(arg > 1) or np.any(arg < 0):
        raise ValueError("no Bragg solution: wavelength / (2 n acoustic_wl) must be in [0, 1]")
    out = np.arcsin(arg)
    return float(out) if out.ndim == 0 else out


def reflectance(alpha, power):
    """Diffraction efficiency sin^2(sqrt(alpha * power))."""
    if np.any(np.asarray(alpha) < 0) or np.any(np.asarray(power) < 0):
        raise ValueError("alpha and power must be >= 0")
    out = np.sin(np.sqrt(np.asarray(alpha) * np.asarray(power))) ** 2
    return float(out) if out.ndim == 0 else out


def power_for_50_50(alpha: float) -> float:
    """Smallest acoustic power giving a 50/50 split."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    return (math.pi / 4) ** 2 / alpha


def doppler_shift(v, theta, n, nu):
    """Frequency shift of light reflected off a mirror moving at ``v``."""
    if np.any(np.asarray(v) < 0):
        raise ValueError("v must be >= 0")
    out = 2.0 * np.asarray(n) * np.asarray(v) * np.sin(theta) * np.asarray(nu) / C
    return float(out) if out.ndim == 0 else out


def net_frequency_shift(arms, interferometers) -> float:
    """Total frequency shift (Hz) of a pair with photon 1 in ``arms[0]`` and
    photon 2 in ``arms[1]``."""
    (arm1, arm2), (ifo1, ifo2) = arms, interferometers
    return ifo1.arm_shift(arm1) + ifo2.arm_shift(arm2)


def energy_mismatch(interferometers) -> float:
    """Long-long minus short-short total shift; zero when the AOMs compensate."""
    ll = net_frequency_shift((Arm.LONG, Arm.LONG), interferometers)
    ss = net_frequency_shift((Arm.SHORT, Arm.SHORT), interferometers)
    return ll - ss


def coherence_length(wavelength: float, bandwidth: float) -> float:
    """Coherence length lambda^2 / dlambda (no spectral shape factor)."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be > 0")
    return wavelength**2 / bandwidth


def residual_pulse_spread(fiber: FiberLink, photon_offset: float, bandwidth: float) -> float:
    """Wave-packet spread (s) near the zero-dispersion wavelength.

    Uses the linear dispersion D = S0 * (lambda - lambda0), so the spread over
    a band ``bandwidth`` centred ``photon_offset`` away from lambda0 is
    ``S0 * |offset| * bandwidth * L``. ``photon_offset`` is on the photon side;
    a pump detuning of 1 nm corresponds to 2 nm here.
    """
    if abs(photon_offset) > 0.05 * fiber.zero_dispersion_wavelength:
        raise ValueError("photon_offset too large for the linear dispersion model")
    return fiber.dispersion_slope * abs(photon_offset) * bandwidth * fiber.length
