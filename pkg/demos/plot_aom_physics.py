"""
Acousto-optic modulators as moving mirrors
==========================================

A travelling acoustic wave makes a moving Bragg grating. Reflection off it
shifts the light by exactly the acoustic frequency, which is the same answer
as a Doppler shift off a mirror moving at the sound speed.
"""

# %%
import numpy as np

from fransonsim import optics
from fransonsim.optics import AomParams, Arm, Interferometer
from fransonsim.relativity import C

aom = AomParams()
lam = 1313.2e-9
lam_s = optics.acoustic_wavelength(aom)
theta = optics.bragg_angle(lam, aom.refractive_index, lam_s)
print(f"acoustic wavelength {lam_s * 1e6:.1f} um, Bragg angle {np.degrees(theta):.4f} deg")
print(f"Doppler shift {optics.doppler_shift(aom.acoustic_speed, theta, aom.refractive_index, C / lam) / 1e6:.6f} MHz")

# %%
# Reflectance against acoustic power. The 50/50 point is where the
# interferometer behaves as a balanced beam splitter.
p50 = optics.power_for_50_50(aom.coupling)
powers = np.linspace(0, 4 * p50, 9)
for p, r in zip(powers, optics.reflectance(aom.coupling, powers)):
    print(f"power {p:6.3f}  R = {r:.3f}")

# %%
# Two passes through the AOM give 200 MHz on the long arm. Opposite
# travel directions on the two sides cancel in the long-long amplitude; equal
# directions leave a 400 MHz beat that washes out the fringe.
for dirs in ((-1, 1), (1, 1)):
    ifos = tuple(Interferometer(aom=AomParams(travel_direction=s)) for s in dirs)
    ll = optics.net_frequency_shift((Arm.LONG, Arm.LONG), ifos)
    print(f"directions {dirs}: long-long shift {ll / 1e6:+.0f} MHz, "
          f"mismatch {optics.energy_mismatch(ifos) / 1e6:+.0f} MHz")
