"""
Timing budget of a before-before test
=====================================

Two analyzers move apart at a few km/s. In each one's rest frame the other
measurement happens later, but only inside a very narrow slice of lab-frame
arrival delays. This script sizes that slice and the path-length alignment it
demands.
"""

# %%
# The lab-frame delay between the two measurements, seen from a frame moving
# at ``v``, picks up a term ``-v d / c^2``. For the two frames to disagree on
# ordering the lab delay must be smaller than that term.
import numpy as np

from fransonsim.relativity import (
    before_before_window,
    classify_dt,
    influence_speed_lower_bound,
    path_tolerance,
)

v, d = 2500.0, 55.0
print(f"window    {before_before_window(v, d) * 1e12:.3f} ps")
print(f"tolerance {path_tolerance(v, d) * 1e3:.3f} mm of optical path")

# %%
# Sweep the lab-frame delay and classify each value. Receding analyzers put A
# at -v and B at +v.
delays = np.linspace(-2e-12, 2e-12, 4001)
codes = classify_dt(delays, d, -v, v)
bb = delays[codes == 0]
print(f"before-before for {bb.min() * 1e12:+.3f} ps < dt < {bb.max() * 1e12:+.3f} ps")

# %%
# A speed-of-influence bound follows from the timing uncertainty.
for dt in (0.1e-12, 0.4e-12, 1e-12):
    print(f"dt = {dt * 1e12:.1f} ps -> influence faster than {influence_speed_lower_bound(d, dt):.3g} c")

# %%
# The window grows linearly with separation and speed.
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    speeds = np.linspace(0, 5000, 101)
    fig, ax = plt.subplots()
    for sep in (10.0, 55.0, 200.0):
        window = [before_before_window(s, sep) for s in speeds]
        ax.plot(speeds, np.array(window) * 1e12, label=f"d = {sep:g} m")
    ax.set_xlabel("analyzer speed (m/s)")
    ax.set_ylabel("before-before window (ps)")
    ax.legend()
    fig.savefig("timing_budget.png", dpi=120)
