"""Frame-dependent time ordering of the two analyzer events.

Everything here is one-dimensional: events live on the axis joining the
two analyzers and frames move along that axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

C = 299_792_458.0  # m/s


class TimingClassification(enum.Enum):
    BEFORE_BEFORE = "BeforeBefore"
    AFTER_AFTER = "AfterAfter"
    BEFORE_AFTER = "BeforeAfter"
    AFTER_BEFORE = "AfterBefore"
    DEGENERATE = "Degenerate"


# integer codes used by the vectorised classifier
CLASS_CODES = {
    TimingClassification.BEFORE_BEFORE: 0,
    TimingClassification.AFTER_AFTER: 1,
    TimingClassification.BEFORE_AFTER: 2,
    TimingClassification.AFTER_BEFORE: 3,
    TimingClassification.DEGENERATE: 4,
}
CLASS_FROM_CODE = {v: k for k, v in CLASS_CODES.items()}


@dataclass(frozen=True)
class SpacetimeEvent:
    t: float
    x: float
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError(f"non-finite event coordinates: {self}")


@dataclass(frozen=True)
class FrameVelocity:
    v: float

    def __post_init__(self):
        _check_speed(self.v)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - (self.v / C) ** 2)


def _check_speed(v):
    if not np.all(np.abs(np.asarray(v, dtype=float)) < C):
        raise ValueError(f"frame speed must satisfy |v| < c, got {v}")


def _as_speed(frame) -> float:
    if isinstance(frame, FrameVelocity):
        return frame.v
    _check_speed(frame)
    return float(frame)


def boosted_dt(dt, dx, v):
    """Vectorised t'_B - t'_A for lab separations ``dt = tB - tA``, ``dx = xB - xA``.

    Works on scalars or numpy arrays. The difference is formed before boosting
    so that swapping the events negates the result exactly.
    """
    _check_speed(v)
    gamma = 1.0 / np.sqrt(1.0 - (np.asarray(v, dtype=float) / C) ** 2)
    return gamma * (dt - v * dx / C**2)


def boosted_time_difference(eA: SpacetimeEvent, eB: SpacetimeEvent, frame) -> float:
    """Time of ``eB`` minus time of ``eA`` as seen from a frame moving at ``frame.v``."""
    v = _as_speed(frame)
    return float(boosted_dt(eB.t - eA.t, eB.x - eA.x, v))


def before_before_window(v: float, d: float) -> float:
    """Largest lab-frame |dt| for which two frames receding at +-v disagree on order.

    Returns ``v * d / c**2`` in seconds.
    """
    if v < 0:
        raise ValueError("v must be >= 0")
    if d <= 0:
        raise ValueError("d must be > 0")
    return v * d / C**2


def path_tolerance(v: float, d: float) -> float:
    """Path-length mismatch (m, in air/vacuum) equivalent to the before-before window."""
    return C * before_before_window(v, d)


def classify_dt(dt, dx, vA, vB):
    """Vectorised classifier returning integer codes (see ``CLASS_CODES``).

    ``dt``/``dx`` are ``tB - tA`` and ``xB - xA`` in the lab; ``vA``/``vB`` are
    the velocities of the frames attached to analyzers A and B.
    """
    _check_speed(vA)
    _check_speed(vB)
    # gamma > 0 never changes the sign, so compare the bracket directly
    in_a = np.sign(dt - vA * dx / C**2)
    in_b = np.sign(dt - vB * dx / C**2)
    in_a, in_b = np.broadcast_arrays(in_a, in_b)
    code = np.full(in_a.shape, CLASS_CODES[TimingClassification.DEGENERATE], dtype=np.int8)
    # in frame A a positive difference means A acted first
    code[(in_a > 0) & (in_b < 0)] = CLASS_CODES[TimingClassification.BEFORE_BEFORE]
    code[(in_a < 0) & (in_b > 0)] = CLASS_CODES[TimingClassification.AFTER_AFTER]
    code[(in_a > 0) & (in_b > 0)] = CLASS_CODES[TimingClassification.BEFORE_AFTER]
    code[(in_a < 0) & (in_b < 0)] = CLASS_CODES[TimingClassification.AFTER_BEFORE]
    return code


def classify(
    eA: SpacetimeEvent, eB: SpacetimeEvent, frameA, frameB
) -> TimingClassification:
    """Ordering verdict when each analyzer judges time in its own rest frame.

    BeforeBefore means A is first according to A's frame and B is first
    according to B's frame; AfterAfter is the mirror case. BeforeAfter and
    AfterBefore mean both frames agree that A (respectively B) came first.
    """
    vA, vB = _as_speed(frameA), _as_speed(frameB)
    code = classify_dt(eB.t - eA.t, eB.x - eA.x, vA, vB)
    return CLASS_FROM_CODE[int(code)]


def influence_speed_lower_bound(d: float, dt_uncertainty: float) -> float:
    """Lower bound on a hypothetical influence speed, in units of c."""
    if not dt_uncertainty > 0:
        raise ValueError("dt_uncertainty must be > 0")
    return d / dt_uncertainty / C
