"""Joint output-port laws for standard quantum mechanics and Multisimultaneity,
Franson post-selection, and the Bell visibility criterion."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .optics import Arm
from .relativity import CLASS_CODES, TimingClassification

BELL_VISIBILITY = 1.0 / math.sqrt(2.0)


class OutputPort(enum.IntEnum):
    PLUS = 1
    MINUS = -1


class PeakKind(enum.Enum):
    CENTRAL = "central"
    SIDE = "side"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ModelKind:
    """Correlation model.

    A Multisimultaneity model removes the correlations of every pair whose
    timing classification is in ``suppressed``. The quantum model may carry a
    ``suppressed`` set (so a config can switch models) but never applies it.
    """

    name: str = "quantum"
    suppressed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.name not in ("quantum", "multisimultaneity"):
            raise ValueError(f"unknown model {self.name!r}")
        object.__setattr__(
            self, "suppressed", frozenset(TimingClassification(c) for c in self.suppressed)
        )

    @classmethod
    def quantum(cls) -> "ModelKind":
        return cls("quantum")

    @classmethod
    def multisimultaneity(cls, suppressed=(TimingClassification.BEFORE_BEFORE,)) -> "ModelKind":
        return cls("multisimultaneity", frozenset(suppressed))

    @property
    def active_suppressed(self) -> frozenset:
        return self.suppressed if self.name == "multisimultaneity" else frozenset()

    @property
    def suppressed_codes(self) -> np.ndarray:
        return np.array(sorted(CLASS_CODES[c] for c in self.active_suppressed), dtype=np.int8)


@dataclass(frozen=True)
class PathPair:
    arm1: Arm
    arm2: Arm
    emission_delay: float = 0.0


def _check_visibility(V):
    if np.any(np.asarray(V) < 0) or np.any(np.asarray(V) > 1):
        raise ValueError("visibility must lie in [0, 1]")


def qm_joint_probability(phi1, phi2, V, ports):
    """P(s1, s2) = (1 + V s1 s2 cos(phi1 + phi2)) / 4 for interfering pairs."""
    _check_visibility(V)
    s1, s2 = ports
    return (1.0 + V * int(s1) * int(s2) * np.cos(phi1 + phi2)) / 4.0


def ms_joint_probability(classification, phi1, phi2, V, ports, suppressed=None):
    """Multisimultaneity joint law.

    Pairs whose ordering falls in ``suppressed`` (default: before-before) get
    independent unbiased ports; all others follow the quantum law.
    """
    _check_visibility(V)
    if suppressed is None:
        suppressed = {TimingClassification.BEFORE_BEFORE}
    if TimingClassification(classification) in suppressed:
        return 0.25 + 0.0 * np.asarray(phi1 + phi2, dtype=float)
    return qm_joint_probability(phi1, phi2, V, ports)


def franson_postselect(path: PathPair, delay: float, window: float) -> PeakKind:
    """Which coincidence peak a pair lands in.

    ``delay`` is the arm-imbalance delay and ``window`` the full width of the
    coincidence window; equal-arm pairs land in the central peak, unequal-arm
    pairs in a side peak displaced by +-delay.
    """
    if not delay > window:
        raise ValueError(
            f"Franson peaks unresolvable: arm delay {delay:g} s <= coincidence window {window:g} s"
        )
    if abs(path.emission_delay) > window / 2:
        return PeakKind.REJECTED
    if Arm(path.arm1) is Arm(path.arm2):
        return PeakKind.CENTRAL
    return PeakKind.SIDE


@dataclass(frozen=True)
class BellVerdict:
    violated: bool
    margin: float  # (V - 1/sqrt(2)) / sigma_V


def bell_visibility_violated(V: float, sigma_V: float) -> BellVerdict:
    if sigma_V < 0:
        raise ValueError("sigma_V must be >= 0")
    excess = V - BELL_VISIBILITY
    if sigma_V == 0:
        margin = math.copysign(math.inf, excess) if excess else 0.0
    else:
        margin = excess / sigma_V
    return BellVerdict(violated=bool(V > BELL_VISIBILITY), margin=margin)
