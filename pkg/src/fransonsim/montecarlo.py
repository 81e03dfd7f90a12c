"""Event-by-event simulation of phase and path-length scans.

Each scan row (one phase value at one path offset) owns an independent
Philox stream keyed on ``(seed, row index)``, so results do not depend on how
rows are distributed over workers.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import optics
from .models import ModelKind, PathPair, franson_postselect
from .optics import Arm, FiberLink, Interferometer, SourceParams, AomParams
from .relativity import (
    C,
    CLASS_CODES,
    CLASS_FROM_CODE,
    TimingClassification,
    classify_dt,
)

CSV_COLUMNS = ["scan_value", "coincidences", "singles_a", "singles_b", "accidentals", "pairs"]
MAX_POINTS = 10**6


class ScanKind(str, enum.Enum):
    PHASE = "phase"
    PATH_LENGTH = "length"


@dataclass
class DetectorModel:
    efficiency: float = 0.2
    dark_count_rate: float = 2e4
    coincidence_window: float = 0.4e-9

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError("DetectorModel.efficiency must be in (0, 1]")
        if self.dark_count_rate < 0:
            raise ValueError("DetectorModel.dark_count_rate must be >= 0")
        if not self.coincidence_window > 0:
            raise ValueError("DetectorModel.coincidence_window must be > 0")


def _receding_analyzers():
    # A sits at x = 0 with its wave moving to -x, B's wave moves to +x
    return (
        Interferometer(aom=AomParams(travel_direction=-1), position=0.0),
        Interferometer(aom=AomParams(travel_direction=1)),
    )


@dataclass
class ExperimentConfig:
    source: SourceParams = field(default_factory=SourceParams)
    fibers: tuple = field(default_factory=lambda: (FiberLink(), FiberLink()))
    analyzers: tuple = field(default_factory=_receding_analyzers)
    detectors: tuple = field(default_factory=lambda: (DetectorModel(), DetectorModel()))
    separation: float = 55.0
    path_offset: float = 0.0
    model: ModelKind = field(default_factory=ModelKind.quantum)
    pairs_per_point: int = 100_000
    seed: int = 0
    jitter: bool = True
    timing_uncertainty: float | None = None  # s; None -> one 0.12 mm scan step

    def __post_init__(self):
        self.fibers = tuple(self.fibers)
        self.analyzers = tuple(self.analyzers)
        self.detectors = tuple(self.detectors)
        if len(self.fibers) != 2 or len(self.analyzers) != 2 or len(self.detectors) != 2:
            raise ValueError("need exactly two fibers, analyzers and detectors")
        if not self.separation > 0:
            raise ValueError("separation must be > 0")
        self.analyzers[1].position = self.analyzers[0].position + self.separation
        if not self.pairs_per_point > 0:
            raise ValueError("pairs_per_point must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.timing_uncertainty is not None and not self.timing_uncertainty > 0:
            raise ValueError("timing_uncertainty must be > 0")

        lc = self.coherence_length
        for i, ifo in enumerate(self.analyzers):
            if ifo.arm_imbalance < 10 * lc:
                raise ValueError(
                    f"analyzers[{i}].arm_imbalance {ifo.arm_imbalance:g} m is not much longer "
                    f"than the photon coherence length {lc:g} m"
                )
            if ifo.delay >= self.source.pump_coherence_time:
                raise ValueError(f"analyzers[{i}] delay exceeds the pump coherence time")
            if ifo.delay <= self.coincidence_window:
                raise ValueError(
                    f"analyzers[{i}]: Franson peaks unresolvable (arm delay {ifo.delay:g} s "
                    f"<= coincidence window {self.coincidence_window:g} s)"
                )
        a, b = self.analyzers
        if abs(a.arm_imbalance - b.arm_imbalance) > lc:
            raise ValueError("arm imbalances differ by more than the coherence length")

    @property
    def coincidence_window(self) -> float:
        return max(d.coincidence_window for d in self.detectors)

    @property
    def coherence_length(self) -> float:
        return optics.coherence_length(
            self.source.photon_center_wavelength, self.source.filter_bandwidth
        )

    @property
    def frame_velocities(self) -> tuple[float, float]:
        return tuple(ifo.aom.velocity for ifo in self.analyzers)

    def dispersion_spreads(self) -> tuple[float, float]:
        return tuple(
            optics.residual_pulse_spread(
                f, self.source.photon_offset(f), self.source.filter_bandwidth
            )
            for f in self.fibers
        )

    @property
    def jitter_rms(self) -> float:
        """RMS of the relative arrival delay of the two photons at their AOMs."""
        if not self.jitter:
            return 0.0
        coh = self.coherence_length / (C * math.sqrt(2.0))
        return math.sqrt(coh**2 + sum(s**2 for s in self.dispersion_spreads()))

    @property
    def energy_mismatch(self) -> float:
        return optics.energy_mismatch(self.analyzers)


@dataclass
class ScanSpec:
    kind: ScanKind = ScanKind.PHASE
    start: float = 0.0
    stop: float = 2 * math.pi * 11 / 12
    step: float = 2 * math.pi / 12
    phase_steps: int = 12  # phase points per offset for path-length scans

    def __post_init__(self):
        self.kind = ScanKind(self.kind)
        if not self.step > 0:
            raise ValueError("ScanSpec.step must be > 0")
        if self.stop < self.start:
            raise ValueError("ScanSpec.stop must be >= start")
        if (self.stop - self.start) / self.step > MAX_POINTS:
            raise ValueError(f"scan has more than {MAX_POINTS} points")
        if self.phase_steps < 1:
            raise ValueError("ScanSpec.phase_steps must be >= 1")

    @classmethod
    def phase(cls, n: int = 12) -> "ScanSpec":
        step = 2 * math.pi / n
        return cls(ScanKind.PHASE, 0.0, step * (n - 1), step)

    @classmethod
    def path_length(
        cls, step: float = 0.12e-3, half_range: float = 3e-3, phase_steps: int = 12
    ) -> "ScanSpec":
        return cls(ScanKind.PATH_LENGTH, -half_range, half_range, step, phase_steps)

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        vals = self.start + self.step * np.arange(n)
        vals[np.abs(vals) < 1e-9 * self.step] = 0.0
        return vals

    def rows(self, config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
        """(offset, phase_sum) for every simulated row, in output order."""
        phi2 = config.analyzers[1].phase
        if self.kind is ScanKind.PHASE:
            phases = self.values() + phi2
            return np.full(phases.shape, config.path_offset), phases
        sweep = 2 * math.pi * np.arange(self.phase_steps) / self.phase_steps
        sweep = sweep + config.analyzers[0].phase + phi2
        offsets = self.values()
        return np.repeat(offsets, self.phase_steps), np.tile(sweep, offsets.size)


class PairBatch(NamedTuple):
    emission: np.ndarray  # emission time (s)
    dt: np.ndarray  # tB - tA at the AOMs (s)
    classification: np.ndarray  # int8 codes
    long1: np.ndarray  # bool, photon 1 took the long arm
    long2: np.ndarray
    port1: np.ndarray  # int8, +1 is the collected port
    port2: np.ndarray
    detected1: np.ndarray
    detected2: np.ndarray
    t1: np.ndarray  # detection times (s)
    t2: np.ndarray


class PairOutcome(NamedTuple):
    path: PathPair
    classification: TimingClassification
    ports: tuple[int, int]
    detected: tuple[bool, bool]
    detection_times: tuple[float | None, float | None]


def row_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def sample_pairs(
    config: ExperimentConfig, offset: float, phase_sum: float, n: int, rng: np.random.Generator
) -> PairBatch:
    """Draw ``n`` pairs through the whole pipeline except coincidence counting."""
    src = config.source
    ifo1, ifo2 = config.analyzers
    duration = n / src.pair_rate

    emission = rng.uniform(0.0, duration, n)
    dt = offset / C + rng.normal(0.0, 1.0, n) * config.jitter_rms
    vA, vB = config.frame_velocities
    cls = classify_dt(dt, config.separation, vA, vB)

    # the AOM diffracts into the shifted arm with probability R
    p_long = [
        ifo.aom.reflectance if ifo.shifted_arm is Arm.LONG else 1.0 - ifo.aom.reflectance
        for ifo in (ifo1, ifo2)
    ]
    long1 = rng.random(n) < p_long[0]
    long2 = rng.random(n) < p_long[1]
    central = long1 == long2

    vis = np.full(n, src.visibility)
    if config.model.active_suppressed:
        vis[np.isin(cls, config.model.suppressed_codes)] = 0.0
    vis[~central] = 0.0
    # a residual energy difference between the short-short and long-long
    # amplitudes makes the two-photon phase beat in time
    phase = phase_sum + 2 * math.pi * config.energy_mismatch * emission

    port1 = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    same = rng.random(n) < 0.5 * (1.0 + vis * np.cos(phase))
    port2 = np.where(same, port1, -port1).astype(np.int8)

    det1, det2 = config.detectors
    detected1 = (port1 > 0) & (rng.random(n) < det1.efficiency * ifo1.transmission)
    detected2 = (port2 > 0) & (rng.random(n) < det2.efficiency * ifo2.transmission)

    tA = emission
    t1 = tA + long1 * ifo1.delay
    t2 = tA + dt + long2 * ifo2.delay
    return PairBatch(emission, dt, cls, long1, long2, port1, port2, detected1, detected2, t1, t2)


def simulate_pair(
    config: ExperimentConfig, scan_value: float, rng: np.random.Generator, kind=ScanKind.PHASE
) -> PairOutcome:
    """One pair. ``scan_value`` is the phase of analyzer A for a phase scan or
    the path offset for a path-length scan; the other quantity comes from
    ``config``."""
    kind = ScanKind(kind)
    phi2 = config.analyzers[1].phase
    if kind is ScanKind.PHASE:
        offset, phase_sum = config.path_offset, scan_value + phi2
    else:
        offset, phase_sum = scan_value, config.analyzers[0].phase + phi2
    b = sample_pairs(config, offset, phase_sum, 1, rng)
    arms = [Arm.LONG if x[0] else Arm.SHORT for x in (b.long1, b.long2)]
    path = PathPair(arms[0], arms[1], float(b.t2[0] - b.t1[0]))
    # validates that the Franson peaks are resolvable
    franson_postselect(
        PathPair(arms[0], arms[1]), config.analyzers[0].delay, config.coincidence_window
    )
    d1, d2 = bool(b.detected1[0]), bool(b.detected2[0])
    return PairOutcome(
        path=path,
        classification=CLASS_FROM_CODE[int(b.classification[0])],
        ports=(int(b.port1[0]), int(b.port2[0])),
        detected=(d1, d2),
        detection_times=(float(b.t1[0]) if d1 else None, float(b.t2[0]) if d2 else None),
    )


def accidental_estimate(rate1, rate2, window, duration):
    """Expected accidental coincidences R1 * R2 * tau * T."""
    if np.any(np.asarray(rate1) < 0) or np.any(np.asarray(rate2) < 0):
        raise ValueError("rates must be >= 0")
    return rate1 * rate2 * window * duration


POINT_FIELDS = [
    ("scan_value", "f8"),
    ("offset", "f8"),
    ("phase", "f8"),
    ("coincidences", "i8"),
    ("singles_a", "i8"),
    ("singles_b", "i8"),
    ("accidentals", "f8"),
    ("pairs", "i8"),
    ("accidentals_true", "i8"),
    ("plus_a", "i8"),
    ("plus_b", "i8"),
    ("central", "i8"),
    ("before_before", "i8"),
    ("after_after", "i8"),
    ("duration", "f8"),
]


def _simulate_row(config: ExperimentConfig, offset: float, phase_sum: float, index: int) -> tuple:
    rng = row_rng(config.seed, index)
    n = config.pairs_per_point
    duration = n / config.source.pair_rate
    b = sample_pairs(config, offset, phase_sum, n, rng)

    dark = [rng.poisson(d.dark_count_rate * duration) for d in config.detectors]
    tags_a = np.concatenate([b.t1[b.detected1], rng.uniform(0, duration, dark[0])])
    tags_b = np.concatenate([b.t2[b.detected2], rng.uniform(0, duration, dark[1])])
    tags_a.sort()

    half = config.coincidence_window / 2
    lo = np.searchsorted(tags_a, tags_b - half, side="left")
    hi = np.searchsorted(tags_a, tags_b + half, side="right")
    coincidences = int(np.sum(hi - lo))
    both = b.detected1 & b.detected2
    true = int(np.sum(np.abs(b.t2[both] - b.t1[both]) <= half))

    singles_a, singles_b = tags_a.size, tags_b.size
    acc = accidental_estimate(singles_a / duration, singles_b / duration,
                              config.coincidence_window, duration)
    cls = b.classification
    return (
        0.0,
        offset,
        phase_sum,
        coincidences,
        singles_a,
        singles_b,
        acc,
        n,
        coincidences - true,
        int(np.sum(b.port1 > 0)),
        int(np.sum(b.port2 > 0)),
        int(np.sum(b.long1 == b.long2)),
        int(np.sum(cls == CLASS_CODES[TimingClassification.BEFORE_BEFORE])),
        int(np.sum(cls == CLASS_CODES[TimingClassification.AFTER_AFTER])),
        duration,
    )


@dataclass
class FringeScan:
    kind: ScanKind
    points: np.ndarray  # structured array with POINT_FIELDS
    config: ExperimentConfig | None = None
    spec: ScanSpec | None = None
    seed: int | None = None

    def __len__(self):
        return len(self.points)

    def __getitem__(self, name):
        return self.points[name]

    def offsets(self) -> np.ndarray:
        return np.unique(self.points["offset"])

    def by_offset(self) -> list[tuple[float, "FringeScan"]]:
        """Split a path-length scan into one phase scan per offset."""
        out = []
        for off in self.offsets():
            sub = self.points[self.points["offset"] == off].copy()
            sub["scan_value"] = sub["phase"]
            out.append((float(off), FringeScan(ScanKind.PHASE, sub, self.config, self.spec, self.seed)))
        return out

    def to_csv(self, path) -> None:
        """Write the point table. Path-length scans get an extra ``phase`` column."""
        cols = list(CSV_COLUMNS)
        if self.kind is ScanKind.PATH_LENGTH:
            cols.insert(1, "phase")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for p in self.points:
                row = []
                for c in cols:
                    v = p[c]
                    if c in ("scan_value", "phase"):
                        row.append(repr(float(v)))
                    elif c == "accidentals":
                        row.append(f"{float(v):.9g}")
                    else:
                        row.append(str(int(v)))
                w.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "FringeScan":
        """Parse a point table written by :meth:`to_csv` (or by hand).

        Raises ``ValueError`` naming the offending line for malformed rows.
        """
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}:1: header missing columns {missing}")
        kind = ScanKind.PATH_LENGTH if "phase" in header else ScanKind.PHASE
        recs = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not x.strip() for x in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = {h: float(x) for h, x in zip(header, row)}
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals.values()):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            if any(vals[c] < 0 for c in CSV_COLUMNS[1:]):
                raise ValueError(f"{path}:{lineno}: negative count")
            recs.append(vals)
        if not recs:
            raise ValueError(f"{path}: no data rows")
        pts = np.zeros(len(recs), dtype=POINT_FIELDS)
        for i, r in enumerate(recs):
            pts[i]["scan_value"] = r["scan_value"]
            if kind is ScanKind.PATH_LENGTH:
                pts[i]["offset"] = r["scan_value"]
                pts[i]["phase"] = r["phase"]
            else:
                pts[i]["phase"] = r["scan_value"]
            for c in CSV_COLUMNS[1:]:
                pts[i][c] = r[c]
        return cls(kind, pts)


def run_scan(config: ExperimentConfig, spec: ScanSpec, workers: int = 1) -> FringeScan:
    """Simulate every row of ``spec``.

    The output is bit-identical for equal ``(config, spec)`` whatever
    ``workers`` is.
    """
    offsets, phases = spec.rows(config)
    jobs = list(zip(offsets.tolist(), phases.tolist(), range(offsets.size)))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda j: _simulate_row(config, *j), jobs))
    else:
        rows = [_simulate_row(config, *j) for j in jobs]
    pts = np.array(rows, dtype=POINT_FIELDS)
    pts["scan_value"] = pts["phase"] if spec.kind is ScanKind.PHASE else pts["offset"]
    if spec.kind is ScanKind.PHASE:
        # report analyzer A's phase, not the phase sum
        pts["scan_value"] -= config.analyzers[1].phase
    return FringeScan(spec.kind, pts, config, spec, config.seed)
