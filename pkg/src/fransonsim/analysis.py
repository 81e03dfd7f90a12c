"""Fringe fitting, accidental subtraction and visibility-dip statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .montecarlo import FringeScan


class FitError(ValueError):
    """Raised when a fringe cannot be fitted; ``diagnostics`` says why."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class VisibilityFit:
    amplitude: float
    visibility: float
    phase_offset: float
    baseline: float
    sigma_visibility: float
    reduced_chi2: float
    points_used: int


class CorrectedScan(NamedTuple):
    scan_value: np.ndarray
    counts: np.ndarray  # coincidences minus estimated accidentals, may be < 0
    variance: np.ndarray


def subtract_accidentals(scan: FringeScan) -> CorrectedScan:
    """Remove the R1*R2*tau accidental estimate from every point.

    The variance combines Poisson noise on the raw coincidences with the
    singles-driven uncertainty of the estimate.
    """
    p = scan.points
    coinc = p["coincidences"].astype(float)
    acc = p["accidentals"].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(p["singles_a"] > 0, 1.0 / p["singles_a"], 0.0) + np.where(
            p["singles_b"] > 0, 1.0 / p["singles_b"], 0.0
        )
    var = np.maximum(coinc, 1.0) + acc**2 * rel
    return CorrectedScan(p["scan_value"].astype(float), coinc - acc, var)


def fit_fringe(phase, counts, variance=None) -> VisibilityFit:
    """Weighted least-squares fit of ``B * (1 + V cos(phase + phi0))``.

    The model is linear in ``(B, B V cos phi0, -B V sin phi0)`` so it is solved
    exactly; no iteration. Without ``variance`` Poisson weights
    ``1 / max(count, 1)`` are used.
    """
    phase = np.asarray(phase, dtype=float)
    y = np.asarray(counts, dtype=float)
    if phase.shape != y.shape or phase.ndim != 1:
        raise ValueError("phase and counts must be 1-D arrays of equal length")
    n = y.size
    if n < 4:
        raise FitError("need at least 4 points", points=n)
    var = np.maximum(y, 1.0) if variance is None else np.asarray(variance, dtype=float)
    if np.any(var <= 0) or not np.all(np.isfinite(var)):
        raise FitError("variances must be positive and finite")

    X = np.column_stack([np.ones(n), np.cos(phase), np.sin(phase)])
    if np.linalg.matrix_rank(X) < 3:
        raise FitError("degenerate phase span", span=float(np.ptp(phase)))
    w = 1.0 / var
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    B, P, Q = cov @ (XtW @ y)
    if not B > 0:
        raise FitError("non-positive fitted baseline", baseline=float(B), params=(B, P, Q))

    amp = math.hypot(P, Q)
    V = amp / B
    if amp > 0:
        J = np.array([-V / B, P / (B * amp), Q / (B * amp)])
        sigma = math.sqrt(J @ cov @ J)
    else:
        sigma = math.sqrt(0.5 * (cov[1, 1] + cov[2, 2])) / B
    resid = y - X @ np.array([B, P, Q])
    chi2 = float(np.sum(w * resid**2))
    return VisibilityFit(
        amplitude=amp,
        visibility=V,
        phase_offset=math.atan2(-Q, P),
        baseline=float(B),
        sigma_visibility=sigma,
        reduced_chi2=chi2 / (n - 3),
        points_used=n,
    )


def fit_scan(scan: FringeScan, subtract: bool = True) -> VisibilityFit:
    """Fit a phase scan, by default after accidental subtraction."""
    if subtract:
        c = subtract_accidentals(scan)
        return fit_fringe(c.scan_value, c.counts, c.variance)
    return fit_fringe(scan["scan_value"], scan["coincidences"])


@dataclass(frozen=True)
class DipResult:
    dip_detected: bool
    location: float
    depth_in_sigma: float
    window_mean: float
    rest_mean: float


@dataclass
class VisibilityCurve:
    offset: np.ndarray
    visibility: np.ndarray  # NaN where the fit failed
    sigma: np.ndarray
    fits: list
    dip: DipResult | None = None
    width: float = math.nan  # full width of the dip at half depth


def dip_test(curve, window_steps: int = 3, threshold: float = 5.0) -> DipResult:
    """Look for ``window_steps`` consecutive points sitting well below the rest.

    For every run of ``k`` consecutive fitted points the run mean is compared
    with the mean of all other points; the run with the largest significance
    is reported and a dip is declared when it exceeds ``threshold`` sigma.
    """
    if isinstance(curve, VisibilityCurve):
        x, v, s = curve.offset, curve.visibility, curve.sigma
    else:
        x, v, s = (np.asarray(a, dtype=float) for a in curve)
    ok = np.isfinite(v) & np.isfinite(s)
    x, v, s = x[ok], v[ok], s[ok]
    k = int(window_steps)
    if k < 1 or k > v.size:
        raise ValueError(f"window_steps={k} incompatible with {v.size} fitted points")
    if k == v.size:
        raise ValueError("dip test needs points outside the window")

    best = None
    for i in range(v.size - k + 1):
        inside = np.zeros(v.size, dtype=bool)
        inside[i : i + k] = True
        m_in = v[inside].mean()
        m_out = v[~inside].mean()
        s_in = math.sqrt(np.sum(s[inside] ** 2)) / k
        s_out = math.sqrt(np.sum(s[~inside] ** 2)) / (~inside).sum()
        depth = (m_out - m_in) / math.hypot(s_in, s_out)
        if best is None or depth > best[0]:
            best = (depth, float(x[inside].mean()), m_in, m_out)
    depth, loc, m_in, m_out = best
    return DipResult(bool(depth > threshold), loc, float(depth), float(m_in), float(m_out))


def dip_width(offset, visibility) -> float:
    """Full width at half depth of the deepest dip, by linear interpolation.

    The reference level is the median visibility. Returns NaN when either
    flank never climbs back above half depth.
    """
    x = np.asarray(offset, dtype=float)
    v = np.asarray(visibility, dtype=float)
    ok = np.isfinite(v)
    x, v = x[ok], v[ok]
    if v.size < 3:
        return math.nan
    i0 = int(np.argmin(v))
    half = 0.5 * (np.median(v) + v[i0])

    def crossing(step):
        i = i0
        while 0 <= i + step < v.size:
            j = i + step
            if v[j] >= half:
                if v[j] == v[i]:
                    return x[j]
                return x[i] + (half - v[i]) * (x[j] - x[i]) / (v[j] - v[i])
            i = j
        return math.nan

    return float(crossing(1) - crossing(-1))


def visibility_vs_offset(scans, window_steps: int = 3, subtract: bool = True) -> VisibilityCurve:
    """Fit every ``(offset, phase scan)`` pair and collect the curve.

    Scans that cannot be fitted become NaN gaps. ``scans`` may also be a single
    path-length :class:`FringeScan`.
    """
    if isinstance(scans, FringeScan):
        scans = scans.by_offset()
    scans = sorted(scans, key=lambda t: t[0])
    offs, vis, sig, fits = [], [], [], []
    for off, sc in scans:
        try:
            f = fit_scan(sc, subtract=subtract)
            vis.append(f.visibility)
            sig.append(f.sigma_visibility)
        except FitError as exc:
            f = exc
            vis.append(math.nan)
            sig.append(math.nan)
        offs.append(off)
        fits.append(f)
    curve = VisibilityCurve(np.array(offs), np.array(vis), np.array(sig), fits)
    n_ok = int(np.isfinite(curve.visibility).sum())
    if n_ok > window_steps:
        curve.dip = dip_test(curve, window_steps)
        if curve.dip.dip_detected:
            curve.width = dip_width(curve.offset, curve.visibility)
    return curve
