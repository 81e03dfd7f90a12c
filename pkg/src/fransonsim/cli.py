"""Command-line entry point: ``fransonsim {plan,simulate,fit,compare}``.

Exit codes: 0 success, 2 configuration or input error, 3 runtime/fit failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, analysis, config as cfgio, optics
from .models import BELL_VISIBILITY, ModelKind, bell_visibility_violated
from .montecarlo import ExperimentConfig, FringeScan, ScanKind, run_scan
from .relativity import C, before_before_window, influence_speed_lower_bound, path_tolerance

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
MANIFEST = "manifest.yaml"


def _geometry(config: ExperimentConfig) -> tuple[str, float]:
    """Name of the relative-motion geometry and the symmetric speed it implies."""
    vA, vB = config.frame_velocities
    v = abs(vB - vA) / 2
    if vB > vA:
        return "before-before", v
    if vB < vA:
        return "after-after", v
    return "co-moving", 0.0


def plan(config: ExperimentConfig, scan: cfgio.ScanDefaults) -> dict:
    """Timing and alignment budgets for a configuration."""
    geometry, v = _geometry(config)
    d = config.separation
    window = before_before_window(v, d)
    tol = path_tolerance(v, d)
    src = config.source
    a = config.analyzers[0]
    aom = a.aom
    lam_s = optics.acoustic_wavelength(aom)
    theta = optics.bragg_angle(src.photon_center_wavelength, aom.refractive_index, lam_s)
    lc = config.coherence_length
    spreads = config.dispersion_spreads()
    spread = max(spreads)

    meas = math.sqrt(
        sum(f.length_uncertainty**2 for f in config.fibers)
        + sum(i.path_uncertainty**2 for i in config.analyzers)
    )
    testable = window > 0
    checks = {
        "coherence_length_within_tolerance": lc < tol,
        "dispersion_within_tolerance": C * spread < tol,
        "measurement_within_tolerance": meas < tol,
        "scan_covers_measurement_uncertainty": scan.half_range >= 3 * meas,
        "scan_step_resolves_window": scan.length_step < tol,
        "filter_inside_aom_passband": src.filter_bandwidth < optics.AOM_PASSBAND,
        "frequency_shifts_compensate": config.energy_mismatch == 0.0,
    }
    budget_ok = testable and (
        checks["coherence_length_within_tolerance"]
        and checks["dispersion_within_tolerance"]
        and checks["frequency_shifts_compensate"]
        and (
            checks["measurement_within_tolerance"]
            or (checks["scan_covers_measurement_uncertainty"] and checks["scan_step_resolves_window"])
        )
    )

    back_derived = config.timing_uncertainty is None
    dt_unc = scan.length_step / C if back_derived else config.timing_uncertainty
    return {
        "geometry": geometry,
        "relative_speed_m_s": v,
        "separation_m": d,
        "before_before_window_s": window,
        "path_tolerance_m": tol,
        "testable": testable,
        "acoustic_wavelength_m": lam_s,
        "bragg_angle_rad": theta,
        "bragg_angle_deg": math.degrees(theta),
        "power_for_50_50_W": optics.power_for_50_50(aom.coupling),
        "reflectance_at_power": aom.reflectance,
        "double_pass_shift_Hz": a.passes_per_reflection * aom.rf_frequency,
        "energy_mismatch_Hz": config.energy_mismatch,
        "coherence_length_m": lc,
        "dispersion_spread_s": list(spreads),
        "dispersion_spread_length_m": [C * s for s in spreads],
        "arrival_jitter_rms_s": config.jitter_rms,
        "interferometer_throughput": [0.5 * i.transmission for i in config.analyzers],
        "measurement_uncertainty_m": meas,
        "checks": checks,
        "alignment_budget_ok": bool(budget_ok),
        "bell_visibility_threshold": BELL_VISIBILITY,
        "influence_bound": {
            "timing_uncertainty_s": dt_unc,
            "back_derived": back_derived,
            "note": "timing uncertainty taken as one scan step / c" if back_derived else "configured",
            "speed_in_c": influence_speed_lower_bound(d, dt_unc),
        },
    }


def _fit_summary(fit: analysis.VisibilityFit) -> dict:
    verdict = bell_visibility_violated(fit.visibility, fit.sigma_visibility)
    out = {k: float(v) if isinstance(v, (float, np.floating)) else v
           for k, v in dataclasses.asdict(fit).items()}
    out["bell"] = {"violated": verdict.violated, "margin_sigma": float(verdict.margin),
                   "verdict": "violated" if verdict.violated else "not violated"}
    return out


def _curve_summary(curve: analysis.VisibilityCurve) -> dict:
    out = {
        "points": int(np.isfinite(curve.visibility).sum()),
        "dip_detected": False,
        "dip_location_m": None,
        "dip_depth_sigma": None,
        "dip_width_m": None,
    }
    if curve.dip is not None:
        out.update(
            dip_detected=curve.dip.dip_detected,
            dip_location_m=curve.dip.location,
            dip_depth_sigma=curve.dip.depth_in_sigma,
            dip_width_m=None if math.isnan(curve.width) else curve.width,
        )
    return out


def write_curve(curve: analysis.VisibilityCurve, path) -> None:
    with open(path, "w") as fh:
        fh.write("offset,visibility,sigma\n")
        for x, v, s in zip(curve.offset, curve.visibility, curve.sigma):
            fh.write(f"{float(x)!r},{float(v)!r},{float(s)!r}\n")


def _with_model(config: ExperimentConfig, model: str | None, seed: int | None) -> ExperimentConfig:
    changes = {}
    if model is not None:
        name = {"qm": "quantum", "ms": "multisimultaneity"}[model]
        changes["model"] = ModelKind(name, config.model.suppressed)
    if seed is not None:
        changes["seed"] = seed
    return dataclasses.replace(config, **changes) if changes else config


def simulate(config, scan_defaults, kind: str, out: Path, workers: int = 1, extra=None) -> dict:
    """Run one scan into ``out`` and return the manifest written beside it."""
    spec = scan_defaults.spec(kind)
    t0 = time.perf_counter()
    result = run_scan(config, spec, workers=workers)
    files = {"points": "points.csv"}
    result.to_csv(out / files["points"])
    summary = {}
    if result.kind is ScanKind.PHASE:
        summary["fit"] = _fit_summary(analysis.fit_scan(result))
    else:
        curve = analysis.visibility_vs_offset(result)
        files["visibility"] = "visibility.csv"
        write_curve(curve, out / files["visibility"])
        summary["curve"] = _curve_summary(curve)
        summary["marginals"] = _marginals(result)
    manifest = {
        "tool": "fransonsim",
        "version": __version__,
        "command": "simulate",
        "scan": kind,
        "seed": config.seed,
        "outputs": files,
        "results": summary,
        "config": cfgio.config_to_dict(config, scan_defaults),
        "wall_clock_seconds": time.perf_counter() - t0,
    }
    if extra:
        manifest.update(extra)
    (out / MANIFEST).write_text(yaml.safe_dump(_jsonable(manifest), sort_keys=False))
    return manifest


def _marginals(scan: FringeScan) -> dict:
    p = scan.points
    n = p["pairs"].astype(float)
    dev = [(p[k] - n / 2) / np.sqrt(n / 4) for k in ("plus_a", "plus_b")]
    return {"max_abs_deviation_sigma": float(max(np.max(np.abs(d)) for d in dev))}


def compare(config, scan_defaults, out: Path | None = None, workers: int = 1) -> dict:
    """Run the path-length scan under both models on identical seeds."""
    spec = scan_defaults.spec("length")
    report = {}
    for tag, name in (("qm", "quantum"), ("ms", "multisimultaneity")):
        cfg = dataclasses.replace(config, model=ModelKind(name, config.model.suppressed))
        scan = run_scan(cfg, spec, workers=workers)
        curve = analysis.visibility_vs_offset(scan)
        if out is not None:
            scan.to_csv(out / f"{tag}_points.csv")
            write_curve(curve, out / f"{tag}_visibility.csv")
        report[tag] = _curve_summary(curve)
        report[tag]["curve"] = {
            "offset": curve.offset.tolist(),
            "visibility": curve.visibility.tolist(),
            "sigma": curve.sigma.tolist(),
        }
    report["discrimination_sigma"] = (report["ms"]["dip_depth_sigma"] or 0.0) - (
        report["qm"]["dip_depth_sigma"] or 0.0
    )
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _emit(obj) -> None:
    print(json.dumps(_jsonable(obj), indent=2, allow_nan=True))


def _load(args):
    if getattr(args, "manifest", None):
        try:
            data = yaml.safe_load(Path(args.manifest).read_text())
            cfg = data["config"]
            if args.scan is None:
                args.scan = data["scan"]
        except (OSError, yaml.YAMLError, KeyError, TypeError) as exc:
            raise cfgio.ConfigError(f"unusable manifest {args.manifest}: {exc}") from None
        return cfgio.config_from_dict(cfg)
    path = args.config or cfgio.default_config_path()
    return cfgio.load(path)


def _prepare_out(out: Path) -> Path:
    """Stage outputs in a sibling temp dir; moved into place only on success."""
    out.parent.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=f".{out.name}-", dir=out.parent))


def _commit(staged: Path, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for f in staged.iterdir():
        shutil.move(str(f), out / f.name)
    staged.rmdir()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fransonsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", type=Path, help="experiment config (default: shipped default config)")
        if seed:
            sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path, help="output directory")

    sp = sub.add_parser("plan", help="timing and alignment budgets")
    common(sp, seed=False)

    sp = sub.add_parser("simulate", help="Monte-Carlo scan")
    common(sp)
    sp.add_argument("--model", choices=["qm", "ms"])
    sp.add_argument("--scan", choices=["phase", "length"], help="default: phase")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--manifest", type=Path, help="re-run from an earlier manifest")

    sp = sub.add_parser("fit", help="fit fringe data from a CSV file")
    sp.add_argument("data", type=Path)
    sp.add_argument("--no-subtract", action="store_true", help="keep accidental coincidences")
    sp.add_argument("--out", type=Path)

    sp = sub.add_parser("compare", help="quantum vs Multisimultaneity path-length scans")
    common(sp)
    sp.add_argument("--workers", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except cfgio.ConfigError as exc:
        print(f"fransonsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except analysis.FitError as exc:
        print(f"fransonsim: fit failed: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_RUNTIME


def _dispatch(args) -> int:
    if args.command == "fit":
        try:
            scan = FringeScan.from_csv(args.data)
        except (OSError, ValueError) as exc:
            print(f"fransonsim: bad data: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if scan.kind is ScanKind.PATH_LENGTH:
            curve = analysis.visibility_vs_offset(scan, subtract=not args.no_subtract)
            report = {"curve": _curve_summary(curve),
                      "visibility": curve.visibility.tolist(), "offset": curve.offset.tolist()}
        else:
            report = _fit_summary(analysis.fit_scan(scan, subtract=not args.no_subtract))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "fit.json").write_text(json.dumps(_jsonable(report), indent=2))
        _emit(report)
        return EXIT_OK

    config, scan_defaults = _load(args)
    if args.command == "plan":
        report = plan(config, scan_defaults)
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "plan.json").write_text(json.dumps(_jsonable(report), indent=2))
        _emit(report)
        return EXIT_OK

    try:
        config = _with_model(config, getattr(args, "model", None), args.seed)
    except ValueError as exc:
        raise cfgio.ConfigError(str(exc)) from None

    if args.command == "simulate":
        args.scan = args.scan or "phase"
        out = args.out or Path(f"run-{args.scan}-seed{config.seed}")
        staged = _prepare_out(out)
        try:
            manifest = simulate(config, scan_defaults, args.scan, staged, workers=args.workers,
                                extra={"config_path": str(args.config) if args.config else None})
        except BaseException:
            shutil.rmtree(staged, ignore_errors=True)
            raise
        _commit(staged, out)
        _emit({"out": str(out), **manifest["results"]})
        return EXIT_OK

    if args.command == "compare":
        staged = _prepare_out(args.out) if args.out else None
        try:
            report = compare(config, scan_defaults, staged, workers=args.workers)
            if staged is not None:
                (staged / "compare.json").write_text(json.dumps(_jsonable(report), indent=2))
        except BaseException:
            if staged is not None:
                shutil.rmtree(staged, ignore_errors=True)
            raise
        if staged is not None:
            _commit(staged, args.out)
        _emit({k: ({kk: vv for kk, vv in v.items() if kk != "curve"} if isinstance(v, dict) else v)
               for k, v in report.items()})
        return EXIT_OK
    raise AssertionError(args.command)  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
