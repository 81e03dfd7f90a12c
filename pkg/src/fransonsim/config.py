"""Reading and writing experiment configuration files (YAML)."""

from __future__ import annotations

import dataclasses
import enum
import math
from importlib import resources
from pathlib import Path

import yaml

from .models import ModelKind
from .montecarlo import DetectorModel, ExperimentConfig, ScanSpec
from .optics import AomParams, FiberLink, Interferometer, SourceParams

DEFAULT_CONFIG = "default-1313nm.config"


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ScanDefaults:
    """Scan geometry kept alongside the experiment in a config file."""

    length_step: float = 0.12e-3
    half_range: float = 3e-3
    phase_steps: int = 12

    def __post_init__(self):
        if not self.length_step > 0 or not self.half_range > 0 or self.phase_steps < 4:
            raise ValueError("scan needs length_step > 0, half_range > 0, phase_steps >= 4")

    def spec(self, kind: str) -> ScanSpec:
        if kind == "phase":
            return ScanSpec.phase(self.phase_steps)
        if kind == "length":
            return ScanSpec.path_length(self.length_step, self.half_range, self.phase_steps)
        raise ConfigError(f"unknown scan kind {kind!r}")


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (tuple, list)):
        return [_plain(x) for x in obj]
    if isinstance(obj, frozenset):
        return sorted(_plain(x) for x in obj)
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    return obj


def config_to_dict(config: ExperimentConfig, scan: ScanDefaults | None = None) -> dict:
    d = _plain(config)
    d["scan"] = _plain(scan or ScanDefaults())
    return d


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {unknown}")
    kwargs = {}
    for key, val in data.items():
        kwargs[key] = _coerce(val, str(names[key].type), f"{where}.{key}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _coerce(val, annotation, where):
    # PyYAML reads exponents without a dot ('1e-9') as strings
    if val is None or isinstance(val, bool) or dataclasses.is_dataclass(val):
        return val
    if annotation.startswith("float"):
        try:
            val = float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected a number, got {val!r}") from None
        if not math.isfinite(val):
            raise ConfigError(f"{where}: must be finite")
    elif annotation == "int":
        try:
            f = float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected an integer, got {val!r}") from None
        if not f.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {val!r}")
        val = int(f) if not isinstance(val, int) else val
    return val


def _pair(data, where, fn):
    if not isinstance(data, list) or len(data) != 2:
        raise ConfigError(f"{where}: expected a list of two entries")
    return tuple(fn(x, f"{where}[{i}]") for i, x in enumerate(data))


def _interferometer(data, where):
    data = dict(data) if isinstance(data, dict) else data
    if isinstance(data, dict) and "aom" in data:
        data["aom"] = _build(AomParams, data["aom"], f"{where}.aom")
    return _build(Interferometer, data, where)


def config_from_dict(data: dict) -> tuple[ExperimentConfig, ScanDefaults]:
    """Validate and build an experiment. Errors name the offending field."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    data = dict(data)
    scan = _build(ScanDefaults, data.pop("scan", {}) or {}, "scan")
    kw = {}
    if "source" in data:
        kw["source"] = _build(SourceParams, data.pop("source"), "source")
    if "fibers" in data:
        kw["fibers"] = _pair(data.pop("fibers"), "fibers", lambda x, w: _build(FiberLink, x, w))
    if "analyzers" in data:
        kw["analyzers"] = _pair(data.pop("analyzers"), "analyzers", _interferometer)
    if "detectors" in data:
        kw["detectors"] = _pair(
            data.pop("detectors"), "detectors", lambda x, w: _build(DetectorModel, x, w)
        )
    if "model" in data:
        m = data.pop("model")
        if not isinstance(m, dict):
            raise ConfigError("model: expected a mapping with 'name' and 'suppressed'")
        try:
            kw["model"] = ModelKind(m.get("name", "quantum"), frozenset(m.get("suppressed") or ()))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}") from None
    kw.update(data)
    return _build(ExperimentConfig, kw, "config"), scan


def dumps(config: ExperimentConfig, scan: ScanDefaults | None = None) -> str:
    return yaml.safe_dump(config_to_dict(config, scan), sort_keys=False)


def loads(text: str) -> tuple[ExperimentConfig, ScanDefaults]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: not valid YAML ({exc})") from None
    return config_from_dict(data or {})


def load(path) -> tuple[ExperimentConfig, ScanDefaults]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text)


def default_config_path() -> Path:
    return Path(str(resources.files("fransonsim").joinpath("data", DEFAULT_CONFIG)))


def default_config() -> tuple[ExperimentConfig, ScanDefaults]:
    """The shipped 1313 nm / 55 m / 100 MHz defaults."""
    return load(default_config_path())
