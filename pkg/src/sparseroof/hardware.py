"""Device capability model: peak throughputs, bandwidth, and roofline geometry.

A profile holds one peak FLOP/s figure per engine class plus a single DRAM
bandwidth. Perfect caching is assumed, so every byte is charged once against
that one bandwidth; cache-hierarchy effects are deliberately out of scope.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError


class EngineClass(enum.Enum):
    """Compute unit a kernel runs on, each with its own peak throughput."""

    SCALAR = "scalar"
    MATRIX = "matrix"
    SPARSE_MATRIX = "sparse_matrix"


def parse_engine(token: str) -> EngineClass:
    try:
        return EngineClass(token)
    except ValueError:
        valid = ", ".join(e.value for e in EngineClass)
        raise ConfigError(f"unknown engine class '{token}' (expected one of: {valid})") from None


@dataclass(frozen=True)
class HardwareProfile:
    """Peak FLOP/s per engine class and DRAM bandwidth (bytes/s) for one device."""

    name: str
    peak_flops: Mapping[EngineClass, float]
    peak_mem_bw: float

    def __post_init__(self):
        object.__setattr__(self, "peak_flops", MappingProxyType(dict(self.peak_flops)))
        if not self.peak_flops:
            raise ConfigError(f"profile '{self.name}': no peak_flops entries")
        for engine, peak in self.peak_flops.items():
            if peak <= 0:
                raise ConfigError(
                    f"profile '{self.name}': peak_flops.{engine.value} must be > 0, got {peak}"
                )
        if self.peak_mem_bw <= 0:
            raise ConfigError(
                f"profile '{self.name}': peak_mem_bw_bytes_per_s must be > 0, got {self.peak_mem_bw}"
            )
        scalar = self.peak_flops.get(EngineClass.SCALAR)
        matrix = self.peak_flops.get(EngineClass.MATRIX)
        # Matrix units are never slower than scalar cores at their own workload.
        if scalar is not None and matrix is not None and matrix < scalar:
            raise ConfigError(
                f"profile '{self.name}': peak_flops.matrix ({matrix}) < peak_flops.scalar ({scalar})"
            )

    def peak_for(self, engine: EngineClass) -> float:
        """Peak FLOP/s for an engine.

        A missing sparse-matrix peak falls back to the matrix-unit peak: the
        hypothetical-hardware scenarios this tool serves assume sparse units
        run at plain tensor-core throughput unless stated otherwise.
        """
        peak = self.peak_flops.get(engine)
        if peak is None and engine is EngineClass.SPARSE_MATRIX:
            peak = self.peak_flops.get(EngineClass.MATRIX)
        if peak is None:
            raise ConfigError(f"profile '{self.name}' has no peak for engine '{engine.value}'")
        return peak

    def has_engine(self, engine: EngineClass) -> bool:
        try:
            self.peak_for(engine)
        except ConfigError:
            return False
        return True


def knee_ai(profile: HardwareProfile, engine: EngineClass) -> float:
    """Arithmetic intensity (FLOP/byte) where the roof flattens for an engine."""
    return profile.peak_for(engine) / profile.peak_mem_bw


def roof_throughput(profile: HardwareProfile, engine: EngineClass, ai: float) -> float:
    """Attainable FLOP/s at arithmetic intensity ``ai``: min(peak, ai * bandwidth)."""
    if ai < 0:
        raise ConfigError(f"arithmetic intensity must be >= 0, got {ai}")
    return min(profile.peak_for(engine), ai * profile.peak_mem_bw)


_PROFILE_KEYS = {"name", "peak_flops", "peak_mem_bw_bytes_per_s"}
_ENGINE_KEYS = {e.value for e in EngineClass}


def load_profile(path: str | Path) -> HardwareProfile:
    """Load and validate a hardware profile from a TOML file.

    Expected fields: ``name``, ``peak_flops.scalar`` / ``peak_flops.matrix`` /
    ``peak_flops.sparse_matrix`` (each optional, at least one required), and
    ``peak_mem_bw_bytes_per_s``.
    """
    p = Path(path)
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read profile '{p}': {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"profile '{p}': parse error: {exc}") from exc

    unknown = set(raw) - _PROFILE_KEYS
    if unknown:
        raise ConfigError(f"profile '{p}': unknown field(s): {', '.join(sorted(unknown))}")
    for key in ("name", "peak_flops", "peak_mem_bw_bytes_per_s"):
        if key not in raw:
            raise ConfigError(f"profile '{p}': missing required field '{key}'")

    flops_raw = raw["peak_flops"]
    if not isinstance(flops_raw, dict):
        raise ConfigError(f"profile '{p}': peak_flops must be a table of engine -> FLOP/s")
    unknown = set(flops_raw) - _ENGINE_KEYS
    if unknown:
        raise ConfigError(f"profile '{p}': unknown peak_flops engine(s): {', '.join(sorted(unknown))}")

    peaks = {}
    for token, value in flops_raw.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"profile '{p}': peak_flops.{token} must be a number")
        peaks[EngineClass(token)] = float(value)

    bw = raw["peak_mem_bw_bytes_per_s"]
    if not isinstance(bw, (int, float)) or isinstance(bw, bool):
        raise ConfigError(f"profile '{p}': peak_mem_bw_bytes_per_s must be a number")

    return HardwareProfile(name=str(raw["name"]), peak_flops=peaks, peak_mem_bw=float(bw))


def builtin_profile_path(name: str) -> Path:
    """Path of a profile shipped with the package (e.g. ``a100``)."""
    root = Path(__file__).parent / "data" / "profiles"
    candidate = root / f"{name}.toml"
    if not candidate.is_file():
        known = ", ".join(sorted(f.stem for f in root.glob("*.toml")))
        raise ConfigError(f"no builtin profile '{name}' (available: {known})")
    return candidate


def resolve_profile(spec: str | Path) -> HardwareProfile:
    """Load a profile from a path, or from the builtin set when ``spec`` is a bare name."""
    p = Path(spec)
    if p.is_file():
        return load_profile(p)
    if p.suffix == "" and "/" not in str(spec):
        return load_profile(builtin_profile_path(str(spec)))
    raise ConfigError(f"hardware profile not found: '{spec}'")
