from __future__ import annotations
import json
import math
import re
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Any, Dict, Mapping

from errors import ConfigError
from torus_curves import SlopeCurve

MAX_SLOPE_BOUND = 8
_CURVE_TEXT = re.compile(r"^\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*(?:\+\s*(-?\d+(?:/\d+)?)\s*)?$")


def load_config(path: str) -> Dict[str, Any]:
    """Load configuration from a JSON file.
    An empty file gives an empty dict; a missing or malformed one raises ConfigError.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read().strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not text:
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path!r} must hold a JSON object")
    return data


def parse_curve(value: Any, name: str = "curve") -> SlopeCurve:
    """Accepts {"p": 1, "q": 0, "offset": "13/97"}, [p, q], [p, q, offset] or "(p,q)+offset"."""
    try:
        if isinstance(value, SlopeCurve):
            return value
        if isinstance(value, str):
            m = _CURVE_TEXT.match(value)
            if m:
                return SlopeCurve(int(m.group(1)), int(m.group(2)), Fraction(m.group(3) or 0))
        if isinstance(value, Mapping):
            return SlopeCurve(int(value["p"]), int(value["q"]), Fraction(str(value.get("offset", 0))))
        if isinstance(value, (list, tuple)) and len(value) in (2, 3):
            offset = Fraction(str(value[2])) if len(value) == 3 else Fraction(0)
            return SlopeCurve(int(value[0]), int(value[1]), offset)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"curve {name!r} is malformed: {exc}") from exc
    raise ConfigError(f"curve {name!r} must be an object {{p, q, offset}}, a list [p, q, offset] or \"(p,q)+offset\"")


@dataclass(frozen=True)
class ScenarioConfig:
    L: SlopeCurve = SlopeCurve(1, 0, Fraction(0))
    L0: SlopeCurve = SlopeCurve(0, 1, Fraction(13, 97))
    L1: SlopeCurve = SlopeCurve(1, 1, Fraction(41, 97))
    epsilon: float = 0.25
    delta: float = 0.05
    twist_r: float = 0.05
    twist_lambda: float = 1.0
    seed: int = 0
    max_slope: int = 3
    dimension: int = 2
    differential_density: float = 0.5
    perturbation_density: float = 0.3
    twist_convention: int = 1
    local_samples: int = 200
    jobs: int = 1
    curve_colors: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            problems.append(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.delta < 0.5:
            problems.append(f"delta must lie in (0; 1/2), got {self.delta}")
        if not 0 < self.twist_r < 0.5:
            problems.append(f"twist_r must lie in (0; 1/2), got {self.twist_r}")
        if not self.twist_lambda > 0:
            problems.append(f"twist_lambda must be > 0, got {self.twist_lambda}")
        if not 1 <= self.max_slope <= MAX_SLOPE_BOUND:
            problems.append(f"max_slope must lie in [1; {MAX_SLOPE_BOUND}], got {self.max_slope}")
        if self.dimension < 1:
            problems.append(f"dimension must be >= 1, got {self.dimension}")
        for name in ("differential_density", "perturbation_density"):
            if not 0 <= getattr(self, name) <= 1:
                problems.append(f"{name} must lie in [0; 1]")
        if self.twist_convention not in (1, -1):
            problems.append("twist_convention must be +1 or -1")
        if self.local_samples < 1 or self.jobs < 1:
            problems.append("local_samples and jobs must be positive")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs: Dict[str, Any] = {}
        for key, value in data.items():
            if value is None:
                continue
            if key in ("L", "L0", "L1"):
                kwargs[key] = parse_curve(value, key)
            elif key == "curve_colors":
                if not isinstance(value, Mapping):
                    raise ConfigError("curve_colors must be an object")
                kwargs[key] = dict(value)
            elif key in ("seed", "max_slope", "dimension", "twist_convention", "local_samples", "jobs"):
                kwargs[key] = _as(int, key, value)
            else:
                kwargs[key] = _as(float, key, value)
        return cls(**kwargs)

    def merged(self, **overrides: Any) -> "ScenarioConfig":
        """Copy with every non-None override applied (CLI flags win over the file)."""
        values = {k: v for k, v in overrides.items() if v is not None}
        try:
            return replace(self, **values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_mapping(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, SlopeCurve):
                value = {"p": value.p, "q": value.q, "offset": str(value.offset)}
            elif f.name == "curve_colors":
                value = dict(value)
            out[f.name] = value
        return out


def _as(kind, key: str, value: Any):
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        result = kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if kind is int and result != value and not (isinstance(value, str) and value.strip().lstrip("+-").isdigit()):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return result


def load_scenario_config(path: str | None) -> ScenarioConfig:
    return ScenarioConfig.from_mapping(load_config(path)) if path else ScenarioConfig()
