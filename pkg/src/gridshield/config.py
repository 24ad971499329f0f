"""Scenario files: strict TOML schema, defaults, and the run manifest.

The schema is strict on purpose: an unknown or out-of-range key fails
loudly, so calibration mistakes surface at load time rather than as a
quietly wrong sweep.
"""
from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .costs import BotnetQuote, CostParams
from .dynamics import ModelParams
from .engine import AttackScenario

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Base class; category drives the CLI exit code."""

    category = "config"


class ScenarioParseError(ScenarioError):
    pass


class UnknownKeyError(ScenarioError):
    def __init__(self, key: str):
        super().__init__(f"unknown key {key!r}")
        self.key = key


class ConstraintViolation(ScenarioError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


_NUMBER = (int, float)

# section -> key -> (type, constraint predicate or None, default)
_SCHEMA = {
    "model": {
        "alpha": (_NUMBER, lambda v: v > 0, 1.0),
        "beta": (_NUMBER, lambda v: v > 0, 1.0),
        "gamma": (_NUMBER, lambda v: v > 0, 1.0),
        "delta": (_NUMBER, lambda v: v > 0, 1.0),
    },
    "cost": {
        "mrt": (_NUMBER, lambda v: v > 0, 3600.0),
        "theta": (_NUMBER, lambda v: v >= 1, 3.5),
        "direct_unit_cost": (_NUMBER, lambda v: v >= 0, 40.0),
    },
    "quote": {
        "population": (int, lambda v: v > 0, 400_000),
        "rental_price": (_NUMBER, lambda v: v > 0, 20_000.0),
        "rental_period": (_NUMBER, lambda v: v > 0, 1_209_600.0),
        "setup_per_bot": (_NUMBER, lambda v: v >= 0, 1.0),
    },
    "scenario": {
        "bot_count": (int, lambda v: v >= 0, 400),
        "bots_per_lan": (int, lambda v: v > 0, 16),
        "benign_tit": (_NUMBER, lambda v: v > 0, 10.0),
        "malicious_tit": (_NUMBER, lambda v: v > 0, 0.3),
        "attack_period": (_NUMBER, lambda v: v > 0, 300.0),
        "duration": (_NUMBER, lambda v: v > 0, 2400.0),
        "link_capacity": (_NUMBER, lambda v: v > 0, 10_000_000.0),
        "request_timeout": (_NUMBER, lambda v: v > 0, 4.0),
        "defender_count": (int, lambda v: v >= 1, 1),
        "seed": (int, None, 42),
        "malicious_packet_bits": (_NUMBER, lambda v: v > 0, 11_250.0),
        "benign_request_bits": (_NUMBER, lambda v: v > 0, 220_000.0),
        "detection_mean": (_NUMBER, lambda v: v > 0, 180.0),
        "replace_delay": (_NUMBER, lambda v: v >= 0, 1.0),
        "attacker_replaces": (bool, None, True),
        "metric_interval": (_NUMBER, lambda v: v > 0, 1.0),
        "saturation_onset": (_NUMBER, lambda v: 0 < v <= 1, 0.9),
        "saturation_penalty": (_NUMBER, lambda v: 0 <= v <= 1, 0.7),
        "peer_join_delay": (_NUMBER, lambda v: v >= 0, 0.0),
    },
    "topology": {
        "filter_capacity": (_NUMBER, lambda v: v >= 0, 1_775_000.0),
        "coordinator_units": (_NUMBER, lambda v: v >= 0, 1_500_000.0),
        "stale_timeout": (_NUMBER, lambda v: v > 0, 600.0),
    },
    "output": {
        "format": (str, lambda v: v in ("csv", "json"), "csv"),
        "plot": (bool, None, True),
    },
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Fully resolved scenario with every default applied."""

    schema_version: int
    model: ModelParams
    cost: CostParams
    quote: BotnetQuote
    scenario: AttackScenario
    filter_capacity: float
    coordinator_units: float
    stale_timeout: float
    output_format: str
    plot: bool

    def serialize(self) -> dict:
        """Exact dict form of the resolved configuration."""
        out: dict = {"schema_version": self.schema_version}
        sources = {
            "model": self.model,
            "cost": self.cost,
            "quote": self.quote,
            "scenario": self.scenario,
        }
        for section, obj in sources.items():
            out[section] = {k: getattr(obj, k) for k in _SCHEMA[section]}
        out["topology"] = {
            "filter_capacity": self.filter_capacity,
            "coordinator_units": self.coordinator_units,
            "stale_timeout": self.stale_timeout,
        }
        out["output"] = {"format": self.output_format, "plot": self.plot}
        return out


def default_scenario_path() -> Path:
    return Path(resources.files("gridshield").joinpath("data/default.toml"))


def _validate_section(name: str, raw: dict) -> dict:
    spec = _SCHEMA[name]
    resolved = {}
    for key, value in raw.items():
        if key not in spec:
            raise UnknownKeyError(f"{name}.{key}")
        expected, constraint, _ = spec[key]
        if expected is _NUMBER and isinstance(value, bool):
            raise ConstraintViolation(f"{name}.{key}", "expected a number")
        if not isinstance(value, expected):
            raise ConstraintViolation(
                f"{name}.{key}", f"expected {getattr(expected, '__name__', 'number')}"
            )
        if constraint is not None and not constraint(value):
            raise ConstraintViolation(f"{name}.{key}", f"value {value!r} out of range")
        resolved[key] = value
    for key, (_, _, default) in spec.items():
        resolved.setdefault(key, default)
    return resolved


def load_scenario(path) -> ResolvedConfig:
    """Load and validate a scenario file, applying documented defaults."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc

    version = raw.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConstraintViolation(
            "schema_version", f"expected {SCHEMA_VERSION}, got {version}"
        )
    for section in raw:
        if section not in _SCHEMA:
            raise UnknownKeyError(section)

    sections = {
        name: _validate_section(name, raw.get(name, {})) for name in _SCHEMA
    }
    return ResolvedConfig(
        schema_version=version,
        model=ModelParams(**sections["model"]),
        cost=CostParams(**sections["cost"]),
        quote=BotnetQuote(**sections["quote"]),
        scenario=AttackScenario(**sections["scenario"]),
        filter_capacity=sections["topology"]["filter_capacity"],
        coordinator_units=sections["topology"]["coordinator_units"],
        stale_timeout=sections["topology"]["stale_timeout"],
        output_format=sections["output"]["format"],
        plot=sections["output"]["plot"],
    )


@dataclass
class RunManifest:
    """Reproducibility chain: every artifact points back at one of these."""

    config: dict
    seeds: list[int]
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "seeds": self.seeds,
            "outputs": sorted(self.outputs),
            "config": self.config,
        }
