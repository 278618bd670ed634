"""Scenario configuration: JSON schema, loading and validation.

Unknown keys are rejected anywhere in the document.  Keys ending in ``_db``
hold decibel values (10*log10 of a power ratio); every other numeric key is
linear in SI units.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import jsonschema

from .detection import DetectionRequirements
from .errors import ConfigError, DomainError
from .geometry import GeometryInputs
from .montecarlo import McConfig
from .radar import SarSystem, ShipModel

_POS = {"type": "number", "exclusiveMinimum": 0}
_PROB = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}


def _obj(props: Dict[str, Any], required=()) -> Dict[str, Any]:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SAR_SCHEMA = _obj(
    {
        "center_freq_hz": _POS,
        "peak_power_w": _POS,
        "duty_factor": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "prf_hz": _POS,
        "bandwidth_hz": _POS,
        "pulse_widening": {"type": "number", "minimum": 1},
        "antenna_gain_dbi": {"type": "number"},
        "azimuth_res_m": _POS,
        "noise_figure_db": {"type": "number"},
        "system_loss_db": {"type": "number"},
        "system_temp_k": _POS,
        "boltzmann": _POS,
        "light_speed": _POS,
    },
    required=(
        "center_freq_hz", "peak_power_w", "duty_factor", "prf_hz", "bandwidth_hz",
        "antenna_gain_dbi", "azimuth_res_m", "noise_figure_db", "system_loss_db",
    ),
)

SCHEMA: Dict[str, Any] = _obj(
    {
        "geometry": _obj(
            {
                "altitude_m": _POS,
                "look_angle_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
                "swath_m": _POS,
                "earth_radius_m": _POS,
                "mu_m3s2": _POS,
                # tabulated values printed next to the derived ones by `sarfeas geometry`
                "reference": {"type": "object", "additionalProperties": {"type": "number"}},
            },
            required=("altitude_m", "look_angle_deg", "swath_m"),
        ),
        "sar": {"type": "object", "minProperties": 1, "additionalProperties": SAR_SCHEMA},
        "ship": _obj(
            {"length_m": _POS, "width_m": _POS, "beta": _POS, "tdw_side_m": _POS},
            required=("length_m", "width_m", "beta", "tdw_side_m"),
        ),
        "detection": {
            **_obj(
                {"p_d_target": _PROB, "p_fa_pixel": _PROB, "p_fa_overall": _PROB, "aoi_area_m2": _POS},
                required=("p_d_target",),
            ),
            "oneOf": [
                {"required": ["p_fa_pixel"], "not": {"anyOf": [{"required": ["p_fa_overall"]}, {"required": ["aoi_area_m2"]}]}},
                {"required": ["p_fa_overall", "aoi_area_m2"], "not": {"required": ["p_fa_pixel"]}},
            ],
        },
        "sweep": _obj(
            {"delta_r_start_m": _POS, "delta_r_step_m": _POS, "delta_r_stop_m": _POS},
            required=("delta_r_start_m", "delta_r_step_m", "delta_r_stop_m"),
        ),
        "options": _obj(
            {
                "window_overlap_model": {"enum": ["min", "clipped"]},
                "sigma0_bracket": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "v_orbital_override": _POS,
                "target_slant_range_m": _POS,
                "mc": _obj(
                    {
                        "n_trials": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                        "chunk_size": {"type": "integer", "minimum": 1},
                    }
                ),
            }
        ),
    },
    required=("geometry", "sar", "ship", "detection"),
)


@dataclass(frozen=True)
class SweepSpec:
    start_m: float
    step_m: float
    stop_m: float

    def values(self) -> Tuple[float, ...]:
        """Inclusive grid; values are start + i*step rounded to 12 digits."""
        n = int(round((self.stop_m - self.start_m) / self.step_m))
        if self.start_m + n * self.step_m > self.stop_m * (1 + 1e-9):
            n -= 1
        return tuple(round(self.start_m + i * self.step_m, 12) for i in range(max(n, 0) + 1))


@dataclass(frozen=True)
class Options:
    window_overlap_model: str = "min"
    sigma0_bracket: Tuple[float, float] = (0.01, 100.0)
    v_orbital_override: Optional[float] = None
    target_slant_range_m: Optional[float] = None
    mc: McConfig = field(default_factory=McConfig)


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: GeometryInputs
    sar: Dict[str, SarSystem]
    ship: ShipModel
    detection: DetectionRequirements
    sweep: SweepSpec = SweepSpec(0.1, 0.0125, 0.5)
    options: Options = field(default_factory=Options)
    reference_geometry: Dict[str, float] = field(default_factory=dict)
    digest: str = ""

    def band(self, name: Optional[str] = None) -> Tuple[str, SarSystem]:
        """Resolve a band name; ``None`` picks the first band in the file."""
        if name is None:
            name = next(iter(self.sar))
        try:
            return name, self.sar[name]
        except KeyError:
            raise ConfigError(f"unknown band {name!r}; config defines {sorted(self.sar)}") from None


def config_digest(raw: Dict[str, Any]) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def parse_config(raw: Dict[str, Any]) -> ScenarioConfig:
    """Validate ``raw`` against the schema and build a ScenarioConfig."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema error at {where}: {exc.message}") from None

    try:
        geo = dict(raw["geometry"])
        reference = geo.pop("reference", {})
        opts = dict(raw.get("options", {}))
        mc = McConfig(**opts.pop("mc", {}))
        if "sigma0_bracket" in opts:
            lo, hi = opts["sigma0_bracket"]
            if not lo < hi:
                raise ConfigError("sigma0_bracket must be increasing")
            opts["sigma0_bracket"] = (float(lo), float(hi))
        sweep = raw.get("sweep")
        sweep_spec = (
            SweepSpec(sweep["delta_r_start_m"], sweep["delta_r_step_m"], sweep["delta_r_stop_m"])
            if sweep
            else SweepSpec(0.1, 0.0125, 0.5)
        )
        if sweep_spec.stop_m < sweep_spec.start_m:
            raise ConfigError("sweep stop must not precede start")
        return ScenarioConfig(
            geometry=GeometryInputs(**geo),
            sar={name: SarSystem(**spec) for name, spec in raw["sar"].items()},
            ship=ShipModel(**raw["ship"]),
            detection=DetectionRequirements(**raw["detection"]),
            sweep=sweep_spec,
            options=Options(mc=mc, **opts),
            reference_geometry=dict(reference),
            digest=config_digest(raw),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    return parse_config(raw)


def bundled_config_path() -> Path:
    """Path of the packaged VLEO X/Ku-band fixture."""
    return Path(str(resources.files("sarfeas") / "data" / "vleo_x_ku.json"))
