"""Scenario configuration: `[section]` headers with `key = value` lines.

Every key is declared in SCHEMA with its type and default; unknown sections or
keys are hard errors so typos cannot silently fall back to defaults. Values
can be overridden after parsing with repeatable `section.key=value` strings.
"""
from __future__ import annotations

import configparser
import io
from pathlib import Path
from types import SimpleNamespace

from .mobility import MobilityParams
from .schedule import Role, default_schedules, parse_schedule_spec

MODELS = ("rwp", "map", "nd")
INACTIVE_POLICIES = ("parked_visible", "hidden")
BUFFER_STATS = ("mean", "median")

_ROLE_KEYS = {
    "healthy_local": Role.HealthyLocal,
    "injured_local": Role.InjuredLocal,
    "drt": Role.DRT,
    "usrt": Role.USRT,
    "scientist": Role.Scientist,
    "un_official": Role.UnOfficial,
    "gov_official": Role.GovOfficial,
}

# section -> key -> (type tag, default); types: int, float, bool, str
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "scenario": {
        "map": ("str", ""),
        "pois": ("str", ""),
        "duration_s": ("float", 604_800.0),
        "step_dt_s": ("float", 1.0),
        "nodes": ("int", 500),
        "width_m": ("float", 0.0),
        "height_m": ("float", 0.0),
        "seed": ("int", 1),
        "seeds": ("str", ""),
        "inactive_policy": ("str", "parked_visible"),
        "prune_to_largest_component": ("bool", True),
        "snap_tolerance_m": ("float", 0.5),
    },
    "mobility": {
        "model": ("str", "nd"),
        **{f"count_{name}": ("int", default) for name, default in (
            ("healthy_local", 300),
            ("injured_local", 60),
            ("drt", 60),
            ("usrt", 30),
            ("scientist", 10),
            ("un_official", 20),
            ("gov_official", 20),
        )},
        "speed_min_mps": ("float", 0.5),
        "speed_max_mps": ("float", 1.5),
        "injured_speed_min_mps": ("float", 0.3),
        "injured_speed_max_mps": ("float", 0.8),
        "usrt_search_speed_min_mps": ("float", 0.3),
        "usrt_search_speed_max_mps": ("float", 0.8),
        "pause_min_s": ("float", 0.0),
        "pause_max_s": ("float", 120.0),
    },
    "nd": {
        "neighborhood_radius_m": ("float", 200.0),
        "neighborhood_pause_min_s": ("float", 60.0),
        "neighborhood_pause_max_s": ("float", 600.0),
        "recon_pause_min_s": ("float", 300.0),
        "recon_pause_max_s": ("float", 1800.0),
        "immobile_injured_fraction": ("float", 0.2),
        "volunteer_fraction": ("float", 0.5),
        "jitter_hours": ("float", 2.0),
        "food_visit_s": ("float", 3600.0),
        "rdc_dwell_s": ("float", 1800.0),
        "osocc_briefing_s": ("float", 3600.0),
        "basecamp_setup_s": ("float", 1800.0),
        "un_arrival_hour": ("float", 4.0),
        "prepositioned_fraction": ("float", 0.2),
        "arrival_hour_min": ("float", 7.0),
        "arrival_hour_max": ("float", 17.0),
        "usrt_departure_hour_min": ("float", 8.0),
        "usrt_departure_hour_max": ("float", 20.0),
        **{f"schedule_day0_{name}": ("str", "") for name in _ROLE_KEYS},
        **{f"schedule_week_{name}": ("str", "") for name in _ROLE_KEYS},
    },
    "traffic": {
        "enabled": ("bool", True),
        "interval_min_s": ("float", 8.0),
        "interval_max_s": ("float", 12.0),
        "size_min_bytes": ("int", 50_000),
        "size_max_bytes": ("int", 100_000),
        "ttl_s": ("float", 21_600.0),
    },
    "radio": {
        "range_m": ("float", 10.0),
        "phy_rate_bps": ("float", 2_000_000.0),
    },
    "routing": {
        "protocol": ("str", "epidemic"),
        "buffer_bytes": ("int", 20_000_000),
        "drop_policy": ("str", "oldest_received"),
    },
    "reports": {
        "density": ("bool", True),
        "density_interval_s": ("float", 60.0),
        "density_cell_m": ("float", 10.0),
        "encounters": ("bool", True),
        "delay_cdf": ("bool", True),
        "cdf_bucket_s": ("float", 60.0),
        "buffer": ("bool", True),
        "buffer_interval_s": ("float", 300.0),
        "buffer_stat": ("str", "mean"),
        "delivery_matrix": ("bool", True),
    },
}


class ConfigError(ValueError):
    pass


def _coerce(section: str, key: str, raw: str):
    kind, _ = SCHEMA[section][key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            lowered = raw.lower()
            if lowered in ("true", "yes", "on", "1"):
                return True
            if lowered in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}") from None


class ScenarioConfig:
    """Fully resolved configuration for one scenario."""

    def __init__(self, values: dict[str, dict[str, object]], base_dir: Path | None = None):
        self.base_dir = base_dir or Path.cwd()
        self._values = values
        for section, keys in values.items():
            setattr(self, section, SimpleNamespace(**keys))
        self.validate()

    # -- constructors ------------------------------------------------------

    @classmethod
    def defaults(cls, **overrides) -> "ScenarioConfig":
        values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
        cfg = cls.__new__(cls)
        cfg.base_dir = Path.cwd()
        cfg._values = values
        for section, keys in values.items():
            setattr(cfg, section, SimpleNamespace(**keys))
        for dotted, value in overrides.items():
            cfg.set_override(dotted.replace("__", "."), str(value))
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str, base_dir: Path | None = None) -> "ScenarioConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as err:
            raise ConfigError(f"config syntax error: {err}") from None
        values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                values[section][key] = _coerce(section, key, raw)
        return cls(values, base_dir)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config file {path}: {err}") from None
        return cls.from_text(text, base_dir=path.parent)

    # -- overrides -----------------------------------------------------------

    def set_override(self, dotted_key: str, raw_value: str) -> None:
        if "." not in dotted_key:
            raise ConfigError(f"override {dotted_key!r} must look like section.key")
        section, key = dotted_key.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"override references unknown key [{section}] {key}")
        value = _coerce(section, key, raw_value)
        self._values[section][key] = value
        setattr(getattr(self, section), key, value)

    def apply_overrides(self, overrides: list[str]) -> None:
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} must look like section.key=value")
            dotted, raw = item.split("=", 1)
            self.set_override(dotted.strip(), raw)
        self.validate()

    # -- validation ------------------------------------------------------------

    def validate(self) -> None:
        s, m = self.scenario, self.mobility
        if m.model not in MODELS:
            raise ConfigError(f"mobility.model must be one of {MODELS}, got {m.model!r}")
        if s.step_dt_s <= 0:
            raise ConfigError("scenario.step_dt_s must be positive")
        if s.duration_s < 0:
            raise ConfigError("scenario.duration_s must be >= 0")
        steps = s.duration_s / s.step_dt_s
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError("scenario.duration_s must be a multiple of step_dt_s")
        counts = self.role_counts()
        if any(c < 0 for c in counts.values()):
            raise ConfigError("role counts must be >= 0")
        if sum(counts.values()) != s.nodes:
            raise ConfigError(
                f"role counts sum to {sum(counts.values())} but scenario.nodes = {s.nodes}"
            )
        if s.inactive_policy not in INACTIVE_POLICIES:
            raise ConfigError(f"scenario.inactive_policy must be one of {INACTIVE_POLICIES}")
        if self.routing.protocol != "epidemic":
            raise ConfigError("routing.protocol: only 'epidemic' is implemented")
        if self.routing.drop_policy not in ("oldest_received", "newest_received", "random"):
            raise ConfigError(f"unknown routing.drop_policy {self.routing.drop_policy!r}")
        if self.reports.buffer_stat not in BUFFER_STATS:
            raise ConfigError(f"reports.buffer_stat must be one of {BUFFER_STATS}")
        for lo, hi, what in (
            (m.speed_min_mps, m.speed_max_mps, "mobility speed"),
            (m.injured_speed_min_mps, m.injured_speed_max_mps, "injured speed"),
            (m.pause_min_s, m.pause_max_s, "pause"),
            (self.traffic.interval_min_s, self.traffic.interval_max_s, "traffic interval"),
            (self.traffic.size_min_bytes, self.traffic.size_max_bytes, "message size"),
        ):
            if lo < 0 or hi < lo:
                raise ConfigError(f"{what} range [{lo}, {hi}] is invalid")
        if self.radio.range_m <= 0 or self.radio.phy_rate_bps <= 0:
            raise ConfigError("radio.range_m and radio.phy_rate_bps must be positive")
        if self.traffic.ttl_s <= 0 or self.routing.buffer_bytes <= 0:
            raise ConfigError("traffic.ttl_s and routing.buffer_bytes must be positive")
        self.nd_schedules()  # raises on malformed schedule specs

    def require_inputs(self) -> None:
        """Check that the model's map/POI inputs are configured (run-time check)."""
        s, m = self.scenario, self.mobility
        if m.model in ("map", "nd") and not s.map:
            raise ConfigError(f"mobility.model = {m.model} requires scenario.map")
        if m.model == "nd" and not s.pois:
            raise ConfigError("mobility.model = nd requires scenario.pois")
        if m.model == "rwp" and not s.map and (s.width_m <= 0 or s.height_m <= 0):
            raise ConfigError("rwp without a map needs scenario.width_m and height_m")

    # -- derived views ------------------------------------------------------------

    def map_path(self) -> Path | None:
        return (self.base_dir / self.scenario.map) if self.scenario.map else None

    def pois_path(self) -> Path | None:
        return (self.base_dir / self.scenario.pois) if self.scenario.pois else None

    def role_counts(self) -> dict[Role, int]:
        return {
            role: getattr(self.mobility, f"count_{name}") for name, role in _ROLE_KEYS.items()
        }

    def seed_list(self) -> list[int]:
        raw = self.scenario.seeds.strip()
        if not raw:
            return [self.scenario.seed]
        try:
            return [int(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"scenario.seeds: cannot parse {raw!r}") from None

    def mobility_params(self) -> MobilityParams:
        m, nd = self.mobility, self.nd
        return MobilityParams(
            speed_min=m.speed_min_mps,
            speed_max=m.speed_max_mps,
            injured_speed_min=m.injured_speed_min_mps,
            injured_speed_max=m.injured_speed_max_mps,
            usrt_search_speed_min=m.usrt_search_speed_min_mps,
            usrt_search_speed_max=m.usrt_search_speed_max_mps,
            pause_min_s=m.pause_min_s,
            pause_max_s=m.pause_max_s,
            neighborhood_radius_m=nd.neighborhood_radius_m,
            neighborhood_pause_min_s=nd.neighborhood_pause_min_s,
            neighborhood_pause_max_s=nd.neighborhood_pause_max_s,
            recon_pause_min_s=nd.recon_pause_min_s,
            recon_pause_max_s=nd.recon_pause_max_s,
            immobile_injured_fraction=nd.immobile_injured_fraction,
            volunteer_fraction=nd.volunteer_fraction,
            jitter_hours=nd.jitter_hours,
            food_visit_s=nd.food_visit_s,
            rdc_dwell_s=nd.rdc_dwell_s,
            osocc_briefing_s=nd.osocc_briefing_s,
            basecamp_setup_s=nd.basecamp_setup_s,
            un_arrival_hour=nd.un_arrival_hour,
            prepositioned_fraction=nd.prepositioned_fraction,
            arrival_hour_min=nd.arrival_hour_min,
            arrival_hour_max=nd.arrival_hour_max,
            usrt_departure_hour_min=nd.usrt_departure_hour_min,
            usrt_departure_hour_max=nd.usrt_departure_hour_max,
        )

    def nd_schedules(self):
        schedules = default_schedules()
        for name, role in _ROLE_KEYS.items():
            day0_spec = getattr(self.nd, f"schedule_day0_{name}")
            week_spec = getattr(self.nd, f"schedule_week_{name}")
            try:
                if day0_spec:
                    schedules.day0[role] = parse_schedule_spec(day0_spec)
                if week_spec:
                    schedules.week[role] = parse_schedule_spec(week_spec)
            except ValueError as err:
                raise ConfigError(f"[nd] schedule for {name}: {err}") from None
        return schedules

    # -- rendering -------------------------------------------------------------------

    def resolved_text(self) -> str:
        out = io.StringIO()
        for section in SCHEMA:
            out.write(f"[{section}]\n")
            for key in SCHEMA[section]:
                out.write(f"{key} = {self._values[section][key]}\n")
            out.write("\n")
        return out.getvalue()
