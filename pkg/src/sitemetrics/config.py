"""Run configuration: every tunable threshold in one serializable place.

The engine never hardcodes a tolerance outside this module. A config is
serialized verbatim into output metadata so any result file can be traced
back to the exact parameter set that produced it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Raised for unknown keys or invalid values in a config file."""


@dataclass
class IndicatorConfig:
    # --- input handling -----------------------------------------------------
    # "wgs84": features carry lon/lat and are projected on ingest.
    # "projected": coordinates are already planar metres; no transform.
    crs: str = "wgs84"
    seed: int = 0
    # layer name (buildings/plots/pois/roads/stops) -> GeoJSON file path
    inputs: dict[str, str] = field(default_factory=dict)

    # --- building form thresholds (aspect ratio = MBR length/width) ---------
    form_point_max_ar: float = 1.5
    form_slab_max_ar: float = 8.0

    # --- layout pattern cascade ----------------------------------------------
    layout_min_area: float = 50.0
    layout_transport_exclusions: list[str] = field(
        default_factory=lambda: ["transport facility", "public transportation facility"]
    )
    # symmetry tolerances: centroid offsets as fraction of plot diameter,
    # area ratios as max/min of a matched pair
    layout_abs_offset: float = 0.05
    layout_abs_area_ratio: float = 1.05
    layout_approx_offset: float = 0.15
    layout_approx_area_ratio: float = 1.25
    layout_approx_min_fraction: float = 0.8
    layout_pair_axis_max_n: int = 12
    layout_centripetal_min_n: int = 4
    layout_centripetal_max_hull_ar: float = 1.5
    layout_centripetal_max_radial_cv: float = 0.3
    layout_axis_min_n: int = 3
    layout_axis_min_variance: float = 0.95
    layout_uniform_max_ar_dev: float = 0.10
    layout_mixed_min_count: int = 4
    layout_mixed_min_share: float = 0.40

    # --- functional diversity -------------------------------------------------
    diversity_level: str = "level2"  # or "level3"
    diversity_floor_area_weighting: bool = False

    # --- accessibility ---------------------------------------------------------
    facility_weights: dict[str, float] = field(
        default_factory=lambda: {
            "hospital": 5.0,
            "school": 4.0,
            "supermarket": 3.0,
            "park": 2.0,
            "convenience": 1.0,
        }
    )
    facility_radius_m: float = 5000.0
    facility_distance_floor_m: float = 50.0
    # raw POI category -> canonical facility category
    poi_category_aliases: dict[str, str] = field(
        default_factory=lambda: {
            "hospital": "hospital",
            "clinic": "hospital",
            "school": "school",
            "university": "school",
            "supermarket": "supermarket",
            "grocery": "supermarket",
            "park": "park",
            "garden": "park",
            "convenience": "convenience",
            "convenience store": "convenience",
            "convenience_store": "convenience",
        }
    )
    road_snap_tol_m: float = 1.0
    endpoint_snap_radius_m: float = 100.0
    transit_thresholds_m: dict[str, float] = field(
        default_factory=lambda: {"bus": 250.0, "mrt": 500.0}
    )

    # --- land use intensity -----------------------------------------------------
    storey_height_m: float = 3.0

    # --- building function graph --------------------------------------------------
    funcnet_enabled: bool = True
    neighbor_scale: float = 1.5
    neighbor_min_m: float = 25.0
    neighbor_max_m: float = 100.0
    poi_context_radius_m: float = 100.0
    rgcn_layers: int = 2
    rgcn_hidden: int = 32
    rgcn_dropout: float = 0.5
    rgcn_lr: float = 0.01
    rgcn_epochs: int = 500
    rgcn_folds: int = 5
    corridor_min_ar: float = 3.0
    corridor_max_width_m: float = 5.0
    corridor_touch_dist_m: float = 0.5
    corridor_min_touches: int = 2
    refine_poi_radius_m: float = 50.0
    refine_rules: list[dict] = field(
        default_factory=lambda: [
            {
                "label": "place of worship",
                "keywords": ["church", "mosque", "temple", "synagogue", "place of worship"],
            },
            {
                "label": "student accommodation",
                "keywords": ["hostel", "dormitory", "student accommodation", "halls of residence"],
            },
        ]
    )
    # optional override of the packaged level-2 -> level-1 mapping table
    level_map_path: str | None = None

    def __post_init__(self) -> None:
        if self.crs not in ("wgs84", "projected"):
            raise ConfigError(f"crs must be 'wgs84' or 'projected', got {self.crs!r}")
        if self.diversity_level not in ("level2", "level3"):
            raise ConfigError(f"diversity_level must be 'level2' or 'level3', got {self.diversity_level!r}")
        for name in ("facility_radius_m", "facility_distance_floor_m", "storey_height_m"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if any(w <= 0 for w in self.facility_weights.values()):
            raise ConfigError("facility weights must be > 0")

    # --- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "IndicatorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "IndicatorConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        """Stable hash identifying this exact parameter set."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
