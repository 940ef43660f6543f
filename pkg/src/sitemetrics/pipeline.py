"""Stage orchestration: ingest through reports, with a run manifest.

Stages run in dependency order; each stage rewrites the enriched layer
files in the output directory, so a failed stage leaves every previously
written artifact valid and each stage can be rerun on its own through the
CLI. Identical inputs and config produce byte-identical GeoJSON/CSV/SVG
(the manifest additionally records wall-clock timings, which vary).
"""

from __future__ import annotations

import logging
import time
from pathlib import Path

from . import __version__
from .access import run_access
from .config import IndicatorConfig
from .diversity import run_diversity
from .forms import run_forms
from .funcnet import run_functions
from .geojson_io import load_dataset, parse_layers, write_dataset, write_json
from .ingest import assign_buildings_to_plots, validate
from .intensity import run_intensity
from .layout import run_layouts
from .records import Dataset
from .reports import GROUP_FIELDS, write_reports

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "forms", "layouts", "diversity", "access", "intensity", "functions", "report")

TABLE_FIELDS_PLOTS = ("mp_name", "land_use", "plot_area", "subzone", "Layout_Pattern", "FR", "SI", "PTA", "CI", "FAR", "BCR")
FUNCTION_FIELDS = ("Building_Category", "Building_Type", "Building_Function", "confidence")


def output_metadata(cfg: IndicatorConfig) -> dict:
    return {
        "generator": f"sitemetrics {__version__}",
        "crs": "projected",
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "conventions": {
            "orientation": "bearing of the footprint MBR long axis, clockwise from north, "
            "axis direction folded to positive northing; due east-west reports 90",
            "bcr": "stored as a ratio; multiply by 100 for percent",
            "quantiles": "linear interpolation; BCR outliers (ratio > 1) excluded from all summary statistics",
        },
    }


def run_pipeline(
    cfg: IndicatorConfig,
    out_dir: str | Path,
    paths: dict[str, str | Path] | None = None,
    stages: tuple[str, ...] = STAGE_ORDER,
) -> dict:
    """Run the selected stages in order and write the run manifest.

    `paths` defaults to cfg.inputs. Returns the manifest dict.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = output_metadata(cfg)

    manifest: dict = {
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "stages": [],
        "outputs": [],
    }

    ds: Dataset | None = None
    stage_error: str | None = None
    for stage in STAGE_ORDER:
        if stage not in stages:
            continue
        t0 = time.perf_counter()
        try:
            ds = _run_stage(stage, ds, cfg, out_dir, meta, manifest)
        except Exception as exc:  # abort downstream stages, keep prior outputs
            stage_error = f"{stage}: {exc}"
            logger.error("stage %s failed: %s", stage, exc)
            manifest["stages"].append({"name": stage, "status": "failed", "error": str(exc)})
            break
        manifest["stages"].append(
            {"name": stage, "status": "ok", "seconds": round(time.perf_counter() - t0, 6)}
        )

    skipped_functions = "functions" not in stages or not cfg.funcnet_enabled
    manifest["schema"] = {
        "plot_fields": list(TABLE_FIELDS_PLOTS),
        "building_fields": ["id", "foot_area", "perimeter", "height", "floors", "orientation", "Form_Type", "plot_id"],
        "disabled": list(FUNCTION_FIELDS) if skipped_functions else [],
    }
    if stage_error is not None:
        manifest["error"] = stage_error
    write_json(out_dir / "manifest.json", manifest)
    if stage_error is not None:
        raise PipelineError(stage_error)
    return manifest


class PipelineError(RuntimeError):
    pass


def _write(ds: Dataset, out_dir: Path, meta: dict, manifest: dict) -> None:
    paths = write_dataset(ds, out_dir, meta)
    for p in paths.values():
        name = p.name
        if name not in manifest["outputs"]:
            manifest["outputs"].append(name)


def _run_stage(
    stage: str,
    ds: Dataset | None,
    cfg: IndicatorConfig,
    out_dir: Path,
    meta: dict,
    manifest: dict,
) -> Dataset:
    if stage == "ingest":
        paths = {k: Path(v) for k, v in cfg.inputs.items()}
        ds = parse_layers(paths, cfg)
        assign_buildings_to_plots(ds)
        report = validate(ds)
        write_json(out_dir / "validation.json", report.to_dict())
        manifest["outputs"].append("validation.json")
        manifest["rejections"] = {
            "count": len(ds.rejections),
            "by_layer": _rejections_by_layer(ds),
        }
        write_json(
            out_dir / "rejections.json",
            [
                {"layer": r.layer, "feature_index": r.feature_index, "id": r.feature_id, "reason": r.reason}
                for r in ds.rejections
            ],
        )
        manifest["outputs"].append("rejections.json")
        _write(ds, out_dir, meta, manifest)
        return ds

    if ds is None:
        ds = load_dataset(out_dir, cfg)
        assign_buildings_to_plots(ds)

    if stage == "forms":
        run_forms(ds, cfg)
    elif stage == "layouts":
        run_layouts(ds, cfg)
    elif stage == "diversity":
        run_diversity(ds, cfg)
    elif stage == "access":
        run_access(ds, cfg)
    elif stage == "intensity":
        run_intensity(ds, cfg)
    elif stage == "functions":
        if cfg.funcnet_enabled:
            checkpoint = out_dir / "rgcn_checkpoint.json"
            ds, report = run_functions(ds, cfg, checkpoint_path=checkpoint)
            write_json(out_dir / "train_report.json", report.to_dict())
            manifest["outputs"].extend(["rgcn_checkpoint.json", "train_report.json"])
        else:
            logger.info("functions stage disabled by config")
            return ds
    elif stage == "report":
        for group_by in GROUP_FIELDS:
            for p in write_reports(ds, out_dir, group_by, meta):
                manifest["outputs"].append(p.name)
        return ds
    else:
        raise ValueError(f"unknown stage {stage!r}")

    _write(ds, out_dir, meta, manifest)
    return ds


def _rejections_by_layer(ds: Dataset) -> dict[str, int]:
    out: dict[str, int] = {}
    for r in ds.rejections:
        out[r.layer] = out.get(r.layer, 0) + 1
    return out
