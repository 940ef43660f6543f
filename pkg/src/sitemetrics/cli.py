"""Command-line entry point.

Subcommands mirror the pipeline stages so any stage can be rerun on its
own against an existing output directory:

    sitemetrics pipeline  --config cfg.json --out-dir out
    sitemetrics ingest    --config cfg.json --out-dir out
    sitemetrics forms     --config cfg.json --out-dir out
    sitemetrics layouts | diversity | access | intensity  ...
    sitemetrics functions train|predict --config cfg.json --out-dir out
    sitemetrics report    --config cfg.json --out-dir out [--group-by land_use|subzone]

Exit codes: 0 success, 1 config/input error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import rgcn
from .config import ConfigError, IndicatorConfig
from .funcnet import build_relgraph, load_level_map, predict_level2, refine_level3, rollup_level1, train_on_dataset
from .geojson_io import LayerError, load_dataset, write_dataset, write_json
from .ingest import assign_buildings_to_plots
from .pipeline import PipelineError, output_metadata, run_pipeline
from .reports import GROUP_FIELDS, write_reports

logger = logging.getLogger(__name__)

SINGLE_STAGES = ("ingest", "forms", "layouts", "diversity", "access", "intensity")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sitemetrics", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out-dir", default="out", help="output directory (default: ./out)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    for name in SINGLE_STAGES:
        common(sub.add_parser(name, help=f"run the {name} stage"))

    p_functions = sub.add_parser("functions", help="building function model")
    p_functions.add_argument("action", choices=("train", "predict"))
    common(p_functions)
    p_functions.add_argument("--checkpoint", default=None, help="model checkpoint path (default: <out-dir>/rgcn_checkpoint.json)")

    p_report = sub.add_parser("report", help="aggregate CSV/SVG reports")
    common(p_report)
    p_report.add_argument("--group-by", choices=GROUP_FIELDS, default=None, help="single grouping (default: both)")

    p_pipe = sub.add_parser("pipeline", help="run every stage in order")
    common(p_pipe)
    return parser


def _load_config(args: argparse.Namespace) -> IndicatorConfig:
    cfg = IndicatorConfig.from_file(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _load_state(cfg: IndicatorConfig, out_dir: Path):
    ds = load_dataset(out_dir, cfg)
    assign_buildings_to_plots(ds)
    return ds


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = _load_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out_dir)
    try:
        if args.command == "pipeline":
            run_pipeline(cfg, out_dir)
        elif args.command in SINGLE_STAGES:
            run_pipeline(cfg, out_dir, stages=(args.command,))
        elif args.command == "report":
            ds = _load_state(cfg, out_dir)
            groups = (args.group_by,) if args.group_by else GROUP_FIELDS
            meta = output_metadata(cfg)
            for group_by in groups:
                for path in write_reports(ds, out_dir, group_by, meta):
                    logger.info("wrote %s", path)
        elif args.command == "functions":
            checkpoint = Path(args.checkpoint) if args.checkpoint else out_dir / "rgcn_checkpoint.json"
            ds = _load_state(cfg, out_dir)
            if args.action == "train":
                model, report, graph = train_on_dataset(ds, cfg)
                rgcn.save_checkpoint(checkpoint, model, graph.classes, graph.feature_meta)
                write_json(out_dir / "train_report.json", report.to_dict())
                logger.info(
                    "trained on %d labeled buildings; fold accuracies %s",
                    int((graph.labels >= 0).sum()),
                    [round(a, 4) for a in report.fold_accuracies],
                )
            else:
                model, classes, feature_meta = rgcn.load_checkpoint(checkpoint)
                graph = build_relgraph(ds, cfg, feature_meta=feature_meta)
                mapping = load_level_map(cfg.level_map_path)
                filled = predict_level2(ds, model, graph, mapping, classes=classes)
                refine_level3(ds, cfg)
                rollup_level1(ds, mapping)
                write_dataset(ds, out_dir, output_metadata(cfg))
                logger.info("filled %d building functions", filled)
    except (LayerError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"stage failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
