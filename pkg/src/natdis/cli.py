"""Command-line entry point.

Subcommands: run (one seed), batch (seed list + aggregate), validate
(config/map/POI check), map-info (street graph statistics). Exit codes:
0 success, 1 validation error, 2 runtime failure. Diagnostics go to stderr;
results go to files under the output directory.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ScenarioConfig
from .engine import EngineError, batch_workers, load_world_inputs, run, run_batch
from .mapgraph import MapError, connected_components
from .reports import emit_reports
from .wkt import WktParseError

log = logging.getLogger("natdis")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="natdis",
        description="Discrete-time DTN simulator with a post-disaster mobility model.",
    )
    parser.add_argument("--version", action="version", version=f"natdis {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, metavar="PATH", help="scenario config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress logging")

    p_run = sub.add_parser("run", help="run one simulation and write reports")
    common(p_run)
    p_run.add_argument("--seed", type=int, default=None, help="seed (default: scenario.seed)")
    p_run.add_argument("--out", default="out", metavar="DIR", help="output directory")

    p_batch = sub.add_parser("batch", help="run a seed list and aggregate the results")
    common(p_batch)
    p_batch.add_argument(
        "--seeds", default=None, metavar="A,B,C", help="comma-separated seeds (default: scenario.seeds)"
    )
    p_batch.add_argument("--out", default="out", metavar="DIR", help="output directory")

    p_validate = sub.add_parser("validate", help="check config, map, and POIs; exit 0/1")
    common(p_validate)

    p_info = sub.add_parser("map-info", help="print street graph statistics")
    common(p_info)
    return parser


def _load_config(args) -> ScenarioConfig:
    config = ScenarioConfig.from_file(args.config)
    if args.overrides:
        config.apply_overrides(args.overrides)
    return config


def _write_resolved(config: ScenarioConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.txt").write_text(config.resolved_text(), encoding="utf-8")


def _cmd_run(args) -> int:
    config = _load_config(args)
    seed = args.seed if args.seed is not None else config.scenario.seed
    out_dir = Path(args.out)
    _write_resolved(config, out_dir)
    log.info("running seed %d (%s model, %d nodes, %.0f s)", seed, config.mobility.model,
             config.scenario.nodes, config.scenario.duration_s)
    report_set = run(config, seed)
    written = emit_reports(report_set, out_dir)
    log.info("wrote %d report files to %s", len(written), out_dir)
    return EXIT_OK


def _cmd_batch(args) -> int:
    config = _load_config(args)
    if args.seeds:
        try:
            seeds = [int(tok) for tok in args.seeds.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"--seeds: cannot parse {args.seeds!r}") from None
    else:
        seeds = config.seed_list()
    if not seeds:
        raise ConfigError("no seeds given (use --seeds or scenario.seeds)")
    out_dir = Path(args.out)
    _write_resolved(config, out_dir)
    log.info("running %d seeds with up to %d workers", len(seeds), batch_workers())
    per_seed, aggregate = run_batch(config, seeds)
    for seed, report_set in zip(seeds, per_seed):
        emit_reports(report_set, out_dir / f"seed_{seed}")
    emit_reports(aggregate, out_dir / "aggregate")
    log.info("wrote per-seed directories and aggregate to %s", out_dir)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _load_config(args)
    load_world_inputs(config)
    print("configuration valid", file=sys.stderr)
    return EXIT_OK


def _cmd_map_info(args) -> int:
    config = _load_config(args)
    if config.map_path() is None:
        raise ConfigError("map-info needs scenario.map")
    graph, _ = load_world_inputs(config)
    minx, miny, maxx, maxy = graph.bbox()
    print(f"vertices: {len(graph.vertices)}")
    print(f"edges: {len(graph.edges)}")
    print(f"total_street_length_m: {graph.total_length:.1f}")
    print(f"components: {len(connected_components(graph))}")
    print(f"bounds_m: {maxx - minx:.1f} x {maxy - miny:.1f}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "batch": _cmd_batch,
    "validate": _cmd_validate,
    "map-info": _cmd_map_info,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, MapError, WktParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (EngineError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as err:  # unexpected failure still gets a clean exit code
        log.exception("unexpected failure")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
