"""Fixed-step simulation loop and multi-run batches.

Phase order within one step is part of the engine contract:
 1. activate/deactivate nodes per their arrival plans
 2. mobility (schedule lookups, leg planning, kinematic advance)
 3. contact detection on the new positions
 4. link tear-down/setup and message transfers
 5. traffic generation
 6. TTL expiry
 7. report sampling

Messages created in phase 5 therefore never move before the next step's
phase 4. Identical (config, seed) pairs produce byte-identical reports.
"""
from __future__ import annotations

import heapq
import logging
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .dtn import ContactDetector, DtnNetwork, EncounterLog, TrafficGenerator
from .mapgraph import MapError, MapGraph, Poi, check_required_pois, load_map, load_pois, pois_by_kind
from .mobility import MapRwpModel, NdModel, RwpModel
from .reports import ReportCollector, ReportSet, aggregate_reports

log = logging.getLogger(__name__)

_ARRIVE, _DEPART = 0, 1


class EngineError(RuntimeError):
    pass


@lru_cache(maxsize=4)
def _load_scenario_map(map_path: str, mtime_ns: int, snap_tolerance: float, prune: bool):
    with open(map_path, encoding="utf-8") as fh:
        text = fh.read()
    graph, dropped = load_map(text, snap_tolerance, prune)
    if dropped:
        log.warning("map %s: pruned %d edges outside the largest component", map_path, dropped)
    return graph


def load_world_inputs(config: ScenarioConfig) -> tuple[MapGraph | None, dict[str, list[Poi]] | None]:
    """Load and validate the map and POI files a config refers to."""
    config.require_inputs()
    graph = None
    pois = None
    map_path = config.map_path()
    if map_path is not None:
        try:
            mtime_ns = os.stat(map_path).st_mtime_ns
        except OSError as err:
            raise MapError(f"cannot read map file: {err}") from None
        graph = _load_scenario_map(
            str(map_path),
            mtime_ns,
            config.scenario.snap_tolerance_m,
            config.scenario.prune_to_largest_component,
        )
    pois_path = config.pois_path()
    if pois_path is not None:
        if graph is None:
            raise MapError("POIs need a map to snap onto")
        try:
            poi_text = pois_path.read_text(encoding="utf-8")
        except OSError as err:
            raise MapError(f"cannot read POI file: {err}") from None
        poi_list = load_pois(poi_text, graph)
        if config.mobility.model == "nd":
            check_required_pois(poi_list)
        pois = pois_by_kind(poi_list)
    return graph, pois


class World:
    """All mutable state of one simulation run."""

    def __init__(self, config: ScenarioConfig, seed: int, force_slow_advance: bool = False):
        self.config = config
        self.seed = seed
        self.force_slow = force_slow_advance
        self.graph, self.pois = load_world_inputs(config)
        if self.graph is not None:
            self.bounds = self.graph.bbox()
        else:
            self.bounds = (0.0, 0.0, config.scenario.width_m, config.scenario.height_m)
        counts = config.role_counts()
        params = config.mobility_params()
        model_name = config.mobility.model
        if model_name == "rwp":
            self.model = RwpModel(self.bounds, counts, params, seed)
        elif model_name == "map":
            self.model = MapRwpModel(self.graph, counts, params, seed)
        else:
            self.model = NdModel(
                self.graph, self.pois, counts, params, seed,
                schedules=config.nd_schedules(),
                sim_duration=config.scenario.duration_s,
            )
        self.states, self.plans = self.model.spawn()
        self.kin = self.model.kin
        n = len(self.states)
        self._events: list[tuple[float, int, int]] = []
        for plan in self.plans:
            heapq.heappush(self._events, (plan.arrival_time, _ARRIVE, plan.node_id))
            if plan.departure_time is not None:
                heapq.heappush(self._events, (plan.departure_time, _DEPART, plan.node_id))
        self.net = DtnNetwork(
            n,
            phy_rate_bps=config.radio.phy_rate_bps,
            buffer_bytes=config.routing.buffer_bytes,
            drop_policy=config.routing.drop_policy,
            drop_rng=random.Random(f"{seed}:misc"),
        )
        self.detector = ContactDetector(n, config.radio.range_m)
        self.encounters = EncounterLog(n)
        self.traffic = None
        if config.traffic.enabled:
            t = config.traffic
            self.traffic = TrafficGenerator(
                random.Random(f"{seed}:traffic"),
                t.interval_min_s, t.interval_max_s, t.size_min_bytes, t.size_max_bytes, t.ttl_s,
            )
        self.roles = [s.role for s in self.states]
        self.reports = ReportCollector(config, seed, self.bounds, self.roles)
        self.clock = 0.0
        self.step_index = 0

    # -- driving -----------------------------------------------------------------

    def step(self, dt: float) -> None:
        t0 = self.clock
        t1 = t0 + dt
        kin = self.kin
        # phase 1: arrivals and departures due by t0
        while self._events and self._events[0][0] <= t0:
            _, what, node = heapq.heappop(self._events)
            state = self.states[node]
            if what == _ARRIVE:
                kin.active[node] = True
                self.model.on_activated(state, t0)
            else:
                kin.active[node] = False
                kin.moving[node] = False
                kin.waypoints[node] = None
                kin.pause_until[node] = math.inf
                kin.interrupt_at[node] = math.inf
                self.model.on_deactivated(state, t0)
                self.net.node_deactivated(node, t0)
        # phase 2: mobility
        need = kin.active & ~kin.moving & (kin.pause_until <= t0)
        interrupt = kin.active & kin.moving & (kin.interrupt_at <= t0)
        pending = need | interrupt
        if pending.any():
            for i in np.nonzero(pending)[0]:
                self.model.plan(self.states[int(i)], t0)
        for i in self.kin.advance_all(dt, self.force_slow):
            self.model.on_leg_complete(self.states[i], t1)
        # phase 3: contact detection
        ups, downs = self.detector.update(kin.x, kin.y, kin.active)
        for a, b in ups:
            self.encounters.record(a, b)
        # phase 4: link changes, epidemic exchange, transfers
        for a, b in downs:
            self.net.link_down(a, b, t1)
        for a, b in ups:
            self.net.link_up(a, b, t1)
        self.net.advance(t1)
        # phase 5: traffic
        if self.traffic is not None and self.traffic.next_time <= t1:
            active_ids = [int(i) for i in np.nonzero(kin.active)[0]]
            for message in self.traffic.step(t1, active_ids):
                self.net.create_message(message)
        # phase 6: TTL expiry
        self.net.expire(t1)
        # phase 7: reports
        self.step_index += 1
        self.reports.on_step(self.step_index, t1, self)
        self.clock = t1

    def node_accounting(self) -> tuple[int, int]:
        """(active, inactive) node counts; inactive = not yet arrived or departed."""
        active = int(self.kin.active.sum())
        return active, len(self.states) - active

    def run(self) -> ReportSet:
        dt = self.config.scenario.step_dt_s
        n_steps = round(self.config.scenario.duration_s / dt)
        for k in range(n_steps):
            self.step(dt)
            # keep the clock exact over long runs
            self.clock = (k + 1) * dt
        return self.reports.finalize(self)


def run(config: ScenarioConfig, seed: int) -> ReportSet:
    """Execute one full simulation; identical (config, seed) gives identical output."""
    return World(config, seed).run()


def _run_for_batch(args) -> ReportSet:
    config_text, base_dir, seed = args
    config = ScenarioConfig.from_text(config_text, Path(base_dir))
    return run(config, seed)


def batch_workers() -> int:
    """Worker cap for batch execution, from NATDIS_THREADS (default: CPU count)."""
    env = os.environ.get("NATDIS_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer NATDIS_THREADS=%r", env)
    return os.cpu_count() or 1


def run_batch(
    config: ScenarioConfig, seeds: list[int], max_workers: int | None = None
) -> tuple[list[ReportSet], ReportSet]:
    """Run every seed (possibly concurrently) and aggregate mean/stddev per cell."""
    if not seeds:
        raise EngineError("batch needs at least one seed")
    if max_workers is None:
        max_workers = batch_workers()
    max_workers = min(max_workers, len(seeds))
    results: list[ReportSet | None] = [None] * len(seeds)
    if max_workers <= 1:
        for k, seed in enumerate(seeds):
            try:
                results[k] = run(config, seed)
            except Exception as err:
                raise EngineError(f"run for seed {seed} failed: {err}") from err
    else:
        payload = config.resolved_text()
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = {
                pool.submit(_run_for_batch, (payload, str(config.base_dir), seed)): (k, seed)
                for k, seed in enumerate(seeds)
            }
            for future, (k, seed) in futures.items():
                try:
                    results[k] = future.result()
                except Exception as err:
                    raise EngineError(f"run for seed {seed} failed: {err}") from err
    return list(results), aggregate_reports(results)
