"""Per-node movement: Random Waypoint, map-constrained RWP, and the
role/activity-driven disaster model.

Node kinematics live in a columnar store so the engine can advance the whole
population with vectorized math; waypoint/segment transitions and all planning
run per node. Every random draw comes from seed-derived streams so identical
(config, seed) pairs reproduce traces exactly.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .mapgraph import GraphPosition, MapGraph, Poi
from .schedule import (
    Activity,
    Role,
    RoleSchedules,
    default_schedules,
    draw_jitter,
    resolve_boundaries,
)
from .wkt import Point2D

INF = math.inf

ROLE_ORDER = (
    Role.HealthyLocal,
    Role.InjuredLocal,
    Role.DRT,
    Role.USRT,
    Role.Scientist,
    Role.UnOfficial,
    Role.GovOfficial,
)

# activities that end in a dwell at one point of interest
_POINT_POI_KIND = {
    Activity.AirportRdc: "airport_rdc",
    Activity.OsoccMeeting: "osocc",
    Activity.TownHall: "town_hall",
    Activity.BaseCamp: "base_camp",
}
_ROAM_ACTIVITIES = (Activity.CityRoaming, Activity.Neighborhood, Activity.Reconnaissance)


@dataclass
class MobilityParams:
    """Movement knobs; every value is overridable from the scenario config."""

    speed_min: float = 0.5
    speed_max: float = 1.5
    injured_speed_min: float = 0.3
    injured_speed_max: float = 0.8
    usrt_search_speed_min: float = 0.3
    usrt_search_speed_max: float = 0.8
    pause_min_s: float = 0.0
    pause_max_s: float = 120.0
    neighborhood_radius_m: float = 200.0
    neighborhood_pause_min_s: float = 60.0
    neighborhood_pause_max_s: float = 600.0
    recon_pause_min_s: float = 300.0
    recon_pause_max_s: float = 1800.0
    immobile_injured_fraction: float = 0.2
    volunteer_fraction: float = 0.5
    jitter_hours: float = 2.0
    food_visit_s: float = 3600.0
    rdc_dwell_s: float = 1800.0
    osocc_briefing_s: float = 3600.0
    basecamp_setup_s: float = 1800.0
    un_arrival_hour: float = 4.0
    prepositioned_fraction: float = 0.2
    arrival_hour_min: float = 7.0
    arrival_hour_max: float = 17.0
    usrt_departure_hour_min: float = 8.0
    usrt_departure_hour_max: float = 20.0

    def speed_range(self, role: Role, searching: bool = False) -> tuple[float, float]:
        if searching:
            return self.usrt_search_speed_min, self.usrt_search_speed_max
        if role is Role.InjuredLocal:
            return self.injured_speed_min, self.injured_speed_max
        return self.speed_min, self.speed_max


@dataclass(frozen=True)
class ArrivalPlan:
    node_id: int
    arrival_time: float
    departure_time: float | None = None


class Kinematics:
    """Columnar position/segment state for all nodes of one run."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros(n)
        self.y = np.zeros(n)
        self.speed = np.zeros(n)
        self.seg_ax = np.zeros(n)
        self.seg_ay = np.zeros(n)
        self.seg_ux = np.zeros(n)
        self.seg_uy = np.zeros(n)
        self.seg_len = np.zeros(n)
        self.traveled = np.zeros(n)
        self.moving = np.zeros(n, dtype=bool)
        self.active = np.zeros(n, dtype=bool)
        self.pause_until = np.zeros(n)
        self.interrupt_at = np.full(n, INF)
        self.waypoints: list[list[Point2D] | None] = [None] * n
        self.wp_index = [0] * n

    def place(self, i: int, p: Point2D) -> None:
        self.x[i] = p.x
        self.y[i] = p.y
        self.moving[i] = False
        self.waypoints[i] = None

    def set_path(self, i: int, points: list[Point2D], speed: float) -> bool:
        """Start walking a polyline; returns False if it is a single point."""
        if len(points) < 2:
            if points:
                self.place(i, points[0])
            return False
        self.x[i] = points[0].x
        self.y[i] = points[0].y
        self.waypoints[i] = points
        self.wp_index[i] = 1
        self.speed[i] = speed
        self._begin_segment(i, points[0], points[1])
        self.moving[i] = True
        return True

    def _begin_segment(self, i: int, a: Point2D, b: Point2D) -> None:
        dx = b.x - a.x
        dy = b.y - a.y
        length = math.hypot(dx, dy)
        self.seg_ax[i] = a.x
        self.seg_ay[i] = a.y
        if length > 0.0:
            self.seg_ux[i] = dx / length
            self.seg_uy[i] = dy / length
        else:  # coincident waypoints: consumed immediately by advance_one
            self.seg_ux[i] = 0.0
            self.seg_uy[i] = 0.0
        self.seg_len[i] = length
        self.traveled[i] = 0.0

    def advance_one(self, i: int, step: float) -> bool:
        """Move one node `step` meters along its polyline; True on leg completion.

        Waypoints are consumed exactly; leftover distance past the final
        waypoint is discarded (the node stops on arrival).
        """
        while True:
            if self.traveled[i] + step < self.seg_len[i] - 1e-9:
                self.traveled[i] = self.traveled[i] + step
                self.x[i] = self.seg_ax[i] + self.seg_ux[i] * self.traveled[i]
                self.y[i] = self.seg_ay[i] + self.seg_uy[i] * self.traveled[i]
                return False
            step = max(0.0, step - (self.seg_len[i] - self.traveled[i]))
            wp = self.waypoints[i]
            k = self.wp_index[i]
            self.x[i] = wp[k].x
            self.y[i] = wp[k].y
            k += 1
            if k >= len(wp):
                self.moving[i] = False
                self.waypoints[i] = None
                return True
            self.wp_index[i] = k
            self._begin_segment(i, wp[k - 1], wp[k])

    def advance_all(self, dt: float, force_slow: bool = False) -> list[int]:
        """Advance every moving node by dt seconds; returns completed node ids.

        The vectorized fast path covers nodes that stay inside their current
        segment and is arithmetically identical to advance_one.
        """
        if not self.moving.any():
            return []
        if force_slow:
            completed = []
            for i in np.nonzero(self.moving)[0]:
                if self.advance_one(int(i), float(self.speed[i]) * dt):
                    completed.append(int(i))
            return completed
        step = self.speed * dt
        new_traveled = self.traveled + step
        within = new_traveled < self.seg_len - 1e-9
        fast = self.moving & within
        if fast.any():
            self.traveled[fast] = new_traveled[fast]
            self.x[fast] = self.seg_ax[fast] + self.seg_ux[fast] * self.traveled[fast]
            self.y[fast] = self.seg_ay[fast] + self.seg_uy[fast] * self.traveled[fast]
        completed = []
        for i in np.nonzero(self.moving & ~within)[0]:
            if self.advance_one(int(i), float(step[i])):
                completed.append(int(i))
        return completed


@dataclass
class MobilityState:
    """Semantic state of one simulated person; kinematics live in `kin`."""

    node_id: int
    role: Role
    kin: Kinematics
    rng: random.Random
    home_anchor: GraphPosition | None = None
    immobile: bool = False
    volunteer: bool = False
    activity: Activity | None = None
    arrived: bool = False
    pipeline: list[tuple[str, float]] | None = None
    pipeline_stage: int = 0
    pipeline_dwelling: bool = False
    hospital_target: Poi | None = None
    hospital_slot: Poi | None = None
    search_assignment: tuple[int, str] | None = None
    pending_pause: float = 0.0
    last_gp: GraphPosition | None = None
    target_gp: GraphPosition | None = None
    jitter_offsets: list[float] | None = None
    agenda_day: int = -1
    agenda: list[tuple[float, float, Activity]] = field(default_factory=list)
    neighborhood_portions: list[tuple[int, float, float]] | None = None
    visit_log: list[tuple[float, str, str]] = field(default_factory=list)

    @property
    def index(self) -> int:
        return self.node_id

    @property
    def position(self) -> Point2D:
        return Point2D(float(self.kin.x[self.node_id]), float(self.kin.y[self.node_id]))

    @property
    def speed(self) -> float:
        return float(self.kin.speed[self.node_id])

    @property
    def pause_until(self) -> float:
        return float(self.kin.pause_until[self.node_id])

    @pause_until.setter
    def pause_until(self, value: float) -> None:
        self.kin.pause_until[self.node_id] = value

    @property
    def interrupt_at(self) -> float:
        return float(self.kin.interrupt_at[self.node_id])

    @interrupt_at.setter
    def interrupt_at(self, value: float) -> None:
        self.kin.interrupt_at[self.node_id] = value

    @property
    def active(self) -> bool:
        return bool(self.kin.active[self.node_id])

    @property
    def moving(self) -> bool:
        return bool(self.kin.moving[self.node_id])

    def log(self, now: float, tag: str, name: str) -> None:
        self.visit_log.append((now, tag, name))


def advance(state: MobilityState, dt: float, now: float = 0.0) -> bool:
    """Advance one node by dt seconds; pausing nodes do not move.

    Returns True when the current leg completes during this call.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    i = state.node_id
    if state.kin.pause_until[i] > now or not state.kin.moving[i]:
        return False
    return state.kin.advance_one(i, float(state.kin.speed[i]) * dt)


def rwp_next_leg(
    state: MobilityState, rng: random.Random, bounds: tuple[float, float, float, float],
    params: MobilityParams,
) -> tuple[Point2D, float, float]:
    """Random-waypoint leg: uniform waypoint in bounds, role speed, pause draw."""
    minx, miny, maxx, maxy = bounds
    waypoint = Point2D(rng.uniform(minx, maxx), rng.uniform(miny, maxy))
    lo, hi = params.speed_range(state.role)
    speed = rng.uniform(lo, hi)
    pause = rng.uniform(params.pause_min_s, params.pause_max_s)
    return waypoint, speed, pause


def maprwp_next_leg(
    state: MobilityState, rng: random.Random, graph: MapGraph, current: GraphPosition,
    params: MobilityParams,
) -> tuple[list[Point2D], float, float, GraphPosition]:
    """Map-constrained leg: destination uniform by street length, path on graph."""
    target = graph.uniform_position(rng)
    path, _ = graph.shortest_path(current, target)
    lo, hi = params.speed_range(state.role)
    speed = rng.uniform(lo, hi)
    pause = rng.uniform(params.pause_min_s, params.pause_max_s)
    return path, speed, pause, target


class SearchCursor:
    """Street-sweep bookkeeping shared by all search-and-rescue nodes of a run.

    The first request picks a uniformly random start edge; afterwards edges
    come breadth-first from the most recently assigned edge's neighborhood.
    When the frontier runs dry the sweep restarts at a random unsearched edge.
    """

    def __init__(self, graph: MapGraph):
        self.graph = graph
        self.visited: set[int] = set()
        self.frontier: list[int] = []
        self._frontier_pos = 0

    def _push_neighbors(self, eid: int) -> None:
        e = self.graph.edges[eid]
        for vid in (e.a, e.b):
            for neighbor_eid, _ in self.graph.adjacency[vid]:
                if neighbor_eid not in self.visited:
                    self.frontier.append(neighbor_eid)

    def _pop_frontier(self) -> int | None:
        while self._frontier_pos < len(self.frontier):
            eid = self.frontier[self._frontier_pos]
            self._frontier_pos += 1
            if eid not in self.visited:
                return eid
        return None

    def next_edge(self, rng: random.Random) -> int | None:
        """Next edge to search, or None once every edge has been assigned."""
        eid = self._pop_frontier()
        if eid is None:
            remaining = [e for e in range(len(self.graph.edges)) if e not in self.visited]
            if not remaining:
                return None
            eid = remaining[rng.randrange(len(remaining))]
        self.visited.add(eid)
        self._push_neighbors(eid)
        return eid


def usrt_next_search_edge(state: MobilityState, cursor: SearchCursor, rng: random.Random) -> int | None:
    if state.role is not Role.USRT:
        raise ValueError("street search applies to USRT nodes only")
    return cursor.next_edge(rng)


def injured_hospital_target(
    current: GraphPosition,
    hospitals: list[Poi],
    occupancy: dict[str, int],
    graph: MapGraph,
    exclude: Poi | None = None,
) -> tuple[Poi, bool]:
    """Pick the hospital an injured node should head for.

    Returns (poi, keep_seeking): the nearest-by-path hospital with free
    capacity, or, if every candidate is full, the nearest one with
    keep_seeking=True so the node re-evaluates on arrival.
    """
    if not hospitals:
        raise ValueError("no hospital POIs available")
    candidates = [h for h in hospitals if h is not exclude] or list(hospitals)
    ranked = sorted(
        ((graph.path_length(current, h.position), k) for k, h in enumerate(candidates)),
        key=lambda t: (t[0], t[1]),
    )
    for dist, k in ranked:
        poi = candidates[k]
        cap = INF if poi.capacity is None else poi.capacity
        if occupancy.get(poi.name, 0) < cap:
            return poi, False
    return candidates[ranked[0][1]], True


# -- spawning ------------------------------------------------------------------


def role_layout(counts: dict[Role, int]) -> list[Role]:
    """Node-id to role assignment: roles in fixed order, ids sequential."""
    roles: list[Role] = []
    for role in ROLE_ORDER:
        roles.extend([role] * counts.get(role, 0))
    return roles


class RwpModel:
    """Random Waypoint over the rectangular scenario bounds."""

    name = "rwp"
    on_graph = False

    def __init__(self, bounds, counts, params: MobilityParams, seed: int | str):
        self.bounds = bounds
        self.counts = counts
        self.params = params
        self.seed = seed
        self.states: list[MobilityState] = []
        self.kin: Kinematics | None = None

    def _node_rng(self, i: int) -> random.Random:
        return random.Random(f"{self.seed}:node:{i}")

    def spawn(self) -> tuple[list[MobilityState], list[ArrivalPlan]]:
        roles = role_layout(self.counts)
        spawn_rng = random.Random(f"{self.seed}:mobility")
        self.kin = Kinematics(len(roles))
        minx, miny, maxx, maxy = self.bounds
        plans = []
        for i, role in enumerate(roles):
            state = MobilityState(i, role, self.kin, self._node_rng(i))
            self.kin.place(i, Point2D(spawn_rng.uniform(minx, maxx), spawn_rng.uniform(miny, maxy)))
            self.states.append(state)
            plans.append(ArrivalPlan(i, 0.0))
        return self.states, plans

    def on_activated(self, state: MobilityState, now: float) -> None:
        state.pause_until = now

    def on_deactivated(self, state: MobilityState, now: float) -> None:
        state.log(now, "act", "Departed")

    def plan(self, state: MobilityState, now: float) -> None:
        waypoint, speed, pause = rwp_next_leg(state, state.rng, self.bounds, self.params)
        state.pending_pause = pause
        if not state.kin.set_path(state.node_id, [state.position, waypoint], speed):
            state.pause_until = now + pause

    def on_leg_complete(self, state: MobilityState, now: float) -> None:
        state.pause_until = now + state.pending_pause


class MapRwpModel:
    """Random waypoints drawn uniformly by street length; movement on the graph."""

    name = "map"
    on_graph = True

    def __init__(self, graph: MapGraph, counts, params: MobilityParams, seed: int | str):
        self.graph = graph
        self.counts = counts
        self.params = params
        self.seed = seed
        self.states: list[MobilityState] = []
        self.kin: Kinematics | None = None

    def _node_rng(self, i: int) -> random.Random:
        return random.Random(f"{self.seed}:node:{i}")

    def spawn(self) -> tuple[list[MobilityState], list[ArrivalPlan]]:
        roles = role_layout(self.counts)
        spawn_rng = random.Random(f"{self.seed}:mobility")
        self.kin = Kinematics(len(roles))
        plans = []
        for i, role in enumerate(roles):
            state = MobilityState(i, role, self.kin, self._node_rng(i))
            gp = self.graph.uniform_position(spawn_rng)
            state.last_gp = gp
            self.kin.place(i, self.graph.point_at(gp))
            self.states.append(state)
            plans.append(ArrivalPlan(i, 0.0))
        return self.states, plans

    def on_activated(self, state: MobilityState, now: float) -> None:
        state.pause_until = now

    def on_deactivated(self, state: MobilityState, now: float) -> None:
        state.log(now, "act", "Departed")

    def _current_gp(self, state: MobilityState) -> GraphPosition:
        if not state.moving and state.last_gp is not None:
            return state.last_gp
        return self.graph.snap_point(state.position)

    def plan(self, state: MobilityState, now: float) -> None:
        current = self._current_gp(state)
        path, speed, pause, target = maprwp_next_leg(
            state, state.rng, self.graph, current, self.params
        )
        state.pending_pause = pause
        state.target_gp = target
        state.last_gp = None
        if not state.kin.set_path(state.node_id, path, speed):
            state.last_gp = target
            state.pause_until = now + pause

    def on_leg_complete(self, state: MobilityState, now: float) -> None:
        state.last_gp = state.target_gp
        state.pause_until = now + state.pending_pause


class NdModel:
    """Role- and schedule-driven movement for the first post-disaster week."""

    name = "nd"
    on_graph = True

    def __init__(
        self,
        graph: MapGraph,
        pois: dict[str, list[Poi]],
        counts: dict[Role, int],
        params: MobilityParams,
        seed: int | str,
        schedules: RoleSchedules | None = None,
        sim_duration: float = 604800.0,
    ):
        self.graph = graph
        self.pois = pois
        self.counts = counts
        self.params = params
        self.seed = seed
        self.schedules = schedules or default_schedules()
        self.sim_duration = sim_duration
        self.states: list[MobilityState] = []
        self.kin: Kinematics | None = None
        self.cursor = SearchCursor(graph)
        self.usrt_rng = random.Random(f"{seed}:usrt")
        self.hospital_occupancy: dict[str, int] = {}

    # -- spawn -----------------------------------------------------------

    def _node_rng(self, i: int) -> random.Random:
        return random.Random(f"{self.seed}:node:{i}")

    def _poi(self, kind: str) -> Poi:
        return self.pois[kind][0]

    def spawn(self) -> tuple[list[MobilityState], list[ArrivalPlan]]:
        roles = role_layout(self.counts)
        rng = random.Random(f"{self.seed}:mobility")
        self.kin = Kinematics(len(roles))
        airport = self._poi("airport_rdc")
        base_camp = self._poi("base_camp")
        plans: list[ArrivalPlan] = []
        role_seen: dict[Role, int] = {}
        for i, role in enumerate(roles):
            k = role_seen.get(role, 0)
            role_seen[role] = k + 1
            state = MobilityState(i, role, self.kin, self._node_rng(i))
            arrival, departure = 0.0, None
            if role in (Role.HealthyLocal, Role.InjuredLocal, Role.Scientist):
                state.home_anchor = self.graph.uniform_position(rng)
                self.kin.place(i, self.graph.point_at(state.home_anchor))
                if role is Role.InjuredLocal:
                    state.immobile = rng.random() < self.params.immobile_injured_fraction
                if role is Role.Scientist:
                    state.volunteer = rng.random() < self.params.volunteer_fraction
                    if not state.volunteer:
                        hour = rng.uniform(self.params.arrival_hour_min, self.params.arrival_hour_max)
                        departure = 3 * 86400.0 + hour * 3600.0
            elif role is Role.GovOfficial:
                state.home_anchor = base_camp.position
                self.kin.place(i, base_camp.point)
            elif role is Role.UnOfficial:
                state.home_anchor = base_camp.position
                self.kin.place(i, airport.point)
                arrival = self.params.un_arrival_hour * 3600.0
            else:  # DRT / USRT arrive via the airport
                state.home_anchor = base_camp.position
                self.kin.place(i, airport.point)
                n_role = self.counts.get(role, 0)
                n_pre = round(self.params.prepositioned_fraction * n_role)
                if k < n_pre:
                    arrival = self.params.un_arrival_hour * 3600.0
                else:
                    day = rng.randint(1, 3)
                    hour = rng.uniform(self.params.arrival_hour_min, self.params.arrival_hour_max)
                    arrival = day * 86400.0 + hour * 3600.0
                if role is Role.USRT:
                    dep_hour = rng.uniform(
                        self.params.usrt_departure_hour_min, self.params.usrt_departure_hour_max
                    )
                    departure = 6 * 86400.0 + dep_hour * 3600.0
            state.last_gp = self.graph.snap_point(state.position)
            self.states.append(state)
            plans.append(ArrivalPlan(i, arrival, departure))
        return self.states, plans

    # -- planning ----------------------------------------------------------

    def on_activated(self, state: MobilityState, now: float) -> None:
        if state.role in (Role.DRT, Role.USRT, Role.UnOfficial):
            state.log(now, "poi", "airport_rdc")
        if state.role in (Role.DRT, Role.USRT) and now >= 86400.0:
            # late arrivals run the registration pipeline explicitly; day-0
            # arrivals get the same airport->OSOCC->camp order from the table
            state.pipeline = [
                ("airport_rdc", self.params.rdc_dwell_s),
                ("osocc", self.params.osocc_briefing_s),
                ("base_camp", self.params.basecamp_setup_s),
            ]
            state.pipeline_stage = 0
            state.pipeline_dwelling = False
        state.pause_until = now

    def on_deactivated(self, state: MobilityState, now: float) -> None:
        """Departed nodes park at the airport until the run ends."""
        self._end_activity(state)
        state.pipeline = None
        state.activity = None
        airport = self._poi("airport_rdc")
        state.kin.place(state.node_id, airport.point)
        state.last_gp = airport.position
        state.log(now, "act", "Departed")

    def _current_gp(self, state: MobilityState) -> GraphPosition:
        if not state.moving and state.last_gp is not None:
            return state.last_gp
        return self.graph.snap_point(state.position)

    def _walk_to(
        self, state: MobilityState, target: GraphPosition, now: float,
        searching: bool = False,
    ) -> bool:
        """Start walking to target; returns True if already there (instant arrival)."""
        current = self._current_gp(state)
        path, length = self.graph.shortest_path(current, target)
        state.target_gp = target
        if length < 1e-9 or len(path) < 2:
            state.last_gp = target
            return True
        lo, hi = self.params.speed_range(state.role, searching)
        state.last_gp = None
        state.kin.set_path(state.node_id, path, state.rng.uniform(lo, hi))
        return False

    def _agenda_item(self, state: MobilityState, now: float) -> tuple[float, float, Activity]:
        day = int(now // 86400.0)
        if day != state.agenda_day:
            self._build_agenda(state, day)
        for item in state.agenda:
            if item[0] <= now < item[1]:
                return item
        return state.agenda[-1]

    def _build_agenda(self, state: MobilityState, day: int) -> None:
        table = self.schedules.table_for(state.role, day)
        day_rng = random.Random(f"{self.seed}:node:{state.node_id}:day:{day}")
        offsets = draw_jitter(table, day_rng, self.params.jitter_hours)
        state.jitter_offsets = offsets
        bounds = resolve_boundaries(table, offsets)
        base = day * 86400.0
        items = [
            (base + bounds[i] * 3600.0, base + bounds[i + 1] * 3600.0, table[i].activity)
            for i in range(len(table))
        ]
        if state.role is Role.HealthyLocal and day >= 1:
            items = self._insert_food_visit(items, day_rng)
        state.agenda = items
        state.agenda_day = day

    def _insert_food_visit(self, items, day_rng):
        visit = self.params.food_visit_s
        for idx, (start, end, act) in enumerate(items):
            if act is Activity.CityRoaming and end - start > visit + 600.0:
                food_start = day_rng.uniform(start, end - visit)
                out = items[:idx]
                if food_start > start:
                    out.append((start, food_start, Activity.CityRoaming))
                out.append((food_start, food_start + visit, Activity.FoodDistribution))
                out.append((food_start + visit, end, Activity.CityRoaming))
                out.extend(items[idx + 1 :])
                return out
        return items

    def plan(self, state: MobilityState, now: float) -> None:
        if state.immobile:
            state.pause_until = INF
            state.interrupt_at = INF
            return
        if state.pipeline is not None:
            self._plan_pipeline(state, now)
            return
        item = self._agenda_item(state, now)
        state.interrupt_at = item[1]
        if item[2] is not state.activity:
            self._end_activity(state)
            state.activity = item[2]
            state.arrived = False
            state.log(now, "act", item[2].name)
        self._pursue(state, now, item)

    def _end_activity(self, state: MobilityState) -> None:
        if state.hospital_slot is not None:
            name = state.hospital_slot.name
            self.hospital_occupancy[name] = self.hospital_occupancy.get(name, 0) - 1
            state.hospital_slot = None
        state.hospital_target = None

    def _pursue(self, state: MobilityState, now: float, item) -> None:
        act = item[2]
        if act is Activity.Parked:
            state.pause_until = item[1]
            return
        if act is Activity.StreetSearch:
            self._plan_search(state, now)
            return
        if act in _ROAM_ACTIVITIES:
            target = self._roam_target(state, act)
            if self._walk_to(state, target, now):
                self._roam_pause(state, now)
            return
        if state.arrived:
            state.pause_until = item[1]
            return
        target = self._point_target(state, act)
        if target is None:
            state.pause_until = item[1]
            return
        if self._walk_to(state, target, now):
            self._arrive_point(state, now)

    def next_destination(
        self, state: MobilityState, activity: Activity
    ) -> tuple[GraphPosition, str]:
        """Destination and movement directive for an activity (query form)."""
        if activity is Activity.Parked:
            raise ValueError("Parked nodes have no destination")
        if activity is Activity.StreetSearch:
            eid = self.cursor.next_edge(self.usrt_rng)
            if eid is None:
                return self._poi("base_camp").position, "idle"
            return GraphPosition(eid, 0.0), "search"
        if activity in _ROAM_ACTIVITIES:
            directive = "roam" if activity is Activity.CityRoaming else "roam_pause"
            return self._roam_target(state, activity), directive
        target = self._point_target(state, activity)
        if target is None:
            return self._current_gp(state), "dwell"
        return target, "dwell"

    def _roam_target(self, state: MobilityState, act: Activity) -> GraphPosition:
        if act is Activity.Neighborhood and state.home_anchor is not None:
            if state.neighborhood_portions is None:
                state.neighborhood_portions = self.graph.reachable_portions(
                    state.home_anchor, self.params.neighborhood_radius_m
                )
            return self.graph.sample_portion(state.neighborhood_portions, state.rng)
        return self.graph.uniform_position(state.rng)

    def _roam_pause(self, state: MobilityState, now: float) -> None:
        act = state.activity
        if act is Activity.Neighborhood:
            state.pause_until = now + state.rng.uniform(
                self.params.neighborhood_pause_min_s, self.params.neighborhood_pause_max_s
            )
        elif act is Activity.Reconnaissance:
            state.pause_until = now + state.rng.uniform(
                self.params.recon_pause_min_s, self.params.recon_pause_max_s
            )
        else:
            state.pause_until = now

    def _point_target(self, state: MobilityState, act: Activity) -> GraphPosition | None:
        if act is Activity.Sleep:
            return state.home_anchor
        if act in _POINT_POI_KIND:
            return self._poi(_POINT_POI_KIND[act]).position
        if act is Activity.FoodDistribution:
            return self._nearest_poi(state, "food_water").position
        if act is Activity.Hospital:
            poi, _ = injured_hospital_target(
                self._current_gp(state), self.pois["hospital"], self.hospital_occupancy, self.graph
            )
            state.hospital_target = poi
            return poi.position
        return None

    def _nearest_poi(self, state: MobilityState, kind: str) -> Poi:
        current = self._current_gp(state)
        best = None
        for poi in self.pois[kind]:
            d = self.graph.path_length(current, poi.position)
            if best is None or d < best[0]:
                best = (d, poi)
        return best[1]

    # -- arrivals ----------------------------------------------------------

    def on_leg_complete(self, state: MobilityState, now: float) -> None:
        state.last_gp = state.target_gp
        if state.pipeline is not None:
            self._pipeline_arrive(state, now)
            return
        act = state.activity
        if act in _ROAM_ACTIVITIES:
            self._roam_pause(state, now)
        elif act is Activity.StreetSearch:
            self._search_leg_done(state, now)
        else:
            self._arrive_point(state, now)

    def _arrive_point(self, state: MobilityState, now: float) -> None:
        act = state.activity
        if act is Activity.Hospital:
            self._arrive_hospital(state, now)
            return
        state.arrived = True
        if act is Activity.Sleep:
            state.log(now, "poi", "home")
        elif act in _POINT_POI_KIND:
            state.log(now, "poi", _POINT_POI_KIND[act])
        elif act is Activity.FoodDistribution:
            state.log(now, "poi", "food_water")
        state.pause_until = state.interrupt_at

    def _arrive_hospital(self, state: MobilityState, now: float, bounces: int = 0) -> None:
        poi = state.hospital_target
        if poi is None:
            state.arrived = True
            state.pause_until = state.interrupt_at
            return
        cap = INF if poi.capacity is None else poi.capacity
        if self.hospital_occupancy.get(poi.name, 0) < cap:
            self.hospital_occupancy[poi.name] = self.hospital_occupancy.get(poi.name, 0) + 1
            state.hospital_slot = poi
            state.arrived = True
            state.log(now, "poi", "hospital")
            state.pause_until = state.interrupt_at
            return
        if len(self.pois["hospital"]) == 1 or bounces >= len(self.pois["hospital"]):
            # nowhere (new) to try; wait outside until the block ends
            state.arrived = True
            state.log(now, "poi", "hospital")
            state.pause_until = state.interrupt_at
            return
        next_poi, _ = injured_hospital_target(
            self._current_gp(state),
            self.pois["hospital"],
            self.hospital_occupancy,
            self.graph,
            exclude=poi,
        )
        state.hospital_target = next_poi
        if self._walk_to(state, next_poi.position, now):
            self._arrive_hospital(state, now, bounces + 1)

    # -- street search -------------------------------------------------------

    def _plan_search(self, state: MobilityState, now: float) -> None:
        if state.search_assignment is None:
            eid = self.cursor.next_edge(self.usrt_rng)
            if eid is None:
                # whole map searched: idle at the base camp
                if self._walk_to(state, self._poi("base_camp").position, now):
                    state.pause_until = state.interrupt_at
                return
            near = self._nearer_edge_end(state, eid)
            state.search_assignment = (eid, "approach")
            if self._walk_to(state, near, now):
                self._search_leg_done(state, now)
            return
        eid, stage = state.search_assignment
        if stage == "approach":
            near = self._nearer_edge_end(state, eid)
            if self._walk_to(state, near, now):
                self._search_leg_done(state, now)
        else:
            self._begin_traverse(state, eid, now)

    def _nearer_edge_end(self, state: MobilityState, eid: int) -> GraphPosition:
        length = self.graph.edges[eid].length
        current = self._current_gp(state)
        d0 = self.graph.path_length(current, GraphPosition(eid, 0.0))
        d1 = self.graph.path_length(current, GraphPosition(eid, length))
        return GraphPosition(eid, 0.0) if d0 <= d1 else GraphPosition(eid, length)

    def _begin_traverse(self, state: MobilityState, eid: int, now: float) -> None:
        length = self.graph.edges[eid].length
        here = self._current_gp(state)
        far = GraphPosition(eid, length if (here.edge != eid or here.offset <= length / 2) else 0.0)
        if self._walk_to(state, far, now, searching=True):
            self._search_leg_done(state, now)

    def _search_leg_done(self, state: MobilityState, now: float) -> None:
        if state.search_assignment is None:
            state.pause_until = state.interrupt_at
            return
        eid, stage = state.search_assignment
        if stage == "approach":
            state.search_assignment = (eid, "traverse")
            self._begin_traverse(state, eid, now)
        else:
            state.search_assignment = None
            state.pause_until = now

    # -- arrival pipeline ------------------------------------------------------

    def _plan_pipeline(self, state: MobilityState, now: float) -> None:
        state.interrupt_at = INF
        if state.pipeline_dwelling:
            state.pipeline_stage += 1
            state.pipeline_dwelling = False
        if state.pipeline_stage >= len(state.pipeline):
            state.pipeline = None
            self.plan(state, now)
            return
        kind, _ = state.pipeline[state.pipeline_stage]
        if self._walk_to(state, self._poi(kind).position, now):
            self._pipeline_arrive(state, now)

    def _pipeline_arrive(self, state: MobilityState, now: float) -> None:
        kind, dwell = state.pipeline[state.pipeline_stage]
        if kind != "airport_rdc":  # airport visit already logged at activation
            state.log(now, "poi", kind)
        state.pipeline_dwelling = True
        state.pause_until = now + dwell
