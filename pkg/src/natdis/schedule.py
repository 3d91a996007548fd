"""Role and activity definitions plus the daily schedule tables.

Each role has two tables: one for the day of the disaster (day 0) and one for
the rest of the first week (days 1-6). Block boundaries tile [0, 24) and are
shifted per node and day by a random jitter of up to two hours; the outer
0 h and 24 h boundaries stay fixed so the tiling is preserved.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Role(Enum):
    HealthyLocal = "HealthyLocal"
    InjuredLocal = "InjuredLocal"
    DRT = "DRT"
    USRT = "USRT"
    Scientist = "Scientist"
    UnOfficial = "UnOfficial"
    GovOfficial = "GovOfficial"


class Activity(Enum):
    Sleep = "sleep"
    Neighborhood = "neighborhood"
    FoodDistribution = "food"
    Hospital = "hospital"
    AirportRdc = "airport"
    OsoccMeeting = "osocc"
    TownHall = "townhall"
    BaseCamp = "basecamp"
    CityRoaming = "roam"
    StreetSearch = "search"
    Reconnaissance = "recon"
    Parked = "parked"


@dataclass(frozen=True)
class ScheduleBlock:
    start_hour: float
    end_hour: float
    activity: Activity


ScheduleTable = tuple[ScheduleBlock, ...]

# Smallest block width (hours) the jitter clamping preserves.
MIN_BLOCK_HOURS = 0.05

DEFAULT_JITTER_HOURS = 2.0


def _table(*blocks: tuple[float, float, Activity]) -> ScheduleTable:
    return tuple(ScheduleBlock(s, e, a) for s, e, a in blocks)


A = Activity

DAY0_SCHEDULES: dict[Role, ScheduleTable] = {
    Role.HealthyLocal: _table(
        (0, 7, A.Sleep), (7, 16, A.Neighborhood), (16, 20, A.FoodDistribution), (20, 24, A.Neighborhood)
    ),
    Role.InjuredLocal: _table((0, 11, A.Sleep), (11, 20, A.Hospital), (20, 24, A.Neighborhood)),
    Role.DRT: _table(
        (0, 4, A.Parked), (4, 15, A.AirportRdc), (15, 20, A.OsoccMeeting), (20, 24, A.BaseCamp)
    ),
    Role.USRT: _table(
        (0, 4, A.Parked), (4, 15, A.AirportRdc), (15, 20, A.OsoccMeeting), (20, 24, A.BaseCamp)
    ),
    Role.Scientist: _table((0, 7, A.Sleep), (7, 20, A.CityRoaming), (20, 24, A.Neighborhood)),
    Role.UnOfficial: _table((0, 4, A.Parked), (4, 17, A.AirportRdc), (17, 24, A.OsoccMeeting)),
    Role.GovOfficial: _table(
        (0, 7, A.Sleep), (7, 14, A.AirportRdc), (14, 20, A.TownHall), (20, 24, A.Neighborhood)
    ),
}

WEEK_SCHEDULES: dict[Role, ScheduleTable] = {
    Role.HealthyLocal: _table((0, 7, A.Sleep), (7, 21, A.CityRoaming), (21, 24, A.Neighborhood)),
    Role.InjuredLocal: _table((0, 7, A.Sleep), (7, 21, A.Hospital), (21, 24, A.Neighborhood)),
    Role.DRT: _table(
        (0, 7, A.Sleep), (7, 10, A.OsoccMeeting), (10, 21, A.CityRoaming), (21, 24, A.Neighborhood)
    ),
    Role.USRT: _table(
        (0, 7, A.Sleep), (7, 10, A.OsoccMeeting), (10, 21, A.StreetSearch), (21, 24, A.Neighborhood)
    ),
    Role.Scientist: _table((0, 7, A.Sleep), (7, 21, A.CityRoaming), (21, 24, A.Neighborhood)),
    Role.UnOfficial: _table(
        (0, 7, A.Sleep), (7, 10, A.OsoccMeeting), (10, 12, A.TownHall), (12, 21, A.Reconnaissance), (21, 24, A.Sleep)
    ),
    Role.GovOfficial: _table(
        (0, 7, A.Sleep), (7, 10, A.TownHall), (10, 12, A.OsoccMeeting), (12, 21, A.Reconnaissance), (21, 24, A.Sleep)
    ),
}


@dataclass(frozen=True)
class RoleSchedules:
    """Per-role day-0 and day-1-6 tables, overridable from the scenario config."""

    day0: dict[Role, ScheduleTable]
    week: dict[Role, ScheduleTable]

    def table_for(self, role: Role, day: int) -> ScheduleTable:
        return self.day0[role] if day == 0 else self.week[role]


def default_schedules() -> RoleSchedules:
    return RoleSchedules(dict(DAY0_SCHEDULES), dict(WEEK_SCHEDULES))


def validate_table(table: ScheduleTable) -> None:
    """A table must tile [0, 24) contiguously with nonempty blocks."""
    if not table:
        raise ValueError("schedule table is empty")
    if table[0].start_hour != 0.0:
        raise ValueError("schedule must start at hour 0")
    if table[-1].end_hour != 24.0:
        raise ValueError("schedule must end at hour 24")
    for i, block in enumerate(table):
        if not block.start_hour < block.end_hour:
            raise ValueError(f"empty or inverted block at index {i}")
        if i > 0 and table[i - 1].end_hour != block.start_hour:
            raise ValueError(f"gap or overlap before block at index {i}")


def draw_jitter(table: ScheduleTable, rng, max_jitter: float = DEFAULT_JITTER_HOURS) -> list[float]:
    """One uniform [-max_jitter, +max_jitter] draw per interior block boundary."""
    return [rng.uniform(-max_jitter, max_jitter) for _ in range(len(table) - 1)]


def resolve_boundaries(table: ScheduleTable, offsets: list[float] | None) -> list[float]:
    """Apply jitter offsets to interior boundaries, clamped so blocks never invert.

    Returns the full boundary list [0, b1', ..., 24]; every block keeps at
    least MIN_BLOCK_HOURS of width.
    """
    interior = [b.end_hour for b in table[:-1]]
    if offsets is None:
        offsets = [0.0] * len(interior)
    if len(offsets) != len(interior):
        raise ValueError("jitter offset count does not match interior boundary count")
    out = [0.0]
    n = len(interior)
    for k, (base, delta) in enumerate(zip(interior, offsets)):
        lo = out[-1] + MIN_BLOCK_HOURS
        hi = 24.0 - MIN_BLOCK_HOURS * (n - k)
        out.append(min(max(base + delta, lo), hi))
    out.append(24.0)
    return out


def active_block_index(table: ScheduleTable, time_of_day_hours: float, offsets: list[float] | None) -> int:
    bounds = resolve_boundaries(table, offsets)
    tod = time_of_day_hours % 24.0
    for i in range(len(table)):
        if bounds[i] <= tod < bounds[i + 1]:
            return i
    return len(table) - 1


def nd_active_block(
    role: Role,
    day: int,
    time_of_day_hours: float,
    offsets: list[float] | None = None,
    schedules: RoleSchedules | None = None,
) -> Activity:
    """Activity scheduled for a role at the given day and time of day.

    Deterministic given the jitter offsets; day 0 uses the day-of-disaster
    table, later days the day-1-6 table.
    """
    schedules = schedules or default_schedules()
    table = schedules.table_for(role, day)
    return table[active_block_index(table, time_of_day_hours, offsets)].activity


_ACTIVITY_BY_NAME = {a.value: a for a in Activity}


def parse_schedule_spec(spec: str) -> ScheduleTable:
    """Parse a config-file schedule like 'sleep:0-7,roam:7-21,neighborhood:21-24'."""
    blocks = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            name, hours = token.split(":")
            start_s, end_s = hours.split("-")
            activity = _ACTIVITY_BY_NAME[name.strip().lower()]
            blocks.append(ScheduleBlock(float(start_s), float(end_s), activity))
        except (ValueError, KeyError):
            raise ValueError(
                f"bad schedule token {token!r}; expected '<activity>:<start>-<end>'"
            ) from None
    table = tuple(blocks)
    validate_table(table)
    return table
