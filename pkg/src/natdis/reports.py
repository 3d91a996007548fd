"""Metric accumulators and CSV emission.

Six tables per run: node density grid, per-node encounters, delivery-delay
CDF, buffer occupancy over time, role-pair delivery matrix, and scalar
summary. All files are UTF-8 CSV with '\\n' endings and a mandatory header;
floats are written in shortest round-trip form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

REPORT_FILES = (
    "density.csv",
    "encounters.csv",
    "delay_cdf.csv",
    "buffer.csv",
    "delivery_matrix.csv",
    "summary.csv",
)


def fmt(value) -> str:
    """Render a cell: integers plainly, floats as shortest round-trip decimals."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple]
    id_cols: int  # leading columns that identify a row across seeds

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        lines.extend(",".join(fmt(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


class DensityGrid:
    """Accumulated node observations on a fixed square-cell grid."""

    def __init__(self, bounds: tuple[float, float, float, float], cell_size: float):
        self.minx, self.miny, self.maxx, self.maxy = bounds
        self.cell = cell_size
        self.nx = max(1, math.ceil((self.maxx - self.minx) / cell_size))
        self.ny = max(1, math.ceil((self.maxy - self.miny) / cell_size))
        self.counts = np.zeros((self.nx, self.ny), dtype=np.int64)
        self.samples = 0
        self._warned = False

    def sample(self, x: np.ndarray, y: np.ndarray) -> None:
        """One observation per node; boundary positions go to the higher cell."""
        ix = np.floor((x - self.minx) / self.cell).astype(np.int64)
        iy = np.floor((y - self.miny) / self.cell).astype(np.int64)
        out = (
            (x < self.minx - 1e-9) | (x > self.maxx + 1e-9)
            | (y < self.miny - 1e-9) | (y > self.maxy + 1e-9)
        )
        if out.any() and not self._warned:
            log.warning("%d node positions outside scenario bounds; counted in border cells",
                        int(out.sum()))
            self._warned = True
        np.clip(ix, 0, self.nx - 1, out=ix)
        np.clip(iy, 0, self.ny - 1, out=iy)
        np.add.at(self.counts, (ix, iy), 1)
        self.samples += 1

    def table(self) -> Table:
        rows = []
        if self.samples:
            avg = self.counts / self.samples
            for i in range(self.nx):
                for j in range(self.ny):
                    rows.append((i, j, float(avg[i, j])))
        return Table(("x_cell", "y_cell", "avg_count"), rows, id_cols=2)


def finalize_cdf(
    delays: list[float], created: int, bucket_s: float, max_delay_s: float
) -> Table:
    """Step CDF of delivery delay as a fraction of all created messages."""
    rows: list[tuple] = []
    if created > 0:
        n_buckets = max(1, math.ceil(max_delay_s / bucket_s))
        edges = [k * bucket_s for k in range(n_buckets + 1)]
        sorted_delays = sorted(delays)
        idx = 0
        cum = 0
        for edge in edges:
            while idx < len(sorted_delays) and sorted_delays[idx] <= edge:
                cum += 1
                idx += 1
            rows.append((float(edge), cum / created))
    return Table(("delay_s", "fraction"), rows, id_cols=1)


@dataclass
class ReportSet:
    """All finalized tables of one run, keyed by output file name."""

    seed: int
    tables: dict[str, Table] = field(default_factory=dict)

    def table(self, name: str) -> Table:
        return self.tables[name]


class ReportCollector:
    """Step-time sampling hooks; finalize() turns the state into tables."""

    def __init__(self, config, seed: int, bounds, roles):
        r = config.reports
        self.config = config
        self.seed = seed
        self.roles = roles
        self.density = DensityGrid(bounds, r.density_cell_m) if r.density else None
        dt = config.scenario.step_dt_s
        self.density_every = max(1, round(r.density_interval_s / dt))
        self.buffer_every = max(1, round(r.buffer_interval_s / dt))
        self.buffer_stat = r.buffer_stat
        self.buffer_samples: list[tuple[float, float]] = []
        self.cdf_bucket = r.cdf_bucket_s
        self.hidden_inactive = config.scenario.inactive_policy == "hidden"

    def on_step(self, step_index: int, now: float, world) -> None:
        if self.density is not None and step_index % self.density_every == 0:
            kin = world.kin
            if self.hidden_inactive:
                mask = kin.active
                self.density.sample(kin.x[mask], kin.y[mask])
            else:
                self.density.sample(kin.x, kin.y)
        if self.config.reports.buffer and step_index % self.buffer_every == 0:
            active = np.nonzero(world.kin.active)[0]
            if len(active):
                fractions = [world.net.buffers[int(i)].occupancy for i in active]
                value = (
                    float(np.median(fractions))
                    if self.buffer_stat == "median"
                    else float(np.mean(fractions))
                )
            else:
                value = 0.0
            self.buffer_samples.append((now, value))

    def finalize(self, world) -> ReportSet:
        out = ReportSet(self.seed)
        cfg = self.config.reports
        if self.density is not None:
            out.tables["density.csv"] = self.density.table()
        if cfg.encounters:
            rows = [
                (i, self.roles[i].value, int(world.encounters.total[i]), len(world.encounters.unique[i]))
                for i in range(len(self.roles))
            ]
            out.tables["encounters.csv"] = Table(("node", "role", "total", "unique"), rows, 2)
        records = sorted(world.net.records.values(), key=lambda r: r.seq)
        delays = [
            r.delivered_at - r.message.created_at for r in records if r.delivered_at is not None
        ]
        created = len(records)
        delivered = len(delays)
        if cfg.delay_cdf:
            out.tables["delay_cdf.csv"] = finalize_cdf(
                delays, created, self.cdf_bucket, self.config.traffic.ttl_s
            )
        if cfg.buffer:
            out.tables["buffer.csv"] = Table(
                ("time_s", "mean_fraction"),
                [(t, v) for t, v in self.buffer_samples],
                id_cols=1,
            )
        if cfg.delivery_matrix:
            out.tables["delivery_matrix.csv"] = self._delivery_matrix(records)
        total_encounters = int(world.encounters.total.sum()) // 2
        mean_delay = float(np.mean(delays)) if delays else 0.0
        mean_buffer = (
            float(np.mean([v for _, v in self.buffer_samples])) if self.buffer_samples else 0.0
        )
        summary_rows = [
            ("nodes", len(self.roles)),
            ("sim_duration_s", float(self.config.scenario.duration_s)),
            ("messages_created", created),
            ("messages_delivered", delivered),
            ("delivery_rate", delivered / created if created else 0.0),
            ("mean_delay_s", mean_delay),
            ("total_encounters", total_encounters),
            ("mean_buffer_fraction", mean_buffer),
        ]
        out.tables["summary.csv"] = Table(("metric", "value"), summary_rows, 1)
        return out

    def _delivery_matrix(self, records) -> Table:
        from .mobility import ROLE_ORDER

        created: dict[tuple[str, str], int] = {}
        delivered: dict[tuple[str, str], int] = {}
        for rec in records:
            key = (self.roles[rec.message.source].value, self.roles[rec.message.destination].value)
            created[key] = created.get(key, 0) + 1
            if rec.delivered_at is not None:
                delivered[key] = delivered.get(key, 0) + 1
        rows = []
        for src in ROLE_ORDER:
            for dst in ROLE_ORDER:
                key = (src.value, dst.value)
                c = created.get(key, 0)
                d = delivered.get(key, 0)
                rows.append((key[0], key[1], c, d, d / c if c else 0.0))
        return Table(("src_role", "dst_role", "created", "delivered", "rate"), rows, 2)


def emit_reports(report_set: ReportSet, out_dir: str | Path) -> list[Path]:
    """Write every table of a run to CSV files under out_dir."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"cannot create report directory {out_dir}: {err}") from err
    written = []
    for name in REPORT_FILES:
        if name not in report_set.tables:
            continue
        path = out_dir / name
        path.write_text(report_set.tables[name].to_csv(), encoding="utf-8", newline="")
        written.append(path)
    return written


def aggregate_reports(report_sets: list[ReportSet]) -> ReportSet:
    """Mean and sample standard deviation per numeric cell across seeds.

    Rows are matched by their identity columns; every seed must produce the
    same row set (guaranteed for runs of one config).
    """
    if not report_sets:
        raise ValueError("no report sets to aggregate")
    out = ReportSet(seed=-1)
    for name in report_sets[0].tables:
        tables = [rs.tables[name] for rs in report_sets]
        base = tables[0]
        ids = [row[: base.id_cols] for row in base.rows]
        for t in tables[1:]:
            if [row[: t.id_cols] for row in t.rows] != ids:
                raise ValueError(f"{name}: row identities differ between seeds")
        value_cols = base.header[base.id_cols :]
        header = list(base.header[: base.id_cols])
        for col in value_cols:
            header.extend((f"{col}_mean", f"{col}_std"))
        rows = []
        for r_idx, id_vals in enumerate(ids):
            row = list(id_vals)
            for c_idx in range(len(value_cols)):
                samples = [t.rows[r_idx][base.id_cols + c_idx] for t in tables]
                mean = float(np.mean(samples))
                std = float(np.std(samples, ddof=1)) if len(samples) > 1 else 0.0
                row.extend((mean, std))
            rows.append(tuple(row))
        out.tables[name] = Table(tuple(header), rows, base.id_cols)
    return out
