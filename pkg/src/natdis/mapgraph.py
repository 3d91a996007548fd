"""Snapped street graph built from WKT polylines, with POIs and path queries.

The graph is immutable after construction and safe to share across
concurrently executing simulation runs.
"""
from __future__ import annotations

import heapq
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .wkt import Point2D, WktGeometry, WktLine, parse_wkt

POI_KINDS = (
    "airport_rdc",
    "osocc",
    "town_hall",
    "base_camp",
    "hospital",
    "food_water",
    "un_hotel",
    "home_anchor",
)

# POI kinds that must be present before the disaster mobility model can run.
ND_REQUIRED_KINDS = ("airport_rdc", "osocc", "base_camp", "hospital", "food_water", "town_hall")

DEFAULT_SNAP_TOLERANCE = 0.5


class MapError(ValueError):
    pass


class GraphPosition(NamedTuple):
    edge: int
    offset: float


class Edge(NamedTuple):
    a: int
    b: int
    length: float


@dataclass(frozen=True)
class Poi:
    name: str
    kind: str
    position: GraphPosition
    point: Point2D
    capacity: int | None = None


class MapGraph:
    """Undirected street graph: vertices are snapped points, edges carry length.

    Edge endpoints are stored with a < b; GraphPosition offsets are measured
    from endpoint a.
    """

    def __init__(self, vertices: list[Point2D], edge_pairs: Iterable[tuple[int, int]]):
        self.vertices: list[Point2D] = list(vertices)
        edges: list[Edge] = []
        seen: set[tuple[int, int]] = set()
        for a, b in edge_pairs:
            if a == b:
                continue
            if a > b:
                a, b = b, a
            if (a, b) in seen:
                continue
            seen.add((a, b))
            pa, pb = self.vertices[a], self.vertices[b]
            edges.append(Edge(a, b, math.dist(pa, pb)))
        self.edges: list[Edge] = edges
        self.adjacency: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for eid, (a, b, _) in enumerate(self.edges):
            self.adjacency[a].append((eid, b))
            self.adjacency[b].append((eid, a))
        self._cum_lengths = []
        total = 0.0
        for e in self.edges:
            total += e.length
            self._cum_lengths.append(total)
        self.total_length = total
        # flat arrays for vectorized snapping / distance-to-edge queries
        if self.edges:
            ax = np.array([self.vertices[e.a].x for e in self.edges])
            ay = np.array([self.vertices[e.a].y for e in self.edges])
            bx = np.array([self.vertices[e.b].x for e in self.edges])
            by = np.array([self.vertices[e.b].y for e in self.edges])
            self._ea = np.stack([ax, ay], axis=1)
            self._ev = np.stack([bx - ax, by - ay], axis=1)
            self._elen = np.array([e.length for e in self.edges])
        else:
            self._ea = np.zeros((0, 2))
            self._ev = np.zeros((0, 2))
            self._elen = np.zeros(0)

    # -- basic queries ---------------------------------------------------

    def bbox(self) -> tuple[float, float, float, float]:
        if not self.vertices:
            raise MapError("empty graph has no bounding box")
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def edge_length(self, eid: int) -> float:
        return self.edges[eid].length

    def point_at(self, pos: GraphPosition) -> Point2D:
        e = self.edges[pos.edge]
        if e.length == 0.0:
            return self.vertices[e.a]
        t = pos.offset / e.length
        pa, pb = self.vertices[e.a], self.vertices[e.b]
        return Point2D(pa.x + (pb.x - pa.x) * t, pa.y + (pb.y - pa.y) * t)

    def vertex_position(self, vid: int) -> GraphPosition:
        """Graph position of a vertex, expressed on its lowest-id incident edge."""
        if not self.adjacency[vid]:
            raise MapError(f"vertex {vid} has no incident edges")
        eid = min(e for e, _ in self.adjacency[vid])
        e = self.edges[eid]
        return GraphPosition(eid, 0.0 if e.a == vid else e.length)

    def uniform_position(self, rng) -> GraphPosition:
        """Uniform-by-length random position over all edges."""
        if not self.edges:
            raise MapError("cannot sample a position on an edgeless graph")
        r = rng.random() * self.total_length
        i = bisect_right(self._cum_lengths, r)
        i = min(i, len(self.edges) - 1)
        prev = self._cum_lengths[i - 1] if i > 0 else 0.0
        offset = min(r - prev, self.edges[i].length)
        return GraphPosition(i, offset)

    def distances_to_edges(self, x: float, y: float) -> np.ndarray:
        """Euclidean distance from (x, y) to every edge segment."""
        d = np.array([x, y]) - self._ea
        denom = np.maximum(self._elen**2, 1e-300)
        t = np.clip((d * self._ev).sum(axis=1) / denom, 0.0, 1.0)
        closest = self._ea + t[:, None] * self._ev
        return np.hypot(closest[:, 0] - x, closest[:, 1] - y)

    # -- snapping ---------------------------------------------------------

    def snap_point(self, p: Point2D) -> GraphPosition:
        """Closest graph position to p; ties go to the lowest edge id, then offset."""
        if not self.edges:
            raise MapError("cannot snap onto an edgeless graph")
        d = np.array([p.x, p.y]) - self._ea
        denom = np.maximum(self._elen**2, 1e-300)
        t = np.clip((d * self._ev).sum(axis=1) / denom, 0.0, 1.0)
        closest = self._ea + t[:, None] * self._ev
        dist2 = (closest[:, 0] - p.x) ** 2 + (closest[:, 1] - p.y) ** 2
        best = dist2.min()
        candidates = np.nonzero(dist2 == best)[0]
        eid = int(candidates[0])  # lowest edge id among exact ties
        offset = float(t[eid] * self._elen[eid])
        return GraphPosition(eid, offset)

    # -- shortest paths ----------------------------------------------------

    def shortest_path(
        self, src: GraphPosition, dst: GraphPosition
    ) -> tuple[list[Point2D], float]:
        """Minimum-length route between two on-graph positions.

        Mid-edge positions split their edge virtually; equal-length routes are
        resolved to the lexicographically smallest vertex-id sequence. Returns
        the path polyline (endpoints equal the query positions) and its length.
        """
        dist, seq = self._route(src, dst)
        if dist is None:
            raise MapError("target position is unreachable from source")
        p_src = self.point_at(src)
        p_dst = self.point_at(dst)
        points = [p_src]
        for vid in seq:
            points.append(self.vertices[vid])
        points.append(p_dst)
        dedup = [points[0]]
        for p in points[1:]:
            if p != dedup[-1]:
                dedup.append(p)
        return dedup, dist

    def path_length(self, src: GraphPosition, dst: GraphPosition) -> float | None:
        dist, _ = self._route(src, dst)
        return dist

    def distances_from(self, src: GraphPosition, cutoff: float = math.inf) -> dict[int, float]:
        """Dijkstra distances from an on-graph position to vertices within cutoff."""
        es = self.edges[src.edge]
        dist: dict[int, float] = {}
        heap: list[tuple[float, int]] = []
        for vid, d0 in ((es.a, src.offset), (es.b, es.length - src.offset)):
            if d0 <= cutoff:
                heapq.heappush(heap, (d0, vid))
        while heap:
            d, v = heapq.heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            for eid, w in self.adjacency[v]:
                nd = d + self.edges[eid].length
                if w not in dist and nd <= cutoff:
                    heapq.heappush(heap, (nd, w))
        return dist

    def reachable_portions(
        self, src: GraphPosition, radius: float
    ) -> list[tuple[int, float, float]]:
        """Edge portions within path distance `radius` of src, as (edge, lo, hi).

        Used to sample on-graph points near a fixed anchor. Falls back to the
        anchor's own location when the radius covers nothing else.
        """
        dist = self.distances_from(src, radius)
        covers: dict[int, list[tuple[float, float]]] = {}
        e0 = self.edges[src.edge]
        lo0 = max(0.0, src.offset - radius)
        hi0 = min(e0.length, src.offset + radius)
        if hi0 > lo0:
            covers.setdefault(src.edge, []).append((lo0, hi0))
        for eid, e in enumerate(self.edges):
            da, db = dist.get(e.a), dist.get(e.b)
            if da is not None and radius > da:
                covers.setdefault(eid, []).append((0.0, min(e.length, radius - da)))
            if db is not None and radius > db:
                covers.setdefault(eid, []).append((max(0.0, e.length - (radius - db)), e.length))
        portions: list[tuple[int, float, float]] = []
        for eid in sorted(covers):
            spans = sorted(covers[eid])
            merged = [list(spans[0])]
            for lo, hi in spans[1:]:
                if lo <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], hi)
                else:
                    merged.append([lo, hi])
            for lo, hi in merged:
                if hi > lo:
                    portions.append((eid, lo, hi))
        if not portions:
            portions = [(src.edge, src.offset, src.offset)]
        return portions

    def sample_portion(
        self, portions: list[tuple[int, float, float]], rng
    ) -> GraphPosition:
        """Uniform-by-length sample over precomputed edge portions."""
        total = sum(hi - lo for _, lo, hi in portions)
        if total <= 0.0:
            eid, lo, _ = portions[0]
            return GraphPosition(eid, lo)
        r = rng.random() * total
        acc = 0.0
        for eid, lo, hi in portions:
            width = hi - lo
            if r <= acc + width:
                return GraphPosition(eid, min(lo + (r - acc), hi))
            acc += width
        eid, lo, hi = portions[-1]
        return GraphPosition(eid, hi)

    def _route(
        self, src: GraphPosition, dst: GraphPosition
    ) -> tuple[float | None, tuple[int, ...]]:
        es, ed = self.edges[src.edge], self.edges[dst.edge]
        # heap entries: (distance, vertex id sequence, current vertex; -1 = target)
        heap: list[tuple[float, tuple[int, ...], int]] = []
        if src.edge == dst.edge:
            heapq.heappush(heap, (abs(dst.offset - src.offset), (), -1))
        heapq.heappush(heap, (src.offset, (es.a,), es.a))
        heapq.heappush(heap, (es.length - src.offset, (es.b,), es.b))
        target_cost = {ed.a: dst.offset, ed.b: ed.length - dst.offset}
        settled: set[int] = set()
        while heap:
            d, seq, v = heapq.heappop(heap)
            if v == -1:
                return d, seq
            if v in settled:
                continue
            settled.add(v)
            if v in target_cost:
                heapq.heappush(heap, (d + target_cost[v], seq, -1))
            for eid, w in self.adjacency[v]:
                if w not in settled:
                    heapq.heappush(heap, (d + self.edges[eid].length, seq + (w,), w))
        return None, ()


# -- construction -----------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # keep the smaller index as representative for determinism
            if ri < rj:
                self.parent[rj] = ri
            else:
                self.parent[ri] = rj


def build_graph(
    geometries: list[WktGeometry], snap_tolerance: float = DEFAULT_SNAP_TOLERANCE
) -> MapGraph:
    """Build a street graph from polyline geometries.

    Points within snap_tolerance of each other merge transitively into one
    vertex (placed at the lowest-index member of the merge set); consecutive
    polyline points become edges. Zero-length and duplicate edges are removed.
    Bare POINT records carry no topology and are ignored.
    """
    if snap_tolerance < 0:
        raise MapError("snap_tolerance must be >= 0")
    polylines = [g for g in geometries if isinstance(g, WktLine)]
    if not polylines:
        raise MapError("geometry set contains no polylines")

    points: list[Point2D] = []
    line_point_ids: list[list[int]] = []
    for line in polylines:
        ids = []
        for p in line.points:
            ids.append(len(points))
            points.append(p)
        line_point_ids.append(ids)

    uf = _UnionFind(len(points))
    # spatial hash so the pairwise merge scan stays near-linear
    cell = max(snap_tolerance, 1e-9)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(points):
        key = (math.floor(p.x / cell), math.floor(p.y / cell))
        buckets.setdefault(key, []).append(i)
    tol2 = snap_tolerance * snap_tolerance
    for (cx, cy), members in buckets.items():
        neighborhood = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                neighborhood.extend(buckets.get((cx + dx, cy + dy), ()))
        for i in members:
            pi = points[i]
            for j in neighborhood:
                if j <= i:
                    continue
                pj = points[j]
                if (pi.x - pj.x) ** 2 + (pi.y - pj.y) ** 2 <= tol2:
                    uf.union(i, j)

    root_to_vertex: dict[int, int] = {}
    vertices: list[Point2D] = []
    vertex_of: list[int] = [0] * len(points)
    for i in range(len(points)):
        root = uf.find(i)
        if root not in root_to_vertex:
            root_to_vertex[root] = len(vertices)
            vertices.append(points[root])
        vertex_of[i] = root_to_vertex[root]

    edge_pairs = []
    for ids in line_point_ids:
        for k in range(len(ids) - 1):
            edge_pairs.append((vertex_of[ids[k]], vertex_of[ids[k + 1]]))
    graph = MapGraph(vertices, edge_pairs)
    if not graph.edges:
        raise MapError("all edges collapsed during snapping")
    return graph


def connected_components(graph: MapGraph) -> list[list[int]]:
    """Vertex-id lists per connected component, each sorted ascending."""
    seen = [False] * len(graph.vertices)
    components = []
    for start in range(len(graph.vertices)):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for _, w in graph.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        components.append(sorted(comp))
    return components


def largest_component(graph: MapGraph) -> MapGraph:
    """Subgraph of the component with the most vertices.

    Ties are broken in favor of the component containing the smallest
    vertex id. Vertices are re-indexed in ascending old-id order.
    """
    if not graph.vertices:
        raise MapError("graph is empty")
    components = connected_components(graph)
    best = max(components, key=lambda comp: (len(comp), -comp[0]))
    keep = set(best)
    remap = {old: new for new, old in enumerate(best)}
    vertices = [graph.vertices[old] for old in best]
    edge_pairs = [(remap[e.a], remap[e.b]) for e in graph.edges if e.a in keep and e.b in keep]
    return MapGraph(vertices, edge_pairs)


def load_map(
    text: str,
    snap_tolerance: float = DEFAULT_SNAP_TOLERANCE,
    prune: bool = True,
) -> tuple[MapGraph, int]:
    """Parse WKT text and build the movement graph.

    With prune=True the graph is reduced to its largest connected component
    so every waypoint stays reachable. Returns (graph, dropped_edge_count).
    """
    graph = build_graph(parse_wkt(text), snap_tolerance)
    if not prune:
        return graph, 0
    pruned = largest_component(graph)
    return pruned, len(graph.edges) - len(pruned.edges)


# -- POIs --------------------------------------------------------------------


def load_pois(text: str, graph: MapGraph) -> list[Poi]:
    """Parse a POI file and snap each POI onto the graph.

    Line format: `<kind> <name> <x> <y> [key=value ...]`; '#' starts a comment.
    Recognized attribute: capacity=<int>.
    """
    pois: list[Poi] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise MapError(f"POI line {line_no}: expected '<kind> <name> <x> <y>', got {line!r}")
        kind, name = parts[0], parts[1]
        if kind not in POI_KINDS:
            raise MapError(f"POI line {line_no}: unknown kind {kind!r}")
        try:
            x, y = float(parts[2]), float(parts[3])
        except ValueError:
            raise MapError(f"POI line {line_no}: bad coordinates") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise MapError(f"POI line {line_no}: non-finite coordinates")
        capacity = None
        for attr in parts[4:]:
            if "=" not in attr:
                raise MapError(f"POI line {line_no}: malformed attribute {attr!r}")
            key, value = attr.split("=", 1)
            if key == "capacity":
                try:
                    capacity = int(value)
                except ValueError:
                    raise MapError(f"POI line {line_no}: capacity must be an integer") from None
                if capacity < 0:
                    raise MapError(f"POI line {line_no}: capacity must be >= 0")
            else:
                raise MapError(f"POI line {line_no}: unknown attribute key {key!r}")
        position = graph.snap_point(Point2D(x, y))
        pois.append(Poi(name, kind, position, graph.point_at(position), capacity))
    return pois


def check_required_pois(pois: list[Poi]) -> None:
    """Validate the POI kinds the disaster mobility model depends on."""
    present = {p.kind for p in pois}
    for kind in ND_REQUIRED_KINDS:
        if kind not in present:
            raise MapError(f"missing required POI kind {kind!r} for the nd mobility model")


def pois_by_kind(pois: list[Poi]) -> dict[str, list[Poi]]:
    index: dict[str, list[Poi]] = {}
    for p in pois:
        index.setdefault(p.kind, []).append(p)
    return index
