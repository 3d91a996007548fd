"""Well-Known Text parsing and emission for street map files.

Supported records, one per line: POINT (x y), LINESTRING (x1 y1, x2 y2, ...),
MULTILINESTRING ((...), (...)). Lines starting with '#' are comments.
Coordinates are planar meters; the map file is expected to be pre-projected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class WktParseError(ValueError):
    """Raised for malformed WKT input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class WktPoint:
    point: Point2D


@dataclass(frozen=True)
class WktLine:
    points: tuple[Point2D, ...]


WktGeometry = WktPoint | WktLine


def _parse_coord_pair(token: str, line_no: int) -> Point2D:
    parts = token.split()
    if len(parts) != 2:
        raise WktParseError(line_no, f"expected 'x y' coordinate pair, got {token!r}")
    try:
        x, y = float(parts[0]), float(parts[1])
    except ValueError:
        raise WktParseError(line_no, f"bad coordinate in {token!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise WktParseError(line_no, f"non-finite coordinate in {token!r}")
    return Point2D(x, y)


def _parse_coord_list(body: str, line_no: int) -> tuple[Point2D, ...]:
    points = tuple(_parse_coord_pair(tok, line_no) for tok in body.split(","))
    if len(points) < 2:
        raise WktParseError(line_no, "polyline needs at least 2 points")
    return points


def _split_groups(body: str, line_no: int) -> list[str]:
    """Split the '((...), (...))' interior of a MULTILINESTRING into group bodies."""
    groups = []
    depth = 0
    start = None
    for i, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise WktParseError(line_no, "unbalanced parentheses")
            if depth == 0:
                groups.append(body[start:i])
                start = None
        elif depth == 0 and not ch.isspace() and ch != ",":
            raise WktParseError(line_no, f"unexpected character {ch!r}")
    if depth != 0:
        raise WktParseError(line_no, "unbalanced parentheses")
    if not groups:
        raise WktParseError(line_no, "MULTILINESTRING has no line groups")
    return groups


def parse_wkt(text: str) -> list[WktGeometry]:
    """Parse WKT text into a list of geometries, preserving record order.

    MULTILINESTRING records are flattened into one WktLine per group (the
    geometry list round-trips; the multi-grouping does not).
    """
    geometries: list[WktGeometry] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        open_idx = line.find("(")
        if open_idx < 0:
            raise WktParseError(line_no, f"no coordinate list in {line!r}")
        tag = line[:open_idx].strip().upper()
        rest = line[open_idx:].strip()
        if not rest.endswith(")"):
            raise WktParseError(line_no, "record does not end with ')'")
        body = rest[1:-1]
        if tag == "POINT":
            geometries.append(WktPoint(_parse_coord_pair(body, line_no)))
        elif tag == "LINESTRING":
            geometries.append(WktLine(_parse_coord_list(body, line_no)))
        elif tag == "MULTILINESTRING":
            for group in _split_groups(body, line_no):
                geometries.append(WktLine(_parse_coord_list(group, line_no)))
        else:
            raise WktParseError(line_no, f"unsupported geometry tag {tag or line!r}")
    return geometries


def emit_wkt(geometries: list[WktGeometry]) -> str:
    """Render geometries back to WKT text, one record per line."""
    lines = []
    for geom in geometries:
        if isinstance(geom, WktPoint):
            lines.append(f"POINT ({geom.point.x!r} {geom.point.y!r})")
        else:
            coords = ", ".join(f"{p.x!r} {p.y!r}" for p in geom.points)
            lines.append(f"LINESTRING ({coords})")
    return "\n".join(lines) + ("\n" if lines else "")
