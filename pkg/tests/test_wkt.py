import math
import random

import pytest

from natdis.wkt import Point2D, WktLine, WktParseError, WktPoint, emit_wkt, parse_wkt


def test_linestring_3_4_5():
    geoms = parse_wkt("LINESTRING (0 0, 3 4)")
    assert geoms == [WktLine((Point2D(0, 0), Point2D(3, 4)))]
    (line,) = geoms
    assert math.dist(line.points[0], line.points[1]) == 5.0


def test_point_direct_read():
    geoms = parse_wkt("POINT (10 20)")
    assert geoms == [WktPoint(Point2D(10, 20))]


def test_multilinestring_flattens_in_order():
    geoms = parse_wkt("MULTILINESTRING ((0 0, 1 0), (2 2, 3 3, 4 4))")
    assert geoms == [
        WktLine((Point2D(0, 0), Point2D(1, 0))),
        WktLine((Point2D(2, 2), Point2D(3, 3), Point2D(4, 4))),
    ]


def test_comments_and_blank_lines_skipped():
    text = "# header\n\nPOINT (1 2)\n   # trailing comment\n"
    assert parse_wkt(text) == [WktPoint(Point2D(1, 2))]


def test_record_order_preserved():
    text = "POINT (1 1)\nLINESTRING (0 0, 1 1)\nPOINT (2 2)\n"
    geoms = parse_wkt(text)
    assert [type(g) for g in geoms] == [WktPoint, WktLine, WktPoint]


def test_malformed_line_reports_line_number():
    text = "LINESTRING (0 0, 1 1)\nLINESTRING (0 0, banana 1)\nPOINT (5 5)\n"
    with pytest.raises(WktParseError) as err:
        parse_wkt(text)
    assert err.value.line_no == 2
    assert "line 2" in str(err.value)


@pytest.mark.parametrize(
    "bad",
    [
        "LINESTRING (0 0, nan 1)",
        "POINT (inf 0)",
        "LINESTRING (0 0, -inf 2)",
    ],
)
def test_non_finite_coordinates_rejected(bad):
    with pytest.raises(WktParseError):
        parse_wkt(bad)


def test_unsupported_tag_rejected():
    with pytest.raises(WktParseError, match="POLYGON"):
        parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 0))")


def test_single_point_linestring_rejected():
    with pytest.raises(WktParseError, match="at least 2"):
        parse_wkt("LINESTRING (0 0)")


def test_missing_paren_rejected():
    with pytest.raises(WktParseError):
        parse_wkt("POINT (1 2")
    with pytest.raises(WktParseError):
        parse_wkt("POINT 1 2")


def test_round_trip_identity():
    rng = random.Random(7)
    geoms = []
    for _ in range(40):
        if rng.random() < 0.3:
            geoms.append(WktPoint(Point2D(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4))))
        else:
            n = rng.randint(2, 6)
            pts = tuple(
                Point2D(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)) for _ in range(n)
            )
            geoms.append(WktLine(pts))
    assert parse_wkt(emit_wkt(geoms)) == geoms


def test_round_trip_of_parsed_file():
    text = "POINT (1.5 -2.25)\nLINESTRING (0 0, 10 0, 10 10)\nMULTILINESTRING ((0 1, 2 3), (4 5, 6 7))\n"
    first = parse_wkt(text)
    assert parse_wkt(emit_wkt(first)) == first
