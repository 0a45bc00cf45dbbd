import xml.etree.ElementTree as ET

import numpy as np

from krausfold.bloch import ConditionRecord, ConditionReport
from krausfold.emit import CSV_HEADER, region_csv, region_svg
from krausfold.sampler import RegionPoint, RegionRequest, sample_region


def make_point(index, m, records):
    return RegionPoint(index, np.asarray(m, dtype=float), ConditionReport(records))


def report_for(margin):
    return (
        ConditionRecord(1, True, margin >= -1e-9, margin),
        ConditionRecord(2, False, True, None),
        ConditionRecord(3, False, True, None),
        ConditionRecord(4, False, True, None),
    )


def test_header_is_frozen():
    assert CSV_HEADER == (
        "sample,m1,m2,m3,m4,m5,m6,m7,m8,"
        "cond1,cond2,cond3,cond4,margin1,margin2,margin3,margin4"
    )


def test_csv_rows_and_cells():
    pts = [
        make_point(0, np.linspace(0.1, 0.8, 8), report_for(0.25)),
        make_point(1, np.zeros(8), report_for(-0.5)),
    ]
    lines = region_csv(pts).splitlines()
    assert lines[0] == CSV_HEADER
    row0 = lines[1].split(",")
    assert row0[0] == "0"
    assert row0[1] == "0.10000000000000001"
    assert row0[9:13] == ["1", "", "", ""]
    assert float(row0[13]) == 0.25
    assert row0[14:] == ["", "", ""]
    row1 = lines[2].split(",")
    assert row1[9] == "0"
    assert float(row1[13]) == -0.5


def test_csv_serializes_17_digits():
    val = 1.0 / 3.0
    pts = [make_point(0, np.full(8, val), report_for(val))]
    row = region_csv(pts).splitlines()[1].split(",")
    assert row[1] == f"{val:.17g}"
    assert float(row[1]) == val


def test_csv_empty_points():
    assert region_csv([]) == CSV_HEADER + "\n"


def section_vector(i, j, v=0.5):
    t = [0.0] * 8
    t[i - 1] = v
    t[j - 1] = v
    return t


def run_section(i, j, kind="sio", n=4):
    points, _ = sample_region(
        RegionRequest(t=tuple(section_vector(i, j)), kind=kind, n_samples=n)
    )
    return points


def test_svg_overlay_shapes():
    shapes = {}
    for (i, j), tag in (((1, 8), "rect"), ((1, 4), "circle"), ((1, 2), "polygon")):
        points = run_section(i, j)
        root = ET.fromstring(region_svg(points, section_vector(i, j)))
        names = [el.tag.split("}")[-1] for el in root]
        shapes[(i, j)] = names
        assert names[0] == "rect"
        assert tag in names[1:]
        assert names.count("circle") >= len(points)
    assert "circle" in shapes[(1, 4)][1:]


def test_svg_is_well_formed_without_section():
    points = run_section(7, 8, n=3)
    text = region_svg(points, [0.0] * 8)
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    assert root.get("viewBox") == "0 0 400 400"
