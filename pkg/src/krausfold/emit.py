"""Text artifact writers for region runs: CSV tables and SVG scatters."""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET

import numpy as np

from .sampler import RegionPoint

__all__ = ["CSV_HEADER", "region_csv", "region_svg"]

CSV_HEADER = (
    "sample,m1,m2,m3,m4,m5,m6,m7,m8,"
    "cond1,cond2,cond3,cond4,margin1,margin2,margin3,margin4"
)


def _num(x: float) -> str:
    return f"{x:.17g}"


def region_csv(points: list[RegionPoint]) -> str:
    """CSV table, one row per sample; inapplicable condition cells empty."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for p in points:
        cells = [str(p.index)]
        cells.extend(_num(v) for v in p.m)
        for cid in (1, 2, 3, 4):
            rec = p.report[cid]
            cells.append("" if not rec.applicable else ("1" if rec.satisfied else "0"))
        for cid in (1, 2, 3, 4):
            rec = p.report[cid]
            cells.append("" if rec.margin is None else _num(rec.margin))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def _svg_coords(x: float, y: float, scale: float, size: int = 400):
    half = size / 2
    return half + x / scale * (half - 20), half - y / scale * (half - 20)


def region_svg(points: list[RegionPoint], t) -> str:
    """Scatter of the section-plane coordinates with the bound overlay.

    The overlay matches the applicable condition: a box for condition 1,
    a disk for condition 3, a diamond for condition 4; sections without
    a single applicable bound get a bare scatter of (m1, m2).
    """
    t = np.asarray(t, dtype=float)
    nz = [i for i in range(8) if abs(t[i]) > 1e-12]
    if len(nz) == 2:
        ix, iy = nz
    else:
        ix, iy = 0, 1
    size = 400
    values = [abs(t[ix]), abs(t[iy])]
    values.extend(abs(p.m[ix]) for p in points)
    values.extend(abs(p.m[iy]) for p in points)
    scale = max(max(values, default=1.0), 1e-6) * 1.15
    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(size),
        height=str(size),
        viewBox=f"0 0 {size} {size}",
    )
    ET.SubElement(svg, "rect", x="0", y="0", width=str(size), height=str(size), fill="white")
    style = {"fill": "none", "stroke": "#444", "stroke-width": "1"}
    if len(nz) == 2 and nz[0] <= 5 and nz[1] in (6, 7):
        bound = abs(t[ix])
        x0, y0 = _svg_coords(-bound, scale, scale)
        x1, y1 = _svg_coords(bound, -scale, scale)
        ET.SubElement(
            svg, "rect", x=_num(x0), y=_num(y0),
            width=_num(x1 - x0), height=_num(y1 - y0), **style,
        )
    elif tuple(nz) in ((0, 3), (1, 4), (2, 5)):
        radius = float(np.hypot(t[ix], t[iy]))
        cx, cy = _svg_coords(0.0, 0.0, scale)
        ET.SubElement(
            svg, "circle", cx=_num(cx), cy=_num(cy),
            r=_num(radius / scale * (size / 2 - 20)), **style,
        )
    elif len(nz) == 2 and nz[0] <= 5 and nz[1] <= 5:
        reach = abs(t[ix]) + abs(t[iy])
        corners = [(reach, 0.0), (0.0, reach), (-reach, 0.0), (0.0, -reach)]
        pts = " ".join(
            f"{_num(px)},{_num(py)}"
            for px, py in (_svg_coords(cx, cy, scale) for cx, cy in corners)
        )
        ET.SubElement(svg, "polygon", points=pts, **style)
    for p in points:
        cx, cy = _svg_coords(float(p.m[ix]), float(p.m[iy]), scale)
        ET.SubElement(
            svg, "circle", cx=_num(cx), cy=_num(cy), r="2",
            fill="#1f6fb2", **{"fill-opacity": "0.5"},
        )
    return ET.tostring(svg, encoding="unicode")
