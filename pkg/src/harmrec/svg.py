"""Self-contained SVG heatmaps with optional contour overlay.

Fixed 512x512 viewport.  Values map linearly onto a three-anchor color ramp
(low -> #313695, mid -> #ffffbf, high -> #a50026); the data range used for
the mapping is printed in the image metadata.  The y axis points up (grid
row 0 is drawn at the bottom).
"""

from __future__ import annotations

from pathlib import Path


from .measure import LevelContour
from .poisson import ScalarField

VIEW = 512

_ANCHORS = [(0x31, 0x36, 0x95), (0xFF, 0xFF, 0xBF), (0xA5, 0x00, 0x26)]


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    if t <= 0.5:
        lo, hi, s = _ANCHORS[0], _ANCHORS[1], t * 2.0
    else:
        lo, hi, s = _ANCHORS[1], _ANCHORS[2], (t - 0.5) * 2.0
    rgb = [round(a + (b - a) * s) for a, b in zip(lo, hi)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_heatmap(fld: ScalarField, path, contours: LevelContour | None = None,
                   title: str = "") -> None:
    g = fld.grid
    v = fld.values
    vmin, vmax = float(v.min()), float(v.max())
    span = vmax - vmin
    cw = VIEW / g.nx
    ch = VIEW / g.ny

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" height="{VIEW}" '
        f'viewBox="0 0 {VIEW} {VIEW}">',
        f"<title>{title} [range {vmin:.6g} .. {vmax:.6g}]</title>",
    ]
    for j in range(g.ny):
        y_pix = VIEW - (j + 1) * ch
        for i in range(g.nx):
            t = 0.5 if span == 0 else (v[j, i] - vmin) / span
            out.append(
                f'<rect x="{i * cw:.2f}" y="{y_pix:.2f}" '
                f'width="{cw + 0.5:.2f}" height="{ch + 0.5:.2f}" fill="{_color(t)}"/>'
            )
    if contours is not None:
        for line in contours.polylines:
            pts = []
            for x, y in line:
                px = ((x - g.rect.x0) / g.h + 0.5) * cw
                py = VIEW - ((y - g.rect.y0) / g.h + 0.5) * ch
                pts.append(f"{px:.2f},{py:.2f}")
            out.append(
                f'<polyline points="{" ".join(pts)}" fill="none" '
                f'stroke="black" stroke-width="1.5"/>'
            )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
