"""SVG rendering of the image of a polar grid under a mapping."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

VIEW = 1000.0
MARGIN = 20.0


def grid_curves(mapping, r_test: float = 0.995, n_circles: int = 12, n_rays: int = 24,
                samples: int = 720):
    """Image polylines of the circles ``r = k/n_circles`` (k = 1..n-1), of
    ``n_rays`` radii from 0 to ``r_test`` and of the circle ``r_test``.

    Returns ``(circles, rays, boundary)`` as lists of complex arrays.
    """
    t = 2 * np.pi * np.arange(samples + 1) / samples
    unit = np.exp(1j * t)
    circles = [k / n_circles * unit for k in range(1, n_circles)]
    s = np.linspace(0.0, r_test, samples // 2)
    rays = [s * np.exp(2j * np.pi * k / n_rays) for k in range(n_rays)]
    pts = np.concatenate(circles + rays + [r_test * unit])
    img = np.asarray(mapping(pts), dtype=complex)
    out, pos = [], 0
    for c in circles + rays + [r_test * unit]:
        out.append(img[pos:pos + c.size])
        pos += c.size
    nc = len(circles)
    return out[:nc], out[nc:nc + len(rays)], out[-1]


def _polyline(w, a, b, cx, cy, stroke, width):
    ok = np.isfinite(w)
    x = (w.real - cx) * a + b
    y = VIEW - ((w.imag - cy) * a + b)
    pts = " ".join(f"{xi:.3f},{yi:.3f}" for xi, yi, k in zip(x, y, ok) if k)
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="{width}" points="{pts}"/>'


def render_svg(mapping, title: str = "", r_test: float = 0.995) -> str:
    """SVG 1.1 document with absolute coordinates in a 1000x1000 view box,
    scaled to the bounding box of the image curves."""
    circles, rays, boundary = grid_curves(mapping, r_test)
    allpts = np.concatenate(circles + rays + [boundary])
    allpts = allpts[np.isfinite(allpts)]
    xmin, xmax = allpts.real.min(), allpts.real.max()
    ymin, ymax = allpts.imag.min(), allpts.imag.max()
    span = max(xmax - xmin, ymax - ymin, 1e-12)
    a = (VIEW - 2 * MARGIN) / span
    # center the shorter side
    cx = xmin - (span - (xmax - xmin)) / 2
    cy = ymin - (span - (ymax - ymin)) / 2
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{VIEW:.0f}" height="{VIEW:.0f}" viewBox="0 0 {VIEW:.0f} {VIEW:.0f}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{VIEW:.0f}" height="{VIEW:.0f}" fill="white"/>',
        '<g id="circles">',
    ]
    lines += [_polyline(c, a, MARGIN, cx, cy, "#1f4e9a", 1) for c in circles]
    lines += ["</g>", '<g id="rays">']
    lines += [_polyline(r, a, MARGIN, cx, cy, "#a3341f", 1) for r in rays]
    lines += ["</g>", '<g id="boundary">', _polyline(boundary, a, MARGIN, cx, cy, "black", 2), "</g>",
              "</svg>"]
    return "\n".join(lines) + "\n"
