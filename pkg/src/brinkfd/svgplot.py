"""Minimal self-contained log-log line charts in SVG."""
import math
from xml.sax.saxutils import escape

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def _decades(lo, hi):
    return list(range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1))


def loglog_chart(series, title, xlabel, ylabel, width=560, height=420):
    """Render ``{label: [(x, y), ...]}`` as an SVG document string.

    Non-positive or non-finite points are dropped; each series becomes one
    ``<polyline>``.
    """
    clean = {}
    for label, pts in series.items():
        pts = [(x, y) for x, y in pts if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
        clean[label] = sorted(pts)
    xs = [x for pts in clean.values() for x, _ in pts] or [1.0]
    ys = [y for pts in clean.values() for _, y in pts] or [1.0]
    xd = _decades(min(xs), max(xs))
    yd = _decades(min(ys), max(ys))
    if len(xd) < 2:
        xd = [xd[0], xd[0] + 1]
    if len(yd) < 2:
        yd = [yd[0], yd[0] + 1]
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (math.log10(x) - xd[0]) / (xd[-1] - xd[0]) * pw

    def sy(y):
        return top + ph - (math.log10(y) - yd[0]) / (yd[-1] - yd[0]) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in xd:
        x = sx(10.0**d)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11">1e{d}</text>')
    for d in yd:
        y = sy(10.0**d)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end" font-size="11">1e{d}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, pts) in enumerate(clean.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}">'
                   f'<title>{escape(str(label))}</title></polyline>')
        ly = top + 16 + 16 * i
        out.append(f'<line x1="{left + pw - 90}" y1="{ly}" x2="{left + pw - 70}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 64}" y="{ly + 4}" font-size="11">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
