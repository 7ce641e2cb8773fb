"""Dependency-free SVG figures: a two-class scatter and a confusion heatmap."""
from xml.sax.saxutils import escape

import numpy as np

CLASS_COLORS = ("#1f77b4", "#d62728")


def _fmt(v):
    return f"{v:.2f}"


def scatter_svg(points, labels, title="", axis_labels=("PC1", "PC2"), size=480, margin=48):
    """Scatter of 2-D points, non-fraud in blue and fraud in red."""
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    inner = size - 2 * margin
    xs = margin + (points[:, 0] - lo[0]) / span[0] * inner
    ys = size - margin - (points[:, 1] - lo[1]) / span[1] * inner
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{inner}" height="{inner}" fill="none" stroke="#444"/>',
        f'<text x="{size / 2}" y="{margin / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{size / 2}" y="{size - 12}" text-anchor="middle" font-size="12">{escape(axis_labels[0])}</text>',
        f'<text x="14" y="{size / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {size / 2})">{escape(axis_labels[1])}</text>',
    ]
    for cls in (0, 1):
        out.append(f'<g fill="{CLASS_COLORS[cls]}" fill-opacity="0.6">')
        for x, y in zip(xs[labels == cls], ys[labels == cls]):
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2"/>')
        out.append("</g>")
    for cls, name in ((0, "non-fraud"), (1, "fraud")):
        y = margin + 14 + 16 * cls
        out.append(f'<circle cx="{size - margin - 70}" cy="{y - 4}" r="4" fill="{CLASS_COLORS[cls]}"/>')
        out.append(f'<text x="{size - margin - 60}" y="{y}" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def confusion_svg(tn, fp, fn, tp, title="Confusion matrix", cell=120, margin=70):
    """2x2 heatmap, rows actual (0, 1), columns predicted (0, 1)."""
    grid = np.array([[tn, fp], [fn, tp]], dtype=np.float64)
    peak = grid.max() if grid.max() > 0 else 1.0
    size = 2 * cell + 2 * margin
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<text x="{size / 2}" y="{margin / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{size / 2}" y="{size - 16}" text-anchor="middle" font-size="12">Predicted</text>',
        f'<text x="16" y="{size / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {size / 2})">Actual</text>',
    ]
    for r in range(2):
        for c in range(2):
            shade = int(round(255 * (1.0 - 0.8 * grid[r, c] / peak)))
            x, y = margin + c * cell, margin + r * cell
            text_color = "white" if shade < 128 else "black"
            out.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="#333"/>'
            )
            out.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 + 6}" text-anchor="middle" '
                f'font-size="20" fill="{text_color}">{int(grid[r, c])}</text>'
            )
        out.append(f'<text x="{margin - 10}" y="{margin + r * cell + cell / 2}" text-anchor="end" font-size="12">{r}</text>')
        out.append(f'<text x="{margin + r * cell + cell / 2}" y="{margin - 8}" text-anchor="middle" font-size="12">{r}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
