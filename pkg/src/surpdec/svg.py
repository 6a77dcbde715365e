"""Small deterministic SVG charts, no plotting dependencies.

Two chart kinds: the depth / expected-distortion frontier of a single
candidate set (depth on x, distortion on y), and grouped bars of the
per-condition component effects.  Output is plain SVG text with fixed
two-decimal coordinates so identical inputs give identical bytes.
"""

from __future__ import annotations

from typing import Sequence

from surpdec.experiment import ConditionSummary
from surpdec.types import FrontierPoint

WIDTH = 640.0
HEIGHT = 400.0
MARGIN = 60.0
SHALLOW_COLOR = "#4477aa"
DEEP_COLOR = "#ee6677"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _scale(value, lo, hi, out_lo, out_hi):
    if hi == lo:
        return (out_lo + out_hi) / 2.0
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def _header(title: str) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
        f'<rect width="{WIDTH:g}" height="{HEIGHT:g}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:g}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    return parts


def _axes(x_label: str, y_label: str) -> list[str]:
    x0, y0 = MARGIN, HEIGHT - MARGIN
    x1, y1 = WIDTH - MARGIN, MARGIN
    return [
        f'<line x1="{x0:g}" y1="{y0:g}" x2="{x1:g}" y2="{y0:g}" stroke="black"/>',
        f'<line x1="{x0:g}" y1="{y0:g}" x2="{x0:g}" y2="{y1:g}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:g}" y="{HEIGHT - 16:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>',
        f'<text x="18" y="{(y0 + y1) / 2:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:g})">{y_label}</text>',
    ]


def frontier_svg(points: Sequence[FrontierPoint], title: str = "") -> str:
    """Polyline of expected distortion against achieved depth."""
    if not points:
        raise ValueError("no frontier points to plot")
    xs = [p.depth for p in points]
    ys = [p.expected_distortion for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    parts = _header(title)
    parts += _axes("depth (nats)", "expected distortion")
    coords = []
    for x, y in zip(xs, ys):
        px = _scale(x, x_lo, x_hi, MARGIN, WIDTH - MARGIN)
        py = _scale(y, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
        coords.append(f"{_fmt(px)},{_fmt(py)}")
    parts.append(
        f'<polyline points="{" ".join(coords)}" fill="none" '
        f'stroke="{SHALLOW_COLOR}" stroke-width="2"/>'
    )
    for c in coords:
        px, py = c.split(",")
        parts.append(f'<circle cx="{px}" cy="{py}" r="3" fill="{SHALLOW_COLOR}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def effects_svg(summaries: Sequence[ConditionSummary], title: str = "") -> str:
    """Grouped bars of the two component effects per condition."""
    if not summaries:
        raise ValueError("no summaries to plot")
    values = []
    for s in summaries:
        values += [s.effect_n400, s.effect_p600]
    lo, hi = min(0.0, min(values)), max(0.0, max(values))
    baseline = _scale(0.0, lo, hi, HEIGHT - MARGIN, MARGIN)
    parts = _header(title)
    parts += _axes("condition", "effect vs control (nats)")
    n = len(summaries)
    span = (WIDTH - 2 * MARGIN) / n
    bar = span / 3.0
    for i, s in enumerate(summaries):
        x0 = MARGIN + i * span
        for j, (value, color) in enumerate(
            ((s.effect_n400, SHALLOW_COLOR), (s.effect_p600, DEEP_COLOR))
        ):
            top = _scale(value, lo, hi, HEIGHT - MARGIN, MARGIN)
            y = min(top, baseline)
            height = abs(top - baseline)
            parts.append(
                f'<rect x="{_fmt(x0 + bar / 2 + j * bar)}" y="{_fmt(y)}" '
                f'width="{_fmt(bar)}" height="{_fmt(height)}" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{_fmt(x0 + span / 2)}" y="{HEIGHT - MARGIN + 18:g}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{s.condition}</text>"
        )
    parts.append(
        f'<rect x="{WIDTH - MARGIN - 150:g}" y="{MARGIN:g}" width="12" height="12" '
        f'fill="{SHALLOW_COLOR}"/>'
        f'<text x="{WIDTH - MARGIN - 132:g}" y="{MARGIN + 11:g}" '
        f'font-family="sans-serif" font-size="12">shallow effect</text>'
    )
    parts.append(
        f'<rect x="{WIDTH - MARGIN - 150:g}" y="{MARGIN + 20:g}" width="12" height="12" '
        f'fill="{DEEP_COLOR}"/>'
        f'<text x="{WIDTH - MARGIN - 132:g}" y="{MARGIN + 31:g}" '
        f'font-family="sans-serif" font-size="12">deep effect</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
