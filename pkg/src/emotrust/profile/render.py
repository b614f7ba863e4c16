"""
Radar Rendering
===============

Standalone SVG radar charts of radial scores. Axis k sits at
90 + k * 360/n degrees (counter-clockwise from the x axis, first axis
pointing up), grid rings at 0.25/0.5/0.75/1.0, one closed polygon per model
and a legend. Coordinates are printed with fixed decimals so identical
inputs give identical bytes.
"""

import math
from typing import List, Optional, Sequence, Tuple

from jinja2 import Environment, select_autoescape
from pydantic import BaseModel, ConfigDict, Field

from emotrust.core.exceptions import ProfileError
from emotrust.core.types import AXES, Axis
from emotrust.profile.builder import NormalizedProfile

RINGS = (0.25, 0.5, 0.75, 1.0)

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

RADAR_TEMPLATE = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}" font-family="{{ style.font_family }}" font-size="{{ style.font_size }}">
  <rect x="0" y="0" width="{{ width }}" height="{{ height }}" fill="{{ style.background }}"/>
{% if title %}
  <text x="{{ center }}" y="{{ style.font_size * 2 }}" text-anchor="middle" font-weight="bold">{{ title }}</text>
{% endif %}
  <g class="grid" fill="none" stroke="{{ style.grid_color }}" stroke-width="1">
{% for ring in rings %}
    <polygon points="{{ ring }}"/>
{% endfor %}
{% for spoke in spokes %}
    <line x1="{{ center }}" y1="{{ center }}" x2="{{ spoke[0] }}" y2="{{ spoke[1] }}"/>
{% endfor %}
  </g>
  <g class="axis-labels" fill="{{ style.text_color }}">
{% for label in labels %}
    <text x="{{ label.x }}" y="{{ label.y }}" text-anchor="{{ label.anchor }}">{{ label.text }}</text>
{% endfor %}
  </g>
  <g class="profiles" stroke-width="{{ style.stroke_width }}">
{% for s in series %}
    <polygon points="{{ s.points }}" fill="{{ s.color }}" fill-opacity="{{ style.fill_opacity }}" stroke="{{ s.color }}"/>
{% endfor %}
  </g>
  <g class="legend" fill="{{ style.text_color }}">
{% for s in series %}
    <rect x="{{ legend_x }}" y="{{ s.legend_y }}" width="12" height="12" fill="{{ s.color }}"/>
    <text x="{{ legend_x + 18 }}" y="{{ s.legend_y + 10 }}">{{ s.name }}</text>
{% endfor %}
  </g>
</svg>
"""

_env = Environment(
    autoescape=select_autoescape(["svg", "xml"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


class RadarStyle(BaseModel):
    """Visual options of a radar chart."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    size: int = Field(default=480, ge=160, description="Chart square side in pixels")
    legend_width: int = Field(default=200, ge=0)
    decimals: int = Field(default=2, ge=0, le=6)
    font_family: str = "sans-serif"
    font_size: int = Field(default=12, ge=6)
    stroke_width: float = Field(default=1.5, gt=0)
    fill_opacity: float = Field(default=0.15, ge=0, le=1)
    background: str = "#ffffff"
    grid_color: str = "#cccccc"
    text_color: str = "#222222"
    palette: Tuple[str, ...] = PALETTE
    title: Optional[str] = None


def _fmt(value: float, decimals: int) -> str:
    text = f"{value:.{decimals}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def _points(
    center: float, radius: float, values: Sequence[float], decimals: int
) -> List[Tuple[str, str]]:
    n = len(values)
    out = []
    for k, v in enumerate(values):
        angle = math.radians(90.0 + k * 360.0 / n)
        out.append(
            (
                _fmt(center + radius * v * math.cos(angle), decimals),
                _fmt(center - radius * v * math.sin(angle), decimals),
            )
        )
    return out


def render_radar(
    axis_labels: Sequence[str],
    series: Sequence[Tuple[str, Sequence[float]]],
    style: Optional[RadarStyle] = None,
) -> bytes:
    """
    Render named score vectors over 3 to 8 axes.

    Args:
        axis_labels: Axis names in drawing order
        series: (model name, scores in [0, 1] per axis)
        style: Visual options

    Returns:
        UTF-8 SVG document
    """
    style = style or RadarStyle()
    n = len(axis_labels)
    if not 3 <= n <= 8:
        raise ProfileError(f"Radar charts need 3 to 8 axes, got {n}")
    if not series:
        raise ProfileError("Radar chart needs at least one profile")
    for name, values in series:
        if len(values) != n:
            raise ProfileError(f"'{name}' has {len(values)} scores for {n} axes", source=name)
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ProfileError(f"'{name}' has radial scores outside [0, 1]", source=name)

    d = style.decimals
    center = style.size / 2.0
    radius = style.size / 2.0 - 4.0 * style.font_size
    ring_polys = [
        " ".join(f"{x},{y}" for x, y in _points(center, radius, [r] * n, d)) for r in RINGS
    ]
    spokes = _points(center, radius, [1.0] * n, d)

    labels = []
    for k, label in enumerate(axis_labels):
        angle = math.radians(90.0 + k * 360.0 / n)
        dx = math.cos(angle)
        anchor = "start" if dx > 0.1 else "end" if dx < -0.1 else "middle"
        x, y = _points(center, radius * 1.08, [1.0 if i == k else 0.0 for i in range(n)], d)[k]
        if -0.1 <= dx <= 0.1 and math.sin(angle) < 0:
            y = _fmt(float(y) + style.font_size, d)
        labels.append({"x": x, "y": y, "anchor": anchor, "text": label})

    drawn = []
    for i, (name, values) in enumerate(series):
        drawn.append(
            {
                "name": name,
                "color": style.palette[i % len(style.palette)],
                "points": " ".join(f"{x},{y}" for x, y in _points(center, radius, values, d)),
                "legend_y": int(style.font_size * 2 + i * 20),
            }
        )

    svg = _env.from_string(RADAR_TEMPLATE).render(
        width=style.size + style.legend_width,
        height=style.size,
        center=_fmt(center, d),
        style=style,
        title=style.title,
        rings=ring_polys,
        spokes=spokes,
        labels=labels,
        series=drawn,
        legend_x=style.size + 10,
    )
    return svg.encode("utf-8")


def emit_radar_svg(
    normalized: Sequence[NormalizedProfile],
    axes: Sequence[Axis] = AXES,
    style: Optional[RadarStyle] = None,
) -> bytes:
    """Radar chart of normalized trust profiles over ``axes``."""
    return render_radar(
        [Axis(a).value for a in axes],
        [(p.model_name, [p.score(a) for a in axes]) for p in normalized],
        style,
    )
