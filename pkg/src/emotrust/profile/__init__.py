"""Trust profiles: building, normalization, rendering and recommendation."""

from emotrust.profile.builder import (
    AXIS_DIRECTIONS,
    DEFAULT_AXIS_SPECS,
    AxisOverride,
    AxisSpec,
    NormalizedProfile,
    TrustProfile,
    axis_specs,
    build_profile,
    normalize,
)
from emotrust.profile.document import ProfileDocument, emit_json, load_document, read_document
from emotrust.profile.recommend import SCENARIO_WEIGHTS, recommend, scenario_score
from emotrust.profile.reference import REFERENCE_ROWS, reference_profiles, reference_report
from emotrust.profile.render import RadarStyle, emit_radar_svg, render_radar

__all__ = [
    "AXIS_DIRECTIONS",
    "DEFAULT_AXIS_SPECS",
    "AxisOverride",
    "AxisSpec",
    "NormalizedProfile",
    "TrustProfile",
    "axis_specs",
    "build_profile",
    "normalize",
    "ProfileDocument",
    "emit_json",
    "load_document",
    "read_document",
    "SCENARIO_WEIGHTS",
    "recommend",
    "scenario_score",
    "REFERENCE_ROWS",
    "reference_profiles",
    "reference_report",
    "RadarStyle",
    "emit_radar_svg",
    "render_radar",
]
