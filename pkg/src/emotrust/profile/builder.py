"""
Trust Profiles
==============

Five-axis profile records, axis specifications and the mapping from raw
values to radial scores in [0, 1]. Performance is a forward axis (higher is
better); privacy, safety, fairness and sustainability are backward axes
(lower raw values score higher).
"""

import math
from typing import Dict, List, Optional, Sequence, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from emotrust.core.exceptions import ProfileError
from emotrust.core.types import AXES, Axis, Direction, Normalization
from emotrust.metrics.report import MetricsReport

logger = structlog.get_logger(__name__)

AXIS_DIRECTIONS: Dict[Axis, Direction] = {
    Axis.PERFORMANCE: Direction.FORWARD,
    Axis.PRIVACY: Direction.BACKWARD,
    Axis.SAFETY: Direction.BACKWARD,
    Axis.FAIRNESS: Direction.BACKWARD,
    Axis.SUSTAINABILITY: Direction.BACKWARD,
}

_REPORT_FIELDS: Dict[Axis, str] = {
    Axis.PERFORMANCE: "uar_percent",
    Axis.PRIVACY: "privacy_accuracy_percent",
    Axis.SAFETY: "attack_success_rate_percent",
    Axis.FAIRNESS: "equality_of_odds_percent",
    Axis.SUSTAINABILITY: "flops",
}


class TrustProfile(BaseModel):
    """Raw trust-axis values of one model."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model_name: str
    performance: float = Field(ge=0, le=100, description="UAR percent")
    privacy: float = Field(ge=0, le=100, description="Gender accuracy percent")
    safety: float = Field(ge=0, le=100, description="Attack success rate percent")
    fairness: float = Field(ge=0, le=100, description="Equality of odds percent")
    sustainability: float = Field(gt=0, description="FLOPs per inference")

    def value(self, axis: Axis) -> float:
        return float(getattr(self, Axis(axis).value))

    @property
    def directions(self) -> Dict[Axis, Direction]:
        return dict(AXIS_DIRECTIONS)


class AxisSpec(BaseModel):
    """Direction and normalization of one axis; ``lo``/``hi`` bound the absolute modes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    axis: Axis
    direction: Direction
    normalization: Normalization = Normalization.ABSOLUTE
    lo: float
    hi: float

    @model_validator(mode="after")
    def _check_bounds(self) -> "AxisSpec":
        if not self.lo < self.hi:
            raise ValueError(f"{self.axis.value}: lo ({self.lo}) must be below hi ({self.hi})")
        return self


DEFAULT_AXIS_SPECS: List[AxisSpec] = [
    AxisSpec(axis=Axis.PERFORMANCE, direction=Direction.FORWARD, lo=25.0, hi=100.0),
    AxisSpec(axis=Axis.PRIVACY, direction=Direction.BACKWARD, lo=50.0, hi=100.0),
    AxisSpec(axis=Axis.SAFETY, direction=Direction.BACKWARD, lo=0.0, hi=100.0),
    AxisSpec(axis=Axis.FAIRNESS, direction=Direction.BACKWARD, lo=0.0, hi=50.0),
    AxisSpec(
        axis=Axis.SUSTAINABILITY,
        direction=Direction.BACKWARD,
        normalization=Normalization.LOG_ABSOLUTE,
        lo=9.0,
        hi=11.0,
    ),
]


class AxisOverride(BaseModel):
    """Partial axis settings from a run config's ``[profile.axes.<axis>]`` table."""

    model_config = ConfigDict(extra="forbid")

    normalization: Optional[Normalization] = None
    lo: Optional[float] = None
    hi: Optional[float] = None


def axis_specs(overrides: Optional[Dict[Axis, AxisOverride]] = None) -> List[AxisSpec]:
    """Default specs with per-axis overrides applied."""
    specs = []
    for spec in DEFAULT_AXIS_SPECS:
        override = (overrides or {}).get(spec.axis)
        if override is None:
            specs.append(spec)
            continue
        merged = spec.model_dump()
        merged.update(override.model_dump(exclude_none=True))
        try:
            specs.append(AxisSpec.model_validate(merged))
        except ValueError as e:
            raise ProfileError(f"Invalid axis override: {e}", axis=spec.axis.value, cause=e)
    return specs


class NormalizedProfile(BaseModel):
    """Radial scores of one model, keyed by axis."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model_name: str
    scores: Dict[Axis, float]

    def score(self, axis: Axis) -> float:
        return self.scores[Axis(axis)]


def build_profile(
    report: Union[MetricsReport, Dict[str, object]], source: Optional[str] = None
) -> TrustProfile:
    """
    Copy the five axis measurements out of a metrics report.

    Raises:
        ProfileError: Naming the first missing axis (and the report source)
    """
    if not isinstance(report, MetricsReport):
        try:
            report = MetricsReport.model_validate(report)
        except ValueError as e:
            raise ProfileError(f"Malformed metrics report: {e}", source=source, cause=e)

    values: Dict[str, float] = {}
    for axis in AXES:
        value = getattr(report, _REPORT_FIELDS[axis])
        if value is None:
            raise ProfileError(
                f"Report for '{report.model_name}' is missing the {axis.value} axis",
                axis=axis.value,
                source=source,
            )
        values[axis.value] = float(value)
    return TrustProfile(model_name=report.model_name, **values)


def _scaled(value: float, spec: AxisSpec, log: bool) -> float:
    if log:
        value = math.log10(value)
    return min(1.0, max(0.0, (value - spec.lo) / (spec.hi - spec.lo)))


def normalize(
    profiles: Sequence[TrustProfile], specs: Optional[Sequence[AxisSpec]] = None
) -> List[NormalizedProfile]:
    """
    Map raw values to radial scores in [0, 1], one entry per profile.

    Cohort min-max needs at least two distinct values on an axis; otherwise
    that axis falls back to its absolute bounds.
    """
    if not profiles:
        raise ProfileError("Cannot normalize an empty cohort")
    specs = list(specs or DEFAULT_AXIS_SPECS)

    scores: List[Dict[Axis, float]] = [{} for _ in profiles]
    for spec in specs:
        raw = [p.value(spec.axis) for p in profiles]
        mode = Normalization(spec.normalization)
        lo, hi = min(raw), max(raw)
        cohort = mode == Normalization.COHORT_MINMAX and len(raw) >= 2 and hi > lo
        if mode == Normalization.COHORT_MINMAX and not cohort:
            logger.debug("Cohort min-max degenerate; using absolute bounds", axis=spec.axis.value)
        for i, value in enumerate(raw):
            if cohort:
                s = (value - lo) / (hi - lo)
            else:
                s = _scaled(value, spec, log=mode == Normalization.LOG_ABSOLUTE)
            if Direction(spec.direction) == Direction.BACKWARD:
                s = 1.0 - s
            scores[i][spec.axis] = s
    return [
        NormalizedProfile(model_name=p.model_name, scores=s) for p, s in zip(profiles, scores)
    ]
