"""
Metrics Report
==============

The run-report document written by ``emotrust eval`` and read by the profile
builder. Every measurement is optional so incomplete reports can be loaded
and diagnosed.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from emotrust.core.exceptions import MetricError

REPORT_VERSION = 1


class MetricsReport(BaseModel):
    """Trust-axis measurements of one model, percentages in [0, 100]."""

    model_config = ConfigDict(extra="forbid")

    report_version: int = REPORT_VERSION
    model_name: str
    uar_percent: Optional[float] = Field(default=None, ge=0, le=100)
    privacy_accuracy_percent: Optional[float] = Field(default=None, ge=0, le=100)
    attack_success_rate_percent: Optional[float] = Field(default=None, ge=0, le=100)
    equality_of_odds_percent: Optional[float] = Field(default=None, ge=0, le=100)
    statistical_parity_percent: Optional[float] = Field(default=None, ge=0, le=100)
    equal_opportunity_percent: Optional[float] = Field(default=None, ge=0, le=100)
    flops: Optional[float] = Field(default=None, gt=0)
    flops_breakdown: Optional[Dict[str, Any]] = None
    privacy_epochs: Optional[int] = None
    warnings: List[str] = Field(default_factory=list)

    def dump(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def load_report(path: Union[str, Path]) -> MetricsReport:
    source = Path(path)
    try:
        return MetricsReport.model_validate_json(source.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        raise MetricError(f"Cannot read metrics report {source}: {e}", metric="report", cause=e)
