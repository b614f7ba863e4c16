"""
Reference Cohort
================

Published trust measurements of the seven catalogued backbones, usable as a
comparison cohort next to locally evaluated models. No UAR was published
alongside these rows, so performance is supplied by the caller.
"""

from typing import Dict, List, NamedTuple, Optional

from emotrust.metrics.report import MetricsReport
from emotrust.model.backbones import BACKBONES
from emotrust.profile.builder import TrustProfile, build_profile


class ReferenceRow(NamedTuple):
    gender_accuracy: float
    attack_success_rate: float
    equality_of_odds: float


REFERENCE_ROWS: Dict[str, ReferenceRow] = {
    "APC": ReferenceRow(95.6, 88.2, 20.9),
    "TERA": ReferenceRow(95.7, 70.7, 20.5),
    "Whisper Tiny": ReferenceRow(92.2, 78.9, 16.6),
    "Whisper Base": ReferenceRow(97.6, 73.2, 17.0),
    "Whisper Small": ReferenceRow(97.4, 61.0, 16.6),
    "Wav2vec 2.0 Base": ReferenceRow(97.2, 53.9, 16.4),
    "WavLM Base+": ReferenceRow(98.4, 57.9, 16.8),
}


def reference_report(name: str, uar_percent: Optional[float] = None) -> MetricsReport:
    """Metrics report of a published row; FLOPs come from the backbone catalogue."""
    row = REFERENCE_ROWS[name]
    return MetricsReport(
        model_name=name,
        uar_percent=uar_percent,
        privacy_accuracy_percent=row.gender_accuracy,
        attack_success_rate_percent=row.attack_success_rate,
        equality_of_odds_percent=row.equality_of_odds,
        flops=BACKBONES[name].inference_flops,
    )


def reference_profiles(uar_percent: float) -> List[TrustProfile]:
    """All seven published rows as profiles sharing one performance value."""
    return [
        build_profile(reference_report(name, uar_percent), source="reference")
        for name in REFERENCE_ROWS
    ]
