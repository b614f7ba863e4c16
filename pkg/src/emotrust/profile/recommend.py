"""
Deployment Recommendation
=========================

Ranks profiled models for a deployment scenario by a weighted mean of their
radial scores. Each scenario rates every axis High (3), Medium (2) or Low (1).
"""

from typing import Dict, List, Sequence, Tuple

from emotrust.core.exceptions import ProfileError
from emotrust.core.types import Axis, Scenario
from emotrust.profile.builder import NormalizedProfile

HIGH, MEDIUM, LOW = 3, 2, 1

SCENARIO_WEIGHTS: Dict[Scenario, Dict[Axis, int]] = {
    Scenario.EDGE: {
        Axis.PERFORMANCE: MEDIUM,
        Axis.SAFETY: LOW,
        Axis.PRIVACY: LOW,
        Axis.SUSTAINABILITY: HIGH,
        Axis.FAIRNESS: MEDIUM,
    },
    Scenario.CLOUD: {
        Axis.PERFORMANCE: HIGH,
        Axis.SAFETY: MEDIUM,
        Axis.PRIVACY: HIGH,
        Axis.SUSTAINABILITY: LOW,
        Axis.FAIRNESS: HIGH,
    },
    Scenario.CRITICAL: {
        Axis.PERFORMANCE: HIGH,
        Axis.SAFETY: HIGH,
        Axis.PRIVACY: LOW,
        Axis.SUSTAINABILITY: LOW,
        Axis.FAIRNESS: MEDIUM,
    },
}


def scenario_score(profile: NormalizedProfile, scenario: Scenario) -> float:
    weights = SCENARIO_WEIGHTS[Scenario(scenario)]
    missing = [a.value for a in weights if a not in profile.scores]
    if missing:
        raise ProfileError(
            f"Profile '{profile.model_name}' lacks scores for {', '.join(missing)}",
            axis=missing[0],
        )
    total = sum(weights.values())
    return sum(w * profile.score(axis) for axis, w in weights.items()) / total


def recommend(
    normalized: Sequence[NormalizedProfile], scenario: Scenario
) -> List[Tuple[str, float]]:
    """Models ranked best-first as (name, score); ties break by name."""
    if not normalized:
        raise ProfileError("No profiles to rank")
    ranked = [(p.model_name, scenario_score(p, scenario)) for p in normalized]
    return sorted(ranked, key=lambda item: (-item[1], item[0]))
