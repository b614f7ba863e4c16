"""
Gender Inference Probe
======================

Property-inference privacy measurement: a head of the same architecture is
trained to predict speaker gender from the embeddings. Higher cross-validated
accuracy means the representation leaks more.
"""

from dataclasses import dataclass, replace
from typing import Dict, Optional

import structlog

from emotrust.core.exceptions import MetricError
from emotrust.core.types import Gender, TargetAttribute
from emotrust.dataio.folds import FoldPlan
from emotrust.dataio.manifest import Manifest
from emotrust.metrics.classification import GroupedPredictions, accuracy
from emotrust.model.encoder import ToyEncoderConfig
from emotrust.model.head import HeadConfig
from emotrust.training.config import TrainConfig
from emotrust.training.crossval import CrossValidationResult, cross_validate
from emotrust.training.data import Example, label_of

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PrivacyResult:
    accuracy_percent: float
    epochs: int
    cv: CrossValidationResult


def privacy_probe(
    manifest: Manifest,
    train_cfg: TrainConfig,
    head_cfg: HeadConfig,
    fold_plan: FoldPlan,
    examples: Optional[Dict[str, Example]] = None,
    encoder: Optional[ToyEncoderConfig] = None,
    max_workers: int = 1,
) -> PrivacyResult:
    """
    Cross-validated gender accuracy, in percent.

    Uses the probe epoch budget (``privacy_max_epochs``) and a two-class copy
    of ``head_cfg``. Pre-loaded examples are relabelled by gender.

    Raises:
        MetricError: If the manifest holds a single gender
    """
    genders = {r.gender for r in manifest.records}
    if len(genders) < 2:
        only = next(iter(genders)).value if genders else "none"
        raise MetricError(
            f"Privacy probe needs both genders; manifest has only {only}", metric="privacy"
        )

    probe_cfg = train_cfg.for_privacy_probe()
    probe_head = head_cfg.model_copy(update={"num_classes": len(Gender)})
    if examples is not None:
        examples = {
            k: replace(ex, label=label_of(ex.record, TargetAttribute.GENDER))
            for k, ex in examples.items()
        }

    logger.info("Running gender probe", epochs=probe_cfg.max_epochs, folds=len(fold_plan))
    cv = cross_validate(
        probe_cfg,
        probe_head,
        manifest,
        fold_plan,
        target=TargetAttribute.GENDER,
        examples=examples,
        encoder=encoder,
        max_workers=max_workers,
    )
    preds = GroupedPredictions.build(
        [p.label for p in cv.predictions], [p.predicted for p in cv.predictions], len(Gender)
    )
    percent = 100.0 * accuracy(preds)
    logger.info("Gender probe finished", accuracy_percent=percent)
    return PrivacyResult(percent, probe_cfg.max_epochs, cv)
