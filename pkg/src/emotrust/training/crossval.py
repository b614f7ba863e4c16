"""
Cross-Validation
================

Trains one head per fold of a ``FoldPlan`` and pools the test predictions so
every utterance is predicted exactly once, by the fold that held it out.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

import structlog

from emotrust.core.exceptions import TrainingError
from emotrust.core.types import TargetAttribute
from emotrust.dataio.folds import FoldPlan
from emotrust.dataio.manifest import Manifest
from emotrust.model.encoder import ToyEncoderConfig
from emotrust.model.head import HeadConfig
from emotrust.training.config import TrainConfig
from emotrust.training.data import Example, load_examples
from emotrust.training.trainer import Prediction, TrainedModel, predict, train

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FoldResult:
    index: int
    model: TrainedModel
    predictions: List[Prediction]


@dataclass(frozen=True, eq=False)
class CrossValidationResult:
    """Per-fold models and pooled test predictions in manifest order."""

    folds: List[FoldResult]
    predictions: List[Prediction]

    @property
    def models(self) -> List[TrainedModel]:
        return [f.model for f in self.folds]


def cross_validate(
    cfg: TrainConfig,
    head_cfg: HeadConfig,
    manifest: Manifest,
    fold_plan: FoldPlan,
    target: TargetAttribute = TargetAttribute.EMOTION,
    examples: Optional[Dict[str, Example]] = None,
    encoder: Optional[ToyEncoderConfig] = None,
    max_workers: int = 1,
) -> CrossValidationResult:
    """
    Train and test every fold.

    Fold ``i`` trains with seed ``cfg.seed + i``. Folds are independent and
    may run on up to ``max_workers`` threads; results do not depend on the
    worker count.

    Args:
        cfg: Training settings
        head_cfg: Head shape (``num_classes`` must fit ``target``)
        manifest: Utterances the plan refers to
        fold_plan: Plan to execute
        target: Label attribute (emotion, or gender for the privacy probe)
        examples: Pre-loaded examples keyed by id; loaded from the manifest
            when omitted
        encoder: Encoder for waveform manifests
        max_workers: Thread cap for concurrent folds

    Raises:
        DataError: If the plan is invalid for the manifest
        TrainingError: If a fold fails to train
    """
    fold_plan.validate_against(manifest)
    if examples is None:
        examples = load_examples(manifest, target, cfg.max_audio_s, encoder)
    missing = [i for i in manifest.ids if i not in examples]
    if missing:
        raise TrainingError(f"No loaded example for '{missing[0]}'")

    def run_fold(index: int) -> FoldResult:
        fold = fold_plan.folds[index]
        log = logger.bind(component="crossval", fold=index)
        log.info(
            "Training fold",
            train=len(fold.train_ids),
            val=len(fold.val_ids),
            test=len(fold.test_ids),
        )
        model = train(
            cfg.for_fold(index),
            head_cfg,
            [examples[i] for i in fold.train_ids],
            [examples[i] for i in fold.val_ids],
            fold=index,
        )
        return FoldResult(index, model, predict(model, [examples[i] for i in fold.test_ids], index))

    workers = max(1, min(max_workers, len(fold_plan)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_fold, range(len(fold_plan))))

    by_id = {p.id: p for r in results for p in r.predictions}
    pooled = [by_id[i] for i in manifest.ids]
    logger.info("Cross-validation finished", folds=len(results), predictions=len(pooled))
    return CrossValidationResult(results, pooled)
