"""
Attack Evaluation
=================

Attack success rate over a test set: only items the model classifies
correctly before the attack count, and an attack succeeds when it changes
the prediction. Items are independent and may be attacked in parallel.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from emotrust.attacks.config import AttackConfig
from emotrust.attacks.perturb import epsilon_for_snr, fgsm, gaussian_perturb, pgd
from emotrust.attacks.targets import AttackTarget
from emotrust.core.exceptions import AttackError, EmotrustError
from emotrust.core.types import AttackKind, AttackSurface
from emotrust.model.head import argmax
from emotrust.training.data import Example

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class AttackItem:
    id: str
    x: np.ndarray
    label: int


def items_from_examples(examples: Sequence[Example], surface: AttackSurface) -> List[AttackItem]:
    """Attack inputs for a surface: embeddings, or the stored waveforms."""
    items = []
    for ex in examples:
        if AttackSurface(surface) == AttackSurface.WAVEFORM:
            if ex.waveform is None:
                raise AttackError(
                    "Waveform attacks need waveform manifests", item_id=ex.id, attack="waveform"
                )
            items.append(AttackItem(ex.id, ex.waveform, ex.label))
        else:
            items.append(AttackItem(ex.id, ex.emb, ex.label))
    return items


class AttackRow(BaseModel):
    """Outcome for one item; ``success`` is None when the item was excluded."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str
    label: int
    clean_pred: int
    adv_pred: Optional[int] = None
    loss_before: float
    loss_after: Optional[float] = None
    epsilon: Optional[float] = None
    success: Optional[bool] = None


class AttackReport(BaseModel):
    """Per-item rows plus the summary success rate."""

    model_config = ConfigDict(extra="forbid")

    kind: AttackKind
    surface: AttackSurface
    snr_db: Optional[float] = Field(default=None, description="None for a clean run")
    rows: List[AttackRow] = Field(default_factory=list)
    correct: int = 0
    flipped: int = 0
    asr: Optional[float] = None
    gradient_calls: int = 0
    warnings: List[str] = Field(default_factory=list)

    def summary(self) -> dict:
        return self.model_dump(mode="json", exclude={"rows"})


def attack_item(
    target: AttackTarget, item: AttackItem, config: AttackConfig, index: int
) -> AttackRow:
    """Attack one item; item ``index`` seeds Gaussian noise with ``seed + index``."""
    x = np.asarray(item.x, dtype=np.float32)
    clean_logits = target.logits(x)
    clean_pred = argmax(clean_logits)
    loss_before = target.loss(x, item.label)
    if clean_pred != item.label:
        return AttackRow(
            id=item.id, label=item.label, clean_pred=clean_pred, loss_before=loss_before
        )

    snr = config.effective_snr_db
    kind = AttackKind(config.kind)
    try:
        if kind == AttackKind.GAUSSIAN:
            eps = None
            adv = gaussian_perturb(x, snr, config.seed + index)
        else:
            eps = epsilon_for_snr(x, snr)
            if kind == AttackKind.FGSM:
                adv = fgsm(target, x, item.label, eps, clip=config.clip)
            else:
                adv = pgd(
                    target,
                    x,
                    item.label,
                    eps,
                    config.step_size(eps) if eps > 0 else 1.0,
                    config.pgd_steps,
                    clip=config.clip,
                )
    except EmotrustError as e:
        raise AttackError(
            f"Attack failed: {e.message}", item_id=item.id, attack=kind.value, cause=e
        )

    adv_pred = argmax(target.logits(adv))
    return AttackRow(
        id=item.id,
        label=item.label,
        clean_pred=clean_pred,
        adv_pred=adv_pred,
        loss_before=loss_before,
        loss_after=target.loss(adv, item.label),
        epsilon=eps,
        success=adv_pred != clean_pred,
    )


def attack_success_rate(
    target: AttackTarget,
    items: Sequence[AttackItem],
    config: AttackConfig,
    max_workers: int = 1,
) -> AttackReport:
    """
    Attack every item and summarise.

    Returns:
        A report whose ``asr`` is flipped / correct, or None (with a warning)
        when no item was classified correctly
    """
    if not items:
        raise AttackError("Attack test set is empty")
    log = logger.bind(component="attack", kind=AttackKind(config.kind).value)
    calls_before = target.gradient_calls

    workers = max(1, min(max_workers, len(items)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(
            pool.map(lambda pair: attack_item(target, pair[1], config, pair[0]), enumerate(items))
        )

    correct = sum(1 for r in rows if r.success is not None)
    flipped = sum(1 for r in rows if r.success)
    warnings = []
    asr: Optional[float] = None
    if correct == 0:
        warnings.append("no correctly classified items; attack success rate undefined")
        log.warning("Attack success rate undefined", items=len(rows))
    else:
        asr = flipped / correct

    log.info("Attack finished", items=len(rows), correct=correct, flipped=flipped, asr=asr)
    return AttackReport(
        kind=config.kind,
        surface=config.surface,
        snr_db=None if config.clean else config.snr_db,
        rows=rows,
        correct=correct,
        flipped=flipped,
        asr=asr,
        gradient_calls=target.gradient_calls - calls_before,
        warnings=warnings,
    )


FoldItems = Tuple[AttackTarget, Sequence[AttackItem]]


def pooled_attack_success_rate(
    folds: Sequence[FoldItems], config: AttackConfig, max_workers: int = 1
) -> AttackReport:
    """
    Attack each fold's items against that fold's target and pool the counts.

    Folds without test items are skipped. The pooled rate is total flipped
    over total correct, not a mean of per-fold rates.
    """
    reports = [
        attack_success_rate(target, items, config, max_workers) for target, items in folds if items
    ]
    if not reports:
        raise AttackError("Attack test set is empty")
    if len(reports) == 1:
        return reports[0]

    correct = sum(r.correct for r in reports)
    flipped = sum(r.flipped for r in reports)
    warnings: List[str] = []
    if correct == 0:
        warnings.append("no correctly classified items; attack success rate undefined")
    return AttackReport(
        kind=config.kind,
        surface=config.surface,
        snr_db=None if config.clean else config.snr_db,
        rows=[row for r in reports for row in r.rows],
        correct=correct,
        flipped=flipped,
        asr=flipped / correct if correct else None,
        gradient_calls=sum(r.gradient_calls for r in reports),
        warnings=warnings,
    )


class RobustnessPoint(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    snr_db: float
    attack_asr: Optional[float]
    gaussian_asr: Optional[float]


class RobustnessCurve(BaseModel):
    """Success rate of the configured attack and of equal-power Gaussian noise."""

    model_config = ConfigDict(extra="forbid")

    kind: AttackKind
    surface: AttackSurface
    points: List[RobustnessPoint] = Field(default_factory=list)


def robustness_curve(
    target: AttackTarget,
    items: Sequence[AttackItem],
    snrs: Sequence[float],
    config: AttackConfig,
    max_workers: int = 1,
) -> RobustnessCurve:
    """Sweep SNRs, pairing the configured attack with the Gaussian baseline."""
    return pooled_robustness_curve([(target, items)], snrs, config, max_workers)


def pooled_robustness_curve(
    folds: Sequence[FoldItems],
    snrs: Sequence[float],
    config: AttackConfig,
    max_workers: int = 1,
) -> RobustnessCurve:
    """Robustness sweep where every fold's items face that fold's target."""
    if AttackKind(config.kind) == AttackKind.GAUSSIAN:
        raise AttackError("Sweep compares a gradient attack against noise; choose fgsm or pgd")
    points = []
    for snr in snrs:
        if not math.isfinite(snr):
            raise AttackError(f"Sweep SNR must be finite, got {snr}")
        swept = config.model_copy(update={"snr_db": snr, "clean": False})
        noise = swept.model_copy(update={"kind": AttackKind.GAUSSIAN})
        points.append(
            RobustnessPoint(
                snr_db=snr,
                attack_asr=pooled_attack_success_rate(folds, swept, max_workers).asr,
                gaussian_asr=pooled_attack_success_rate(folds, noise, max_workers).asr,
            )
        )
    return RobustnessCurve(kind=config.kind, surface=config.surface, points=points)
