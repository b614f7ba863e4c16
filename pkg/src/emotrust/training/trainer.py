"""
Head Training
=============

Mini-batch training of the downstream head with per-example tapes, Adam
updates and best-validation-UAR model selection.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from emotrust.core.exceptions import ModelError, TensorError, TrainingError
from emotrust.metrics.classification import GroupedPredictions, uar
from emotrust.model.head import (
    PARAM_NAMES,
    HeadConfig,
    HeadParams,
    argmax,
    bind_params,
    cross_entropy,
    head_forward,
    init_head,
)
from emotrust.tensor import ComputationTape, backward
from emotrust.training.config import TrainConfig
from emotrust.training.data import Example, class_counts
from emotrust.training.optimizer import Adam

logger = structlog.get_logger(__name__)


class EpochRecord(BaseModel):
    """One line of training history."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epoch: int
    train_loss: float
    val_uar: float


class Prediction(BaseModel):
    """A test-time prediction for one utterance."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str
    label: int
    predicted: int
    logits: List[float]
    fold: Optional[int] = None


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Selected parameters plus the full training history."""

    params: HeadParams
    history: List[EpochRecord]
    selected_epoch: int
    warnings: List[str] = field(default_factory=list)

    @property
    def config(self) -> HeadConfig:
        return self.params.config

    def history_lines(self) -> List[str]:
        return [record.model_dump_json() for record in self.history]


def example_gradients(
    params: HeadParams, example: Example
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Loss and parameter gradients (float64) of one example."""
    tape = ComputationTape()
    bound = bind_params(params, tape)
    logits = head_forward(params, example.emb, tape, bound)
    loss = cross_entropy(tape, logits, example.label)
    grads = backward(tape, loss)
    return float(loss.item()), {
        name: np.asarray(grads.array(bound[name]), dtype=np.float64) for name in PARAM_NAMES
    }


def predict_logits(params: HeadParams, emb: np.ndarray) -> np.ndarray:
    tape = ComputationTape()
    return np.array(head_forward(params, emb, tape).data)


def predict(
    model: TrainedModel, examples: Sequence[Example], fold: Optional[int] = None
) -> List[Prediction]:
    """Argmax predictions (ties to the lowest class) with their logits."""
    out = []
    for ex in examples:
        logits = predict_logits(model.params, ex.emb)
        out.append(
            Prediction(
                id=ex.id,
                label=ex.label,
                predicted=argmax(logits),
                logits=[float(v) for v in logits],
                fold=fold,
            )
        )
    return out


def evaluate_uar(params: HeadParams, examples: Sequence[Example]) -> float:
    truth = [ex.label for ex in examples]
    pred = [argmax(predict_logits(params, ex.emb)) for ex in examples]
    return uar(GroupedPredictions.build(truth, pred, params.config.num_classes))


def train(
    cfg: TrainConfig,
    head_cfg: HeadConfig,
    train_set: Sequence[Example],
    val_set: Sequence[Example],
    fold: Optional[int] = None,
) -> TrainedModel:
    """
    Train a head and return the best-validation-UAR parameters.

    Shuffle order and initialization derive from ``cfg.seed``; the final
    partial batch is kept. Ties in validation UAR go to the earliest epoch.

    Raises:
        TrainingError: Empty sets, bad labels, or a non-finite loss (with
            the epoch and batch where it happened)
    """
    log = logger.bind(component="trainer", fold=fold)
    if not train_set or not val_set:
        raise TrainingError("Train and validation sets must be non-empty", fold=fold)
    for ex in list(train_set) + list(val_set):
        if not 0 <= ex.label < head_cfg.num_classes:
            raise TrainingError(
                f"Label {ex.label} of '{ex.id}' outside {head_cfg.num_classes} classes",
                fold=fold,
            )

    warnings: List[str] = []
    for cls, count in enumerate(class_counts(list(train_set), head_cfg.num_classes)):
        if count == 0:
            message = f"class {cls} has no training examples"
            warnings.append(message)
            log.warning("Empty class in training set", label=cls)

    rng = np.random.default_rng(cfg.seed)
    params = init_head(head_cfg, seed=cfg.seed)
    optimizer = Adam(cfg)
    history: List[EpochRecord] = []
    best_params, best_uar, best_epoch = params, -1.0, 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_set))
        total_loss = 0.0
        for batch, start in enumerate(range(0, len(order), cfg.batch_size)):
            indices = order[start : start + cfg.batch_size]
            summed: Dict[str, np.ndarray] = {}
            try:
                for i in indices:
                    loss, grads = example_gradients(params, train_set[int(i)])
                    if not np.isfinite(loss):
                        raise TrainingError(
                            "Loss became non-finite", epoch=epoch, batch=batch, fold=fold
                        )
                    total_loss += loss
                    for name, g in grads.items():
                        summed[name] = summed[name] + g if name in summed else g
                params = optimizer.step(params, {n: g / len(indices) for n, g in summed.items()})
            except (TensorError, ModelError) as e:
                raise TrainingError(
                    f"Training diverged: {e.message}", epoch=epoch, batch=batch, fold=fold, cause=e
                )

        record = EpochRecord(
            epoch=epoch,
            train_loss=total_loss / len(train_set),
            val_uar=evaluate_uar(params, val_set),
        )
        history.append(record)
        log.debug("Epoch finished", epoch=epoch, loss=record.train_loss, val_uar=record.val_uar)
        if record.val_uar > best_uar:
            best_params, best_uar, best_epoch = params, record.val_uar, epoch

    log.info("Training finished", selected_epoch=best_epoch, val_uar=best_uar)
    return TrainedModel(best_params, history, best_epoch, warnings)
