"""
Fold Planning
=============

Speaker-independent cross-validation plans. ``session-fold`` tests on one
recording session per fold; ``speaker-fraction-fold`` partitions the speakers
into k seeded groups. Validation comes from the training side, either as the
next session or as a seeded 20% of the remaining speakers.
"""

from typing import Dict, List, Set, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from emotrust.core.exceptions import DataError
from emotrust.core.types import FoldScheme, ValPolicy
from emotrust.dataio.manifest import Manifest

logger = structlog.get_logger(__name__)

VAL_SPEAKER_FRACTION = 0.2


class Fold(BaseModel):
    """Train, validation and test ids of one fold."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    train_ids: List[str]
    val_ids: List[str]
    test_ids: List[str]


class FoldPlan(BaseModel):
    """An ordered list of folds."""

    model_config = ConfigDict(extra="forbid")

    scheme: FoldScheme
    folds: List[Fold] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.folds)

    def validate_against(self, manifest: Manifest) -> None:
        """
        Enforce the plan invariants for ``manifest``.

        Raises:
            DataError: Unknown ids, overlapping sets inside a fold, speakers
                shared by train and test, or test sets that do not cover
                every utterance exactly once
        """
        index = manifest.by_id()
        tested: Dict[str, int] = {}
        for i, fold in enumerate(self.folds):
            parts = {"train": fold.train_ids, "val": fold.val_ids, "test": fold.test_ids}
            for name, ids in parts.items():
                unknown = [x for x in ids if x not in index]
                if unknown:
                    raise DataError(
                        f"Fold {i} {name} set references unknown id '{unknown[0]}'"
                    )
                if len(set(ids)) != len(ids):
                    raise DataError(f"Fold {i} {name} set repeats an id")
            train, val, test = (set(v) for v in parts.values())
            if train & val or train & test or val & test:
                raise DataError(f"Fold {i} train/val/test sets overlap")
            if not train or not test:
                raise DataError(f"Fold {i} has an empty train or test set")

            train_speakers = {index[x].speaker_id for x in train}
            test_speakers = {index[x].speaker_id for x in test}
            shared = sorted(train_speakers & test_speakers)
            if shared:
                raise DataError(f"Fold {i} shares speaker '{shared[0]}' between train and test")

            for x in fold.test_ids:
                if x in tested:
                    raise DataError(
                        f"Utterance '{x}' is tested in folds {tested[x]} and {i}"
                    )
                tested[x] = i

        untested = [x for x in manifest.ids if x not in tested]
        if untested:
            raise DataError(f"Utterance '{untested[0]}' is never tested")


def _ids_of(manifest: Manifest, speakers: Set[str]) -> List[str]:
    return [r.id for r in manifest.records if r.speaker_id in speakers]


def _fraction_count(n: int) -> int:
    return min(n - 1, max(1, int(round(VAL_SPEAKER_FRACTION * n))))


def _fraction_split(
    rest: List[str], manifest: Manifest, seed: int, fold: int
) -> Tuple[List[str], List[str]]:
    """
    Split the non-test ids of a fold into train and validation ids.

    A seeded 20% of the speakers validate. With a single speaker left the
    split falls back to a seeded 20% of that speaker's utterances.
    """
    index = manifest.by_id()
    pool = sorted({index[x].speaker_id for x in rest})
    rng = np.random.default_rng([seed, fold])
    if len(pool) >= 2:
        order = rng.permutation(len(pool))
        val_speakers = {pool[j] for j in order[: _fraction_count(len(pool))]}
        train = [x for x in rest if index[x].speaker_id not in val_speakers]
        val = [x for x in rest if index[x].speaker_id in val_speakers]
        return train, val

    if len(rest) < 2:
        raise DataError("Fraction validation needs at least 2 training utterances")
    logger.warning(
        "One training speaker left; validating on held-out utterances",
        fold=fold,
        speaker=pool[0],
    )
    held = set(rng.permutation(len(rest))[: _fraction_count(len(rest))].tolist())
    train = [x for j, x in enumerate(rest) if j not in held]
    val = [x for j, x in enumerate(rest) if j in held]
    return train, val


def _session_folds(manifest: Manifest, k: int, val_policy: ValPolicy, seed: int) -> List[Fold]:
    missing = [r.id for r in manifest.records if r.session_id is None]
    if missing:
        raise DataError(f"session-fold needs session_id on every record; '{missing[0]}' has none")

    sessions = sorted({r.session_id for r in manifest.records})  # type: ignore[type-var]
    if k != len(sessions):
        raise DataError(
            f"session-fold with k={k} needs exactly {k} sessions, found {len(sessions)}"
        )
    if k < 2 or (val_policy == ValPolicy.ONE_SESSION and k < 3):
        raise DataError(f"session-fold with k={k} leaves no room for a train/val split")

    speaker_sessions: Dict[str, Set[str]] = {}
    for r in manifest.records:
        speaker_sessions.setdefault(r.speaker_id, set()).add(r.session_id)  # type: ignore[arg-type]
    spanning = sorted(s for s, v in speaker_sessions.items() if len(v) > 1)
    if spanning:
        raise DataError(f"Speaker '{spanning[0]}' appears in more than one session")

    folds = []
    for i, test_session in enumerate(sessions):
        test = [r.id for r in manifest.records if r.session_id == test_session]
        rest = [r for r in manifest.records if r.session_id != test_session]
        if val_policy == ValPolicy.ONE_SESSION:
            val_session = sessions[(i + 1) % k]
            val = [r.id for r in rest if r.session_id == val_session]
            train = [r.id for r in rest if r.session_id != val_session]
        else:
            train, val = _fraction_split([r.id for r in rest], manifest, seed, i)
        folds.append(Fold(train_ids=train, val_ids=val, test_ids=test))
    return folds


def _speaker_folds(manifest: Manifest, k: int, val_policy: ValPolicy, seed: int) -> List[Fold]:
    if val_policy != ValPolicy.FRACTION:
        raise DataError("speaker-fraction-fold supports only the 'fraction' validation policy")
    speakers = sorted(manifest.speakers())
    if k < 2:
        raise DataError(f"speaker-fraction-fold with k={k} leaves no training speakers")
    if k > len(speakers):
        raise DataError(f"k={k} exceeds the {len(speakers)} distinct speakers")

    order = np.random.default_rng(seed).permutation(len(speakers))
    groups = np.array_split(order, k)
    folds = []
    for i, group in enumerate(groups):
        test_speakers = {speakers[j] for j in group}
        rest = set(speakers) - test_speakers
        train, val = _fraction_split(_ids_of(manifest, rest), manifest, seed, i)
        folds.append(
            Fold(train_ids=train, val_ids=val, test_ids=_ids_of(manifest, test_speakers))
        )
    return folds


def make_folds(
    manifest: Manifest,
    scheme: FoldScheme,
    k: int,
    val_policy: ValPolicy = ValPolicy.ONE_SESSION,
    seed: int = 0,
) -> FoldPlan:
    """
    Plan k speaker-independent folds over a manifest.

    Args:
        manifest: Utterances to split
        scheme: ``session-fold`` or ``speaker-fraction-fold``
        k: Number of folds
        val_policy: ``one-session`` (session-fold only) or ``fraction``
        seed: Seed for speaker shuffles

    Returns:
        A validated plan; identical inputs give identical plans

    Raises:
        DataError: If the manifest cannot support the requested plan
    """
    scheme = FoldScheme(scheme)
    val_policy = ValPolicy(val_policy)
    if scheme == FoldScheme.SESSION:
        folds = _session_folds(manifest, k, val_policy, seed)
    else:
        folds = _speaker_folds(manifest, k, val_policy, seed)

    plan = FoldPlan(scheme=scheme, folds=folds)
    plan.validate_against(manifest)
    logger.info(
        "Fold plan ready",
        scheme=scheme.value,
        k=k,
        test_sizes=[len(f.test_ids) for f in folds],
    )
    return plan
