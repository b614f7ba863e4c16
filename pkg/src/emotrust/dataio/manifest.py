"""
Dataset Manifests
=================

Newline-delimited manifests describing utterances: one JSON object per line
with the record fields below. An optional first line of the form
``{"dataset_name": "..."}`` names the dataset; otherwise the file stem is
used. Tensor paths are relative to the manifest's directory.
"""

import json
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Optional, Set, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from emotrust.core.exceptions import DataError
from emotrust.core.types import Emotion, Gender

logger = structlog.get_logger(__name__)


class UtteranceRecord(BaseModel):
    """One utterance: label, protected attribute and speaker bookkeeping."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = Field(min_length=1)
    tensor_path: str = Field(min_length=1)
    emotion: Emotion
    speaker_id: str = Field(min_length=1)
    gender: Gender
    session_id: Optional[str] = None
    duration_s: float = Field(gt=0)


class Manifest(BaseModel):
    """A named list of utterance records with unique ids."""

    model_config = ConfigDict(extra="forbid")

    dataset_name: str
    records: List[UtteranceRecord] = Field(default_factory=list)
    root: Optional[Path] = Field(default=None, exclude=True)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def ids(self) -> List[str]:
        return [r.id for r in self.records]

    def by_id(self) -> Dict[str, UtteranceRecord]:
        return {r.id: r for r in self.records}

    def resolve(self, record: UtteranceRecord) -> Path:
        """Absolute location of a record's tensor file."""
        path = Path(record.tensor_path)
        if path.is_absolute() or self.root is None:
            return path
        return self.root / path

    def speakers(self, gender: Optional[Gender] = None) -> Set[str]:
        return {r.speaker_id for r in self.records if gender is None or r.gender == gender}

    def subset(self, ids: List[str]) -> "Manifest":
        """Records with the given ids, in the given order."""
        index = self.by_id()
        missing = [i for i in ids if i not in index]
        if missing:
            raise DataError(f"Unknown utterance ids: {', '.join(missing[:5])}")
        return Manifest(
            dataset_name=self.dataset_name,
            records=[index[i] for i in ids],
            root=self.root,
        )

    def require_group_coverage(self, min_speakers: int = 2) -> None:
        """Check the speaker-per-gender floor needed by fairness and privacy metrics."""
        for gender in Gender:
            count = len(self.speakers(gender))
            if count < min_speakers:
                raise DataError(
                    f"Need at least {min_speakers} {gender.value} speakers, found {count}"
                )


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    field = ".".join(str(p) for p in first.get("loc", ())) or "record"
    token = first.get("input")
    if first.get("type") == "missing":
        return f"missing field '{field}'"
    return f"invalid {field} {token!r}: {first.get('msg')}"


def parse_manifest(
    lines: List[str], dataset_name: str, root: Optional[Path] = None, path: str = "<memory>"
) -> Manifest:
    """Parse manifest lines, reporting problems with 1-based line numbers."""
    records: List[UtteranceRecord] = []
    seen: Dict[str, int] = {}

    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            payload: Any = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"Line {line_no}: not valid JSON", path=path, line=line_no, cause=e)
        if not isinstance(payload, dict):
            raise DataError(f"Line {line_no}: expected an object", path=path, line=line_no)

        if not records and set(payload) == {"dataset_name"}:
            dataset_name = str(payload["dataset_name"])
            continue

        try:
            record = UtteranceRecord.model_validate(payload)
        except ValidationError as e:
            raise DataError(f"Line {line_no}: {_describe(e)}", path=path, line=line_no, cause=e)

        if record.id in seen:
            raise DataError(
                f"Duplicate id '{record.id}' on lines {seen[record.id]} and {line_no}",
                path=path,
                line=line_no,
            )
        seen[record.id] = line_no
        records.append(record)

    return Manifest(dataset_name=dataset_name, records=records, root=root)


def load_manifest(path: Union[str, Path], check_files: bool = True) -> Manifest:
    """
    Load and validate a manifest file.

    Args:
        path: Manifest location
        check_files: Require every tensor path to exist

    Returns:
        The validated manifest, with paths resolvable against its directory

    Raises:
        DataError: For unreadable files, malformed lines, duplicate ids or
            unresolvable tensor paths
    """
    source = Path(path)
    try:
        lines = source.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataError(f"Cannot read manifest: {e}", path=str(source), cause=e)

    manifest = parse_manifest(lines, source.stem, root=source.parent, path=str(source))
    if not manifest.records:
        raise DataError("Manifest has no records", path=str(source))

    if check_files:
        for record in manifest.records:
            if not manifest.resolve(record).is_file():
                raise DataError(
                    f"Tensor file for '{record.id}' not found: {record.tensor_path}",
                    path=str(source),
                )

    counts = Counter(r.emotion.value for r in manifest.records)
    logger.info(
        "Manifest loaded",
        path=str(source),
        records=len(manifest),
        speakers=len(manifest.speakers()),
        **{f"n_{k}": v for k, v in sorted(counts.items())},
    )
    return manifest


def write_manifest(manifest: Manifest, path: Union[str, Path]) -> None:
    """Write a manifest with a dataset-name header line."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps({"dataset_name": manifest.dataset_name}, sort_keys=True)]
    lines.extend(
        json.dumps(r.model_dump(mode="json"), sort_keys=True) for r in manifest.records
    )
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
