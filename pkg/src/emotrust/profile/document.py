"""
Profile Document
================

Versioned JSON record of a profiled cohort: axis specifications, raw trust
values and radial scores per model.
"""

import json
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from emotrust import __version__
from emotrust.core.exceptions import ProfileError
from emotrust.profile.builder import AxisSpec, NormalizedProfile, TrustProfile

SCHEMA_VERSION = 1


class ProfileEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    raw: TrustProfile
    normalized: NormalizedProfile


class ProfileDocument(BaseModel):
    """Cohort of profiles sharing one set of axis specs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    schema_version: int = SCHEMA_VERSION
    engine_version: str = __version__
    axes: List[AxisSpec]
    profiles: List[ProfileEntry]

    @model_validator(mode="after")
    def _check_entries(self) -> "ProfileDocument":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"Unsupported profile schema version {self.schema_version}")
        for entry in self.profiles:
            if entry.raw.model_name != entry.normalized.model_name:
                raise ValueError(
                    f"Raw profile '{entry.raw.model_name}' paired with "
                    f"scores of '{entry.normalized.model_name}'"
                )
        return self

    @property
    def model_names(self) -> List[str]:
        return [entry.raw.model_name for entry in self.profiles]

    def dump(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def emit_json(
    profiles: Sequence[TrustProfile],
    normalized: Sequence[NormalizedProfile],
    specs: Sequence[AxisSpec],
) -> str:
    """Serialize a profiled cohort; ``profiles`` and ``normalized`` are index-aligned."""
    if len(profiles) != len(normalized):
        raise ProfileError(
            f"{len(profiles)} raw profiles but {len(normalized)} normalized entries"
        )
    try:
        document = ProfileDocument(
            axes=list(specs),
            profiles=[
                ProfileEntry(raw=raw, normalized=scores)
                for raw, scores in zip(profiles, normalized)
            ],
        )
    except ValidationError as e:
        raise ProfileError(f"Invalid profile document: {e}", cause=e)
    return document.dump()


def load_document(text: str, source: Optional[str] = None) -> ProfileDocument:
    try:
        return ProfileDocument.model_validate_json(text)
    except ValidationError as e:
        raise ProfileError(f"Malformed profile document: {e}", source=source, cause=e)


def read_document(path: Union[str, Path]) -> ProfileDocument:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ProfileError(f"Cannot read profile document {source}", source=str(source), cause=e)
    return load_document(text, source=str(source))
