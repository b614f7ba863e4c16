"""
emotrust Settings
=================

Process settings from the environment and the run-config schema read from
``--config`` files.

Seeds: every random stage derives from ``RunConfig.seed``. Synthesis uses
``seed``, fold ``i`` trains with ``seed + i``, Gaussian noise for test item
``j`` uses ``seed + j`` and the gender probe reuses the fold seeds.
"""

from pathlib import Path
from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from emotrust.attacks.config import AttackConfig
from emotrust.core.types import Axis, FoldScheme, Scenario, ValPolicy
from emotrust.dataio.synth import SynthConfig
from emotrust.model.encoder import ToyEncoderConfig
from emotrust.profile.builder import AxisOverride
from emotrust.training.config import TrainConfig


class EngineSettings(BaseSettings):
    """
    Process-wide engine settings.

    Supports environment variables with EMOTRUST_ prefix.
    """

    model_config = SettingsConfigDict(env_prefix="EMOTRUST_", case_sensitive=False)

    max_workers: int = Field(default=1, ge=1, description="Thread cap for folds and attack items")
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: Literal["text", "json"] = Field(default="text", description="Log format")


class DataSection(BaseModel):
    """``[data]``: an existing manifest, or generator settings for ``synth``."""

    model_config = ConfigDict(extra="forbid")

    manifest: Optional[Path] = Field(
        default=None, description="Manifest path; defaults to <output_dir>/data/manifest.jsonl"
    )
    synth: SynthConfig = Field(default_factory=SynthConfig)
    scheme: FoldScheme = FoldScheme.SESSION
    folds: int = Field(default=5, ge=2)
    val_policy: ValPolicy = ValPolicy.ONE_SESSION

    @model_validator(mode="after")
    def _check_policy(self) -> "DataSection":
        if self.scheme == FoldScheme.SPEAKER_FRACTION and self.val_policy != ValPolicy.FRACTION:
            raise ValueError("speaker-fraction-fold needs val_policy = 'fraction'")
        return self


class ModelSection(BaseModel):
    """``[model]``: head width, toy encoder and the declared backbone."""

    model_config = ConfigDict(extra="forbid")

    fc_hidden: int = Field(default=64, ge=1)
    encoder: ToyEncoderConfig = Field(default_factory=ToyEncoderConfig)
    backbone: Optional[str] = Field(
        default=None, description="Catalogued backbone whose FLOPs precede the head"
    )
    backbone_flops: Optional[float] = Field(
        default=None, ge=0, description="Explicit backbone FLOPs per inference"
    )

    @model_validator(mode="after")
    def _one_backbone(self) -> "ModelSection":
        if self.backbone is not None and self.backbone_flops is not None:
            raise ValueError("set either backbone or backbone_flops, not both")
        return self


class ProfileSection(BaseModel):
    """``[profile]``: axis overrides, reference cohort and scenario ranking."""

    model_config = ConfigDict(extra="forbid")

    axes: Dict[Axis, AxisOverride] = Field(default_factory=dict)
    reference: bool = False
    reference_uar_percent: float = Field(
        default=65.0, ge=0, le=100, description="Performance assigned to reference rows"
    )
    scenario: Optional[Scenario] = None


class RunConfig(BaseModel):
    """Complete run configuration; unknown keys are rejected at every level."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    output_dir: Path = Path("run")
    model_name: str = "emotrust-head"
    data: DataSection = Field(default_factory=DataSection)
    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainConfig = Field(default_factory=TrainConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    profile: ProfileSection = Field(default_factory=ProfileSection)

    @property
    def manifest_path(self) -> Path:
        return self.data.manifest or self.output_dir / "data" / "manifest.jsonl"

    def train_config(self) -> TrainConfig:
        return self.train.model_copy(update={"seed": self.seed})

    def attack_config(self) -> AttackConfig:
        return self.attack.model_copy(update={"seed": self.seed})
