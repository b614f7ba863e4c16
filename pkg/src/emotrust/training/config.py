"""Training hyperparameters."""

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """
    Supervised training settings for the head.

    Defaults follow the standard downstream protocol: batch 64, learning
    rate 5e-4, 30 epochs for emotion and 10 for the gender probe, inputs
    capped at 6 seconds.
    """

    model_config = ConfigDict(extra="forbid")

    batch_size: int = Field(default=64, ge=1)
    learning_rate: float = Field(default=5e-4, ge=0)
    max_epochs: int = Field(default=30, ge=1)
    privacy_max_epochs: int = Field(default=10, ge=1)
    max_audio_s: float = Field(default=6.0, gt=0)
    seed: int = 0
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)

    def for_fold(self, fold: int) -> "TrainConfig":
        """Fold ``i`` trains with ``seed + i``."""
        return self.model_copy(update={"seed": self.seed + fold})

    def for_privacy_probe(self) -> "TrainConfig":
        return self.model_copy(update={"max_epochs": self.privacy_max_epochs})
