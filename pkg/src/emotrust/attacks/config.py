"""Attack settings."""

import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from emotrust.core.types import AttackKind, AttackSurface


class AttackConfig(BaseModel):
    """
    How test items are perturbed.

    ``snr_db`` fixes each item's L-infinity budget from its own rms. ``clean``
    is the infinite-SNR switch: a zero budget for gradient attacks and no
    noise for the Gaussian baseline. The PGD step is ``pgd_step_size`` when
    given, otherwise ``pgd_step_ratio`` times the item's budget.
    """

    model_config = ConfigDict(extra="forbid")

    kind: AttackKind = AttackKind.FGSM
    snr_db: float = 45.0
    clean: bool = False
    surface: AttackSurface = AttackSurface.EMBEDDING
    pgd_steps: int = Field(default=10, ge=1)
    pgd_step_size: Optional[float] = Field(default=None, gt=0)
    pgd_step_ratio: float = Field(default=0.25, gt=0)
    clip: bool = Field(default=False, description="Clip adversarial waveforms to [-1, 1]")
    seed: int = 0
    sweep_snr_db: List[float] = Field(default_factory=list)

    @field_validator("snr_db")
    @classmethod
    def _finite_snr(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("snr_db must be finite; set clean = true for an unperturbed run")
        return v

    @field_validator("sweep_snr_db")
    @classmethod
    def _finite_sweep(cls, v: List[float]) -> List[float]:
        if any(not math.isfinite(s) for s in v):
            raise ValueError("sweep_snr_db entries must be finite")
        return v

    @property
    def effective_snr_db(self) -> float:
        return math.inf if self.clean else self.snr_db

    def step_size(self, epsilon: float) -> float:
        if self.pgd_step_size is not None:
            return self.pgd_step_size
        return self.pgd_step_ratio * epsilon
