"""Adversarial and noise attacks with success-rate evaluation."""

from emotrust.attacks.config import AttackConfig
from emotrust.attacks.evaluation import (
    AttackItem,
    AttackReport,
    AttackRow,
    RobustnessCurve,
    attack_success_rate,
    items_from_examples,
    pooled_attack_success_rate,
    pooled_robustness_curve,
    robustness_curve,
)
from emotrust.attacks.perturb import (
    epsilon_for_snr,
    fgsm,
    gaussian_perturb,
    measured_snr_db,
    pgd,
)
from emotrust.attacks.targets import (
    AttackTarget,
    EncoderHeadTarget,
    HeadTarget,
    LinearTarget,
    build_target,
)

__all__ = [
    "AttackConfig",
    "AttackTarget",
    "HeadTarget",
    "EncoderHeadTarget",
    "LinearTarget",
    "build_target",
    "epsilon_for_snr",
    "measured_snr_db",
    "fgsm",
    "pgd",
    "gaussian_perturb",
    "AttackItem",
    "AttackRow",
    "AttackReport",
    "RobustnessCurve",
    "attack_success_rate",
    "items_from_examples",
    "pooled_attack_success_rate",
    "robustness_curve",
    "pooled_robustness_curve",
]
