"""
Perturbations
=============

SNR-constrained budgets, the one-step and iterated sign-gradient attacks,
and the Gaussian-noise baseline. All adversarial arithmetic is float32 so a
single full PGD step reproduces FGSM bit for bit.
"""

import math

import numpy as np
import structlog

from emotrust.attacks.targets import AttackTarget
from emotrust.core.exceptions import AttackError

logger = structlog.get_logger(__name__)


def rms(x: np.ndarray) -> float:
    values = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(values * values)))


def measured_snr_db(x: np.ndarray, perturbed: np.ndarray) -> float:
    """10*log10 of signal power over perturbation power."""
    delta = np.asarray(perturbed, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    noise = rms(delta)
    if noise == 0.0:
        return math.inf
    return 20.0 * math.log10(rms(x) / noise)


def epsilon_for_snr(x: np.ndarray, snr_db: float) -> float:
    """
    L-infinity budget ``rms(x) * 10**(-snr_db / 20)``.

    A sign perturbation of this size has exactly the requested SNR. An
    all-zero input has no meaningful SNR and gets a zero budget.
    """
    if np.size(x) == 0:
        raise AttackError("Cannot derive a budget for an empty input")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    level = rms(x)
    if level == 0.0:
        logger.warning("Zero-rms input; using a zero perturbation budget")
        return 0.0
    return level * 10.0 ** (-snr_db / 20.0)


def _signed_gradient(target: AttackTarget, x: np.ndarray, label: int) -> np.ndarray:
    _, grad = target.gradient(x, label)
    if not np.all(np.isfinite(grad)):
        raise AttackError(
            "Input gradient is non-finite",
            context={"nonfinite": int(np.size(grad) - np.isfinite(grad).sum())},
        )
    return np.sign(grad).astype(np.float32)


def _as_input(x: np.ndarray) -> np.ndarray:
    return np.array(x, dtype=np.float32, copy=True)


def fgsm(
    target: AttackTarget, x: np.ndarray, label: int, epsilon: float, clip: bool = False
) -> np.ndarray:
    """
    One signed-gradient step ``x + epsilon * sign(grad_x loss)``.

    Uses exactly one gradient evaluation; ``sign(0)`` is 0.
    """
    if epsilon < 0:
        raise AttackError(f"Budget must be non-negative, got {epsilon}", attack="fgsm")
    x0 = _as_input(x)
    direction = _signed_gradient(target, x0, label)
    if epsilon == 0:
        return x0
    adv = x0 + np.float32(epsilon) * direction
    return np.clip(adv, -1.0, 1.0).astype(np.float32) if clip else adv


def pgd(
    target: AttackTarget,
    x: np.ndarray,
    label: int,
    epsilon: float,
    alpha: float,
    steps: int,
    clip: bool = False,
) -> np.ndarray:
    """
    Iterated signed steps of size ``alpha``, projected onto the L-infinity
    ball of radius ``epsilon`` around ``x`` after every step.
    """
    if steps < 1 or alpha <= 0 or epsilon < 0:
        raise AttackError(
            f"Invalid PGD settings: steps={steps}, alpha={alpha}, epsilon={epsilon}",
            attack="pgd",
        )
    x0 = _as_input(x)
    if epsilon == 0:
        return x0
    eps32, alpha32 = np.float32(epsilon), np.float32(alpha)
    lower, upper = x0 - eps32, x0 + eps32
    adv = x0.copy()
    for _ in range(steps):
        adv = adv + alpha32 * _signed_gradient(target, adv, label)
        adv = np.minimum(np.maximum(adv, lower), upper)
        if clip:
            adv = np.clip(adv, -1.0, 1.0).astype(np.float32)
    return adv


def gaussian_perturb(x: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """
    Add zero-mean Gaussian noise rescaled to the exact rms for ``snr_db``.

    An infinite SNR returns the input unchanged.
    """
    x0 = _as_input(x)
    if math.isinf(snr_db) and snr_db > 0:
        return x0
    if not math.isfinite(snr_db):
        raise AttackError(f"SNR must be finite or +inf, got {snr_db}", attack="gaussian")
    level = rms(x0)
    if level == 0.0:
        raise AttackError("Cannot set an SNR against an all-zero input", attack="gaussian")
    noise = np.random.default_rng(seed).standard_normal(x0.shape)
    noise *= level * 10.0 ** (-snr_db / 20.0) / rms(noise)
    return (x0.astype(np.float64) + noise).astype(np.float32)
