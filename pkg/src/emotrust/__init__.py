"""
emotrust - Trustworthiness Profiles for Speech Emotion Recognition
==================================================================

Trains downstream emotion heads on frozen speech embeddings and measures them
along five axes: performance, privacy, safety, fairness and sustainability.

Core Features:
- Tape-based reverse-mode autodiff over a small primitive catalogue
- Speaker-independent cross-validation
- FGSM/PGD attacks at a target SNR
- Gender-probe privacy, group fairness and FLOPs accounting
- Deterministic radar SVG profiles
"""

__version__ = "0.1.0"

from emotrust.core.exceptions import EmotrustError  # noqa: E402

__all__ = ["__version__", "EmotrustError"]
