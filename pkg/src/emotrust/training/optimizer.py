"""
Adam Optimizer
==============

Bias-corrected Adam over named head parameters. Moments are kept in float64;
each step returns a new ``HeadParams``.
"""

from typing import Dict, Mapping

import numpy as np

from emotrust.model.head import PARAM_NAMES, HeadParams
from emotrust.training.config import TrainConfig


class Adam:
    """Adam state for one training run."""

    def __init__(self, cfg: TrainConfig):
        self.lr = cfg.learning_rate
        self.beta1 = cfg.beta1
        self.beta2 = cfg.beta2
        self.eps = cfg.eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: HeadParams, grads: Mapping[str, np.ndarray]) -> HeadParams:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        updated: Dict[str, np.ndarray] = {}
        for name in PARAM_NAMES:
            g = np.asarray(grads[name], dtype=np.float64)
            m = self.m.get(name, np.zeros_like(g))
            v = self.v.get(name, np.zeros_like(g))
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            self.m[name], self.v[name] = m, v
            step = self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            updated[name] = np.asarray(params[name], dtype=np.float64) - step
        return params.replace(updated)
