"""
Emotrust Core Exceptions
========================

Exception hierarchy for the evaluation engine. Every error carries a stable
``code`` for machine-readable CLI output plus a context dictionary.
"""

from typing import Any, Dict, Optional, Sequence


class EmotrustError(Exception):
    """Base exception for all engine errors."""

    code = "EMOTRUST_ERROR"

    def __init__(
        self,
        message: str,
        context: Optional[Dict[str, Any]] = None,
        cause: Optional[Exception] = None,
    ):
        super().__init__(message)
        self.message = message
        self.context = context or {}
        self.cause = cause

    def __str__(self) -> str:
        """Return formatted error message with context."""
        parts = [self.message]

        if self.context:
            context_str = ", ".join(f"{k}={v}" for k, v in self.context.items())
            parts.append(f"Context: {context_str}")

        if self.cause:
            parts.append(f"Caused by: {self.cause}")

        return " | ".join(parts)


class TensorError(EmotrustError):
    """Raised when a tensor primitive rejects its operands or output."""

    code = "TENSOR_ERROR"

    def __init__(
        self,
        message: str,
        primitive: Optional[str] = None,
        shapes: Optional[Sequence[Sequence[int]]] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if primitive:
            context["primitive"] = primitive
        if shapes is not None:
            context["shapes"] = [tuple(s) for s in shapes]

        super().__init__(message, context, kwargs.get("cause"))


class DataError(EmotrustError):
    """Raised for malformed manifests, tensor files and fold plans."""

    code = "DATA_ERROR"

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if path:
            context["path"] = path
        if line is not None:
            context["line"] = line

        super().__init__(message, context, kwargs.get("cause"))


class ConfigError(EmotrustError):
    """Raised when there's an issue with configuration."""

    code = "CONFIG_ERROR"

    def __init__(
        self,
        message: str,
        config_path: Optional[str] = None,
        config_key: Optional[str] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if config_path:
            context["config_path"] = config_path
        if config_key:
            context["config_key"] = config_key

        super().__init__(message, context, kwargs.get("cause"))


class ModelError(EmotrustError):
    """Raised when head or encoder shapes/parameters are inconsistent."""

    code = "MODEL_ERROR"

    def __init__(self, message: str, component: Optional[str] = None, **kwargs: Any):
        context = kwargs.get("context", {})
        if component:
            context["component"] = component

        super().__init__(message, context, kwargs.get("cause"))


class TrainingError(EmotrustError):
    """Raised when training diverges or its inputs are unusable."""

    code = "TRAINING_ERROR"

    def __init__(
        self,
        message: str,
        epoch: Optional[int] = None,
        batch: Optional[int] = None,
        fold: Optional[int] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if fold is not None:
            context["fold"] = fold
        if epoch is not None:
            context["epoch"] = epoch
        if batch is not None:
            context["batch"] = batch

        super().__init__(message, context, kwargs.get("cause"))


class AttackError(EmotrustError):
    """Raised when an adversarial or noise attack cannot be computed."""

    code = "ATTACK_ERROR"

    def __init__(
        self,
        message: str,
        item_id: Optional[str] = None,
        attack: Optional[str] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if item_id:
            context["item_id"] = item_id
        if attack:
            context["attack"] = attack

        super().__init__(message, context, kwargs.get("cause"))


class MetricError(EmotrustError):
    """Raised when a metric is undefined for its input."""

    code = "METRIC_ERROR"

    def __init__(self, message: str, metric: Optional[str] = None, **kwargs: Any):
        context = kwargs.get("context", {})
        if metric:
            context["metric"] = metric

        super().__init__(message, context, kwargs.get("cause"))


class ProfileError(EmotrustError):
    """Raised for incomplete reports and invalid axis specifications."""

    code = "PROFILE_ERROR"

    def __init__(
        self,
        message: str,
        axis: Optional[str] = None,
        source: Optional[str] = None,
        **kwargs: Any,
    ):
        context = kwargs.get("context", {})
        if axis:
            context["axis"] = axis
        if source:
            context["source"] = source

        super().__init__(message, context, kwargs.get("cause"))
