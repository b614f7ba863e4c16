"""
Parameter Bundles
=================

Head parameters on disk: one ``.tsr`` file per tensor plus ``index.json``
listing the head configuration and each tensor's name, shape and file.
"""

import json
from pathlib import Path
from typing import Dict, Union

import numpy as np
import structlog

from emotrust.core.exceptions import DataError, ModelError
from emotrust.dataio.tensorfile import read_tensor, write_tensor
from emotrust.model.head import PARAM_NAMES, HeadConfig, HeadParams

logger = structlog.get_logger(__name__)

INDEX_FILE = "index.json"
BUNDLE_VERSION = 1


def save_head(params: HeadParams, directory: Union[str, Path]) -> Path:
    """Write a parameter bundle and return its index path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for name in PARAM_NAMES:
        filename = f"{name}.tsr"
        write_tensor(root / filename, params[name])
        entries.append({"name": name, "shape": list(params[name].shape), "file": filename})

    index = {
        "version": BUNDLE_VERSION,
        "config": params.config.model_dump(mode="json"),
        "tensors": entries,
    }
    target = root / INDEX_FILE
    target.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Head bundle saved", path=str(root))
    return target


def load_head(directory: Union[str, Path]) -> HeadParams:
    """Read a parameter bundle, checking shapes against the stored config."""
    root = Path(directory)
    try:
        index = json.loads((root / INDEX_FILE).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ModelError(f"Cannot read head bundle index: {e}", component=str(root), cause=e)

    if index.get("version") != BUNDLE_VERSION:
        raise ModelError(f"Unsupported bundle version {index.get('version')}", component=str(root))
    config = HeadConfig.model_validate(index["config"])

    values: Dict[str, np.ndarray] = {}
    for entry in index.get("tensors", []):
        try:
            tensor = read_tensor(root / entry["file"])
        except DataError as e:
            raise ModelError(
                f"Cannot read {entry['name']}: {e.message}", component=str(root), cause=e
            )
        if list(tensor.shape) != list(entry["shape"]):
            raise ModelError(
                f"{entry['name']} has shape {tensor.shape}, index says {entry['shape']}",
                component=str(root),
            )
        values[entry["name"]] = tensor.data
    return HeadParams(config, values)
