"""
Binary Tensor Files
===================

Reader and writer for the engine's ``.tsr`` tensor files::

    magic   4 bytes  b"TSRB"
    version u8       1
    dtype   u8       0 (float32, little-endian)
    ndim    u8
    dims    ndim x u64 little-endian
    payload row-major float32 little-endian

Embedding sequences are stored as [L, T, D]; waveforms as [N].
"""

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import structlog

from emotrust.core.exceptions import DataError
from emotrust.tensor import Tensor

logger = structlog.get_logger(__name__)

MAGIC = b"TSRB"
VERSION = 1
DTYPE_F32 = 0

_HEADER = struct.Struct("<4sBBB")
_PAYLOAD_DTYPE = np.dtype("<f4")

PathLike = Union[str, Path]


def encode_tensor(values: Union[Tensor, np.ndarray]) -> bytes:
    """Serialize a finite float tensor to the ``.tsr`` byte layout."""
    array = values.data if isinstance(values, Tensor) else np.asarray(values)
    if array.ndim > 255:
        raise DataError(f"Cannot store a tensor with {array.ndim} dimensions")
    payload = np.ascontiguousarray(array, dtype=_PAYLOAD_DTYPE)
    if not np.all(np.isfinite(payload)):
        raise DataError("Refusing to write non-finite values")
    dims = struct.pack(f"<{array.ndim}Q", *array.shape)
    return _HEADER.pack(MAGIC, VERSION, DTYPE_F32, array.ndim) + dims + payload.tobytes()


def decode_tensor(blob: bytes, path: str = "<memory>") -> Tensor:
    """Parse ``.tsr`` bytes, validating header and payload length."""
    if len(blob) < _HEADER.size:
        raise DataError("truncated header", path=path)
    magic, version, dtype, ndim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"bad magic {magic!r}", path=path)
    if version != VERSION:
        raise DataError(f"unsupported version {version}", path=path)
    if dtype != DTYPE_F32:
        raise DataError(f"unsupported dtype code {dtype}", path=path)

    dims_end = _HEADER.size + 8 * ndim
    if len(blob) < dims_end:
        raise DataError("truncated header", path=path)
    shape: Tuple[int, ...] = struct.unpack_from(f"<{ndim}Q", blob, _HEADER.size)

    expected = 4 * int(np.prod(shape, dtype=np.uint64))
    actual = len(blob) - dims_end
    if actual < expected:
        raise DataError(
            f"truncated payload: expected {expected} bytes, found {actual}", path=path
        )
    if actual > expected:
        raise DataError(
            f"trailing bytes after payload: expected {expected}, found {actual}",
            path=path,
        )

    array = np.frombuffer(blob, dtype=_PAYLOAD_DTYPE, offset=dims_end).reshape(shape)
    return Tensor.from_array(array, dtype=np.float32)


def write_tensor(path: PathLike, values: Union[Tensor, np.ndarray]) -> None:
    """Write a tensor file, creating parent directories as needed."""
    target = Path(path)
    try:
        blob = encode_tensor(values)
    except DataError as e:
        raise DataError(e.message, path=str(target), cause=e.cause)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(blob)


def read_tensor(path: PathLike) -> Tensor:
    """Read a tensor file."""
    source = Path(path)
    try:
        blob = source.read_bytes()
    except OSError as e:
        raise DataError(f"Cannot read tensor file: {e}", path=str(source), cause=e)
    return decode_tensor(blob, path=str(source))
