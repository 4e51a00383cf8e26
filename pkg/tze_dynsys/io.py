"""Tensor and vector file formats.

tenz v1 layout::

    tenz v1
    order <m> dim <n>
    dense
    <n^m whitespace-separated values, row-major>
"""
from pathlib import Path
from typing import Union

import numpy as np
import structlog

from tze_dynsys.errors import TensorFormatError
from tze_dynsys.tensor import CubicTensor

logger = structlog.get_logger()

PathLike = Union[str, Path]

TENZ_MAGIC = "tenz v1"


def _parse_floats(tokens, source: str) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in tokens], dtype=float)
    except ValueError as e:
        raise TensorFormatError(f"{source}: non-numeric value ({e})") from e
    if not np.all(np.isfinite(values)):
        raise TensorFormatError(f"{source}: non-finite value")
    return values


def parse_tensor(text: str, source: str = "<string>") -> CubicTensor:
    """Parse tenz v1 text into a CubicTensor."""
    lines = text.splitlines()
    if len(lines) < 3 or lines[0].strip() != TENZ_MAGIC:
        raise TensorFormatError(f"{source}: missing '{TENZ_MAGIC}' header")

    header = lines[1].split()
    if len(header) != 4 or header[0] != "order" or header[2] != "dim":
        raise TensorFormatError(f"{source}: expected 'order <m> dim <n>'")
    try:
        order, dim = int(header[1]), int(header[3])
    except ValueError as e:
        raise TensorFormatError(f"{source}: bad order/dim ({e})") from e
    if order < 3 or dim < 1:
        raise TensorFormatError(f"{source}: order must be >= 3 and dim >= 1")

    if lines[2].strip() != "dense":
        raise TensorFormatError(f"{source}: only 'dense' storage is supported")

    values = _parse_floats(" ".join(lines[3:]).split(), source)
    expected = dim**order
    if values.size != expected:
        raise TensorFormatError(
            f"{source}: expected {expected} values, found {values.size}"
        )
    return CubicTensor.from_flat(values, order, dim)


def format_tensor(T: CubicTensor) -> str:
    """Render a tensor as tenz v1 text, one mode-1 row of values per line."""
    lines = [TENZ_MAGIC, f"order {T.order} dim {T.dim}", "dense"]
    rows = T.flat.reshape(-1, T.dim)
    lines.extend(" ".join(repr(float(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_tensor(path: PathLike) -> CubicTensor:
    """Read a tenz v1 file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise TensorFormatError(f"cannot read tensor file {path}: {e}") from e
    tensor = parse_tensor(text, source=str(path))
    logger.debug("Read tensor", path=str(path), order=tensor.order, dim=tensor.dim)
    return tensor


def write_tensor(T: CubicTensor, path: PathLike) -> None:
    """Write a tenz v1 file."""
    Path(path).write_text(format_tensor(T))
    logger.debug("Wrote tensor", path=str(path), order=T.order, dim=T.dim)


def read_vector(path: PathLike) -> np.ndarray:
    """Read whitespace-separated vector entries."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise TensorFormatError(f"cannot read vector file {path}: {e}") from e
    values = _parse_floats(text.split(), str(path))
    if values.size == 0:
        raise TensorFormatError(f"{path}: empty vector file")
    return values


def write_vector(x: np.ndarray, path: PathLike) -> None:
    """Write one vector entry per line."""
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.ravel(x)))
