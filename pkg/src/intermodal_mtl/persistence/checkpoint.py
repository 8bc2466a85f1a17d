"""Textual parameter checkpoints.

Layout:

    intermodal-mtl-checkpoint <version>
    config <ModelConfig as one-line JSON>
    meta <one-line JSON of free-form run metadata>
    params <count>
    param <name> <rows> <cols>
    <row 1 values, space separated, %.17g>
    ...
    end

Values printed with 17 significant digits parse back to the same float64,
so save/load is bit-exact.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from ..core.config import ModelConfig, validate_model_config
from ..core.errors import CheckpointError
from ..core.logger import get_logger

logger = get_logger(__name__)

CHECKPOINT_MAGIC = "intermodal-mtl-checkpoint"
CHECKPOINT_VERSION = 1

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    """Model config, parameter arrays and run metadata."""
    config: ModelConfig
    arrays: Dict[str, np.ndarray]
    meta: Dict[str, Any] = field(default_factory=dict)


def _format_row(row: np.ndarray) -> str:
    return " ".join(f"{value:.17g}" for value in row)


def dumps_checkpoint(checkpoint: Checkpoint) -> str:
    lines: List[str] = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
        "config " + json.dumps(checkpoint.config.model_dump(mode='json'), sort_keys=True),
        "meta " + json.dumps(checkpoint.meta, sort_keys=True),
        f"params {len(checkpoint.arrays)}",
    ]
    for name, array in checkpoint.arrays.items():
        rows, cols = array.shape
        lines.append(f"param {name} {rows} {cols}")
        lines.extend(_format_row(row) for row in array)
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_checkpoint(checkpoint: Checkpoint, path: PathLike) -> Path:
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(dumps_checkpoint(checkpoint), encoding='utf-8')
    logger.info('Checkpoint written', path=str(file_path),
                details={'parameters': len(checkpoint.arrays)})
    return file_path


def _expect(lines: List[str], position: int, prefix: str) -> str:
    if position >= len(lines) or not lines[position].startswith(prefix):
        raise CheckpointError(f"line {position + 1}: expected '{prefix.strip()}' record")
    return lines[position][len(prefix):]


def loads_checkpoint(text: str) -> Checkpoint:
    """Parse checkpoint text, raising CheckpointError on any corruption."""
    lines = text.splitlines()
    if not lines:
        raise CheckpointError("checkpoint is empty")

    header = lines[0].split()
    if len(header) != 2 or header[0] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad header)")
    if header[1] != str(CHECKPOINT_VERSION):
        raise CheckpointError(
            f"unsupported checkpoint version {header[1]!r}; expected {CHECKPOINT_VERSION}"
        )

    try:
        config = validate_model_config(json.loads(_expect(lines, 1, "config ")))
        meta = json.loads(_expect(lines, 2, "meta "))
        count = int(_expect(lines, 3, "params "))
    except (json.JSONDecodeError, ValueError) as e:
        if isinstance(e, CheckpointError):
            raise
        raise CheckpointError(f"malformed checkpoint preamble: {e}")

    arrays: Dict[str, np.ndarray] = {}
    position = 4
    for _ in range(count):
        fields = _expect(lines, position, "param ").split()
        if len(fields) != 3:
            raise CheckpointError(f"line {position + 1}: malformed param record")
        name = fields[0]
        try:
            rows, cols = int(fields[1]), int(fields[2])
        except ValueError:
            raise CheckpointError(f"line {position + 1}: non-integer shape for {name}")
        if name in arrays:
            raise CheckpointError(f"line {position + 1}: duplicate parameter {name}")
        body = lines[position + 1:position + 1 + rows]
        if len(body) != rows:
            raise CheckpointError(f"parameter {name}: truncated values")
        try:
            values = np.array([[float(v) for v in line.split()] for line in body], dtype=np.float64)
        except ValueError:
            raise CheckpointError(f"parameter {name}: non-numeric value")
        if values.shape != (rows, cols):
            raise CheckpointError(f"parameter {name}: expected shape {(rows, cols)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise CheckpointError(f"parameter {name}: non-finite value")
        arrays[name] = values
        position += 1 + rows

    if position >= len(lines) or lines[position].strip() != "end":
        raise CheckpointError("checkpoint is truncated (missing end marker)")
    return Checkpoint(config=config, arrays=arrays, meta=meta)


def load_checkpoint(path: PathLike) -> Checkpoint:
    file_path = Path(path)
    if not file_path.is_file():
        raise CheckpointError(f"checkpoint not found: {file_path}")
    try:
        text = file_path.read_text(encoding='utf-8')
    except UnicodeDecodeError:
        raise CheckpointError(f"checkpoint {file_path} is not UTF-8 text")
    return loads_checkpoint(text)
