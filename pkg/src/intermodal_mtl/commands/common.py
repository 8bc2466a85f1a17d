"""Helpers shared by the command modules."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..core.config import RunConfig, TaskMode, load_run_config
from ..core.errors import ConfigError
from ..core.logger import get_logger
from ..persistence.dataset_store import load_dataset
from ..persistence.models import Dataset, Split

logger = get_logger(__name__)

RESOLVED_CONFIG_FILE = "config.resolved.json"
CHECKPOINT_FILE = "checkpoint.txt"
HISTORY_FILE = "history.json"


def parse_int_list(value: str, what: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers, got {value!r}")


def parse_dims(value: str) -> Tuple[int, int, int]:
    dims = parse_int_list(value, "--dims")
    if len(dims) != 3:
        raise ConfigError(f"--dims needs three values (text,acoustic,visual), got {value!r}")
    return tuple(dims)


def parse_thresholds(value: Optional[str]) -> Optional[Dict[str, float]]:
    """``"0.4,0.2"`` into ``{'f1': 0.4, 'wacc': 0.2}``."""
    if value is None:
        return None
    parts = value.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--thresholds needs F1,WACC, got {value!r}")
    try:
        return {'f1': float(parts[0]), 'wacc': float(parts[1])}
    except ValueError:
        raise ConfigError(f"--thresholds values must be numbers, got {value!r}")


def add_config_flags(parser, grid: bool = False):
    """Flags shared by commands that build or train models.

    Grid commands choose mode and modalities per cell, so they skip those flags.
    """
    parser.add_argument('--config', help='YAML or JSON run config file')
    if not grid:
        parser.add_argument('--mode', choices=[m.value for m in TaskMode], help='Task regime')
        parser.add_argument('--modalities', help='Modality subset, e.g. t,a,v or tv')
    parser.add_argument('--seed', type=int, help='Run seed')
    parser.add_argument('--epochs', type=int, help='Training epochs')
    parser.add_argument('--batch-size', type=int, help='Videos per batch')
    parser.add_argument('--lr', type=float, help='Adam learning rate')
    parser.add_argument('--grad-clip', type=float, help='Global gradient-norm clip (off by default)')
    parser.add_argument('--thresholds', help='Emotion thresholds F1,WACC (default 0.4,0.2)')
    parser.add_argument('--out', help='Output directory')


def config_overrides(args) -> Dict[str, Any]:
    """Nested override dict from parsed flags; unset flags stay None."""
    def get(name: str) -> Any:
        return getattr(args, name, None)

    return {
        'model': {'mode': get('mode'), 'modalities': get('modalities')},
        'training': {
            'seed': get('seed'),
            'epochs': get('epochs'),
            'batch_size': get('batch_size'),
            'learning_rate': get('lr'),
            'grad_clip': get('grad_clip'),
        },
        'thresholds': parse_thresholds(get('thresholds')),
        'data': {'train': get('data'), 'dev': get('dev'), 'test': get('test')},
        'export': {'attention': get('export_attention'), 'svg': get('svg')},
        'output_dir': get('out'),
    }


def resolve_run_config(args) -> RunConfig:
    return load_run_config(getattr(args, 'config', None), config_overrides(args))


def load_split(path: Optional[str], split: Split) -> Optional[Dataset]:
    return load_dataset(path, split) if path else None


def prepare_out_dir(path: str) -> Path:
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {directory}: {e}")
    return directory


def write_resolved_config(run_config: RunConfig, out_dir: Path) -> Path:
    path = out_dir / RESOLVED_CONFIG_FILE
    path.write_text(run_config.to_json(), encoding='utf-8')
    return path

