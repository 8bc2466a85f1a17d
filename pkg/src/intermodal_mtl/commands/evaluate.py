"""eval: score a checkpoint on a dataset."""

from ..core.config import Thresholds
from ..core.errors import ConfigError
from ..core.logger import get_logger, log_execution
from ..persistence.checkpoint import load_checkpoint
from ..persistence.dataset_store import load_dataset
from ..persistence.exports import write_report
from ..persistence.models import Split
from ..processing.metrics import MetricsReport
from ..processing.model import restore_params
from ..processing.training import bind_dataset_dims, evaluate
from .common import parse_thresholds, prepare_out_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('eval', help='Evaluate a checkpoint')
    parser.add_argument('--checkpoint', required=True, help='Checkpoint file')
    parser.add_argument('--data', required=True, help='Dataset to score (JSONL)')
    parser.add_argument('--thresholds', help='Emotion thresholds F1,WACC (default 0.4,0.2)')
    parser.add_argument('--out', help='Directory for report.json and report.txt')
    parser.set_defaults(handler=run)


def evaluate_checkpoint(checkpoint_path: str, data_path: str, thresholds: Thresholds) -> MetricsReport:
    checkpoint = load_checkpoint(checkpoint_path)
    dataset = load_dataset(data_path, Split.TEST)
    config = bind_dataset_dims(checkpoint.config, dataset)
    params = restore_params(config, checkpoint.arrays)
    return evaluate(params, config, dataset, thresholds)


@log_execution
def run(args) -> int:
    try:
        thresholds = Thresholds(**(parse_thresholds(args.thresholds) or {}))
    except ValueError as e:
        raise ConfigError(f"invalid thresholds: {e}")

    report = evaluate_checkpoint(args.checkpoint, args.data, thresholds)
    if args.out:
        write_report(report, prepare_out_dir(args.out), 'report')
    print(report.to_text(), end='')
    return 0
