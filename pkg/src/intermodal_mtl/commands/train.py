"""train: fit one model and write its checkpoint, history and reports."""

from pathlib import Path
from typing import Optional, Tuple

from ..core.config import ModelConfig, RunConfig, modality_tag
from ..core.errors import ConfigError
from ..core.logger import get_logger, log_execution
from ..persistence.checkpoint import Checkpoint, save_checkpoint
from ..persistence.exports import write_json, write_report
from ..persistence.models import Dataset, Split
from ..processing.model import ModelParams
from ..processing.training import TrainHistory, bind_dataset_dims, evaluate, train
from .common import (
    CHECKPOINT_FILE,
    HISTORY_FILE,
    add_config_flags,
    load_split,
    prepare_out_dir,
    resolve_run_config,
    write_resolved_config,
)
from .export_attention import export_video_attention

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('train', help='Train a model')
    parser.add_argument('--data', help='Training dataset (JSONL)')
    parser.add_argument('--dev', help='Dev dataset for model selection')
    add_config_flags(parser)
    parser.add_argument('--export-attention', action='store_true', default=None,
                        help='Export attention of the first evaluated video')
    parser.add_argument('--svg', action='store_true', default=None,
                        help='Also render attention heatmaps as SVG')
    parser.set_defaults(handler=run)


def checkpoint_meta(run_config: RunConfig, history: TrainHistory) -> dict:
    return {
        'seed': run_config.training.seed,
        'epochs': len(history.epochs),
        'steps': history.steps,
        'best_epoch': history.best_epoch,
    }


def train_run(
    run_config: RunConfig,
    train_set: Dataset,
    dev_set: Optional[Dataset],
    out_dir: Path
) -> Tuple[ModelParams, ModelConfig]:
    """Train, then write checkpoint, history, resolved config and reports into ``out_dir``."""
    model_config = bind_dataset_dims(run_config.model, train_set)
    run_config = run_config.model_copy(update={'model': model_config})
    options = run_config.training

    params, history = train(
        model_config,
        train_set,
        seed=options.seed,
        dev=dev_set,
        options=options,
        thresholds=run_config.thresholds,
    )

    write_resolved_config(run_config, out_dir)
    save_checkpoint(
        Checkpoint(config=model_config, arrays=params.snapshot(), meta=checkpoint_meta(run_config, history)),
        out_dir / CHECKPOINT_FILE,
    )
    write_json(history.to_dict(), out_dir / HISTORY_FILE)
    write_report(evaluate(params, model_config, train_set, run_config.thresholds), out_dir, 'train_report')
    if dev_set is not None:
        write_report(evaluate(params, model_config, dev_set, run_config.thresholds), out_dir, 'dev_report')

    if run_config.export.attention:
        source = dev_set if dev_set is not None else train_set
        export_video_attention(
            params, model_config, source.videos[0], out_dir / 'attention', svg=run_config.export.svg
        )
    return params, model_config


@log_execution
def run(args) -> int:
    run_config = resolve_run_config(args)
    if not run_config.data.train:
        raise ConfigError("a training dataset is required (--data or data.train in the config)")

    # Inputs are loaded before anything is written
    train_set = load_split(run_config.data.train, Split.TRAIN)
    dev_set = load_split(run_config.data.dev, Split.DEV)
    model_config = bind_dataset_dims(run_config.model, train_set)
    if dev_set is not None:
        bind_dataset_dims(model_config, dev_set)
    run_config = run_config.model_copy(update={'model': model_config})

    out_dir = prepare_out_dir(run_config.output_dir)
    logger.set_context(
        command='train',
        mode=run_config.model.mode.value,
        modalities=modality_tag(run_config.model.modalities),
        seed=run_config.training.seed,
    )
    train_run(run_config, train_set, dev_set, out_dir)
    print(f"trained {run_config.model.mode.value} on {modality_tag(run_config.model.modalities)}; "
          f"outputs in {out_dir}")
    return 0
