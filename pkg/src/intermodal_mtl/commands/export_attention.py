"""export-attention: dump pairwise attention scores of one video."""

from pathlib import Path
from typing import Dict

from ..core.config import ModelConfig
from ..core.errors import DatasetError
from ..core.logger import get_logger, log_execution
from ..persistence.checkpoint import load_checkpoint
from ..persistence.dataset_store import load_dataset
from ..persistence.exports import write_attention_csv, write_attention_svg
from ..persistence.models import Split, VideoSample
from ..processing.model import ModelParams, forward, restore_params
from ..processing.training import bind_dataset_dims
from .common import prepare_out_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('export-attention', help='Export N1/N2 attention scores of a video')
    parser.add_argument('--checkpoint', required=True, help='Checkpoint file')
    parser.add_argument('--data', required=True, help='Dataset holding the video')
    parser.add_argument('--video-id', required=True, help='Video to export')
    parser.add_argument('--out', required=True, help='Output directory')
    parser.add_argument('--svg', action='store_true', help='Also render SVG heatmaps')
    parser.set_defaults(handler=run)


def export_video_attention(
    params: ModelParams,
    config: ModelConfig,
    video: VideoSample,
    out_dir: Path,
    svg: bool = False
) -> Dict[str, Path]:
    """
    Write ``attention_<pair>.csv`` (and optionally ``.svg``) per attention block.

    Pairs are ``tv``, ``av`` and ``ta`` for multi-modal models and the
    self-attention block (``tt``, ``aa`` or ``vv``) for uni-modal ones.

    Returns:
        CSV path per pair key
    """
    out = forward(video, params, config, training=False)
    directory = prepare_out_dir(str(out_dir))
    written: Dict[str, Path] = {}
    for key, pair in out.attention.items():
        written[key] = write_attention_csv(pair.N1.data, pair.N2.data, directory / f"attention_{key}.csv")
        if svg:
            write_attention_svg(
                pair.N1.data,
                pair.N2.data,
                f"{video.video_id} {key.upper()}",
                directory / f"attention_{key}.svg",
            )
    logger.info(
        'Attention exported',
        video_id=video.video_id,
        path=str(directory),
        details={'pairs': sorted(written)}
    )
    return written


@log_execution
def run(args) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data, Split.TEST)
    config = bind_dataset_dims(checkpoint.config, dataset)
    params = restore_params(config, checkpoint.arrays)

    video = dataset.get(args.video_id)
    if video is None:
        raise DatasetError(f"unknown video id {args.video_id!r}", locus=str(args.data))

    written = export_video_attention(params, config, video, Path(args.out), svg=args.svg)
    for key in sorted(written):
        print(written[key])
    return 0
