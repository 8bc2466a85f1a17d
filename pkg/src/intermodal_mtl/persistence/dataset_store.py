"""JSON Lines dataset files.

Layout (UTF-8, one JSON document per line):

    {"format": "mtmm-es/1", "dims": [d_t, d_a, d_v]}            header, required
    {"video_id": ..., "utterances": [{"utterance_id": ..., "text": [...],
     "acoustic": [...], "visual": [...], "sentiment": 0|1, "emotions": [7 x 0|1]}]}

Floats are written with ``repr`` so a save/load round trip is exact.
"""

import json
from pathlib import Path
from typing import List, Union

from pydantic import ValidationError

from ..core.errors import DatasetError
from ..core.logger import get_logger
from .models import DATASET_FORMAT, Dataset, Split, VideoSample, check_video_dims

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _parse_header(line: str) -> tuple:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatasetError(f"header is not valid JSON: {e.msg}", locus="line 1")
    if not isinstance(header, dict) or header.get('format') != DATASET_FORMAT:
        raise DatasetError(f"header must declare format {DATASET_FORMAT!r}", locus="line 1")
    dims = header.get('dims')
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)
    ):
        raise DatasetError("header dims must be three positive integers", locus="line 1")
    return tuple(dims)


def _first_error(e: ValidationError) -> str:
    error = e.errors()[0]
    where = ".".join(str(part) for part in error.get('loc', ()))
    return f"{where}: {error.get('msg')}" if where else str(error.get('msg'))


def load_dataset(path: PathLike, split: Split = Split.TRAIN) -> Dataset:
    """
    Load and validate a dataset file.

    Args:
        path: JSONL file with the header line first
        split: Split tag of the loaded dataset

    Returns:
        Dataset satisfying every schema invariant

    Raises:
        DatasetError: parse failures (with line locus), dimension mismatches
            (with utterance locus), label invariant violations, non-finite
            features and files holding no videos
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise DatasetError(f"dataset file not found: {file_path}")

    with file_path.open('r', encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise DatasetError("file is empty; a header line is required", locus=str(file_path))

    dims = _parse_header(lines[0])
    videos: List[VideoSample] = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        locus = f"line {number}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetError(f"invalid JSON: {e.msg}", locus=locus)
        try:
            video = VideoSample.model_validate(record)
        except ValidationError as e:
            raise DatasetError(_first_error(e), locus=locus)
        check_video_dims(video, dims)
        videos.append(video)

    if not videos:
        raise DatasetError("file holds no videos", locus=str(file_path))
    dataset = Dataset(videos=videos, dims=dims, split=Split(split))
    logger.info(
        f'Dataset loaded: {len(dataset)} videos',
        path=str(file_path),
        details={'utterances': dataset.num_utterances, 'dims': list(dims), 'split': dataset.split.value}
    )
    return dataset


def dumps_dataset(dataset: Dataset) -> str:
    """Serialize a dataset to its JSONL text."""
    lines = [json.dumps({'format': DATASET_FORMAT, 'dims': list(dataset.dims)})]
    for video in dataset.videos:
        lines.append(json.dumps(video.model_dump(mode='json')))
    return "\n".join(lines) + "\n"


def save_dataset(dataset: Dataset, path: PathLike) -> Path:
    """Write a dataset file, creating parent directories."""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(dumps_dataset(dataset), encoding='utf-8')
    logger.info(f'Dataset written: {len(dataset)} videos', path=str(file_path))
    return file_path
