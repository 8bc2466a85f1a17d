"""Seeded partition of a dataset into batches of whole videos."""

from typing import List, Sequence, Union

import numpy as np

from ..persistence.models import Dataset, VideoSample


def batch_videos(
    dataset: Dataset,
    batch_size: int,
    seed: Union[int, Sequence[int]]
) -> List[List[VideoSample]]:
    """
    Shuffle videos with ``seed`` and cut them into batches.

    Videos are never split or padded; each keeps its own utterance sequence,
    so attention stays inside one video.

    Args:
        dataset: Source videos
        batch_size: Maximum videos per batch, >= 1
        seed: Shuffle seed, or a seed sequence such as (run seed, epoch)

    Returns:
        Ordered batches whose union is the dataset, without duplicates
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = np.random.default_rng(seed).permutation(len(dataset))
    videos = [dataset.videos[i] for i in order]
    return [videos[start:start + batch_size] for start in range(0, len(videos), batch_size)]
