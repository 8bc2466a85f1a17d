"""Data records for utterance-level multimodal datasets."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, StrictInt, field_validator, model_validator

from ..core.config import Modality
from ..core.errors import DatasetDimensionError, DatasetError

SENTIMENT_LABELS: Tuple[str, ...] = ("negative", "positive")
EMOTION_LABELS: Tuple[str, ...] = (
    "anger", "disgust", "fear", "happy", "sad", "surprise", "no_emotion"
)
NUM_EMOTIONS = len(EMOTION_LABELS)
NO_EMOTION_INDEX = EMOTION_LABELS.index("no_emotion")
# Classes that enter the six-class averages
SIX_EMOTIONS: Tuple[str, ...] = EMOTION_LABELS[:NO_EMOTION_INDEX]

DATASET_FORMAT = "mtmm-es/1"


class Split(str, Enum):
    """Dataset partition."""
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class Utterance(BaseModel):
    """One utterance with pre-averaged features and gold labels."""
    utterance_id: str = Field(..., min_length=1)
    text: List[float]
    acoustic: List[float]
    visual: List[float]
    sentiment: StrictInt
    emotions: List[StrictInt]

    @field_validator('sentiment')
    @classmethod
    def _validate_sentiment(cls, v: int) -> int:
        if v not in (0, 1):
            raise ValueError(f"sentiment must be 0 or 1, got {v}")
        return v

    @field_validator('emotions')
    @classmethod
    def _validate_emotion_bits(cls, v: List[int]) -> List[int]:
        if len(v) != NUM_EMOTIONS:
            raise ValueError(f"emotions must have {NUM_EMOTIONS} entries, got {len(v)}")
        if any(bit not in (0, 1) for bit in v):
            raise ValueError("emotions entries must be 0 or 1")
        return v

    @model_validator(mode='after')
    def _validate_finite_features(self) -> "Utterance":
        for name in ('text', 'acoustic', 'visual'):
            values = getattr(self, name)
            bad = next((i for i, x in enumerate(values) if not math.isfinite(x)), None)
            if bad is not None:
                raise ValueError(
                    f"utterance {self.utterance_id}: {name}[{bad}] = {values[bad]!r} is not a finite number"
                )
        return self

    @model_validator(mode='after')
    def _validate_no_emotion_exclusive(self) -> "Utterance":
        if self.emotions[NO_EMOTION_INDEX] == 1 and any(self.emotions[:NO_EMOTION_INDEX]):
            raise ValueError("no_emotion is set together with an emotion")
        return self

    def vector(self, modality: Modality) -> List[float]:
        return {
            Modality.TEXT: self.text,
            Modality.ACOUSTIC: self.acoustic,
            Modality.VISUAL: self.visual,
        }[modality]


class VideoSample(BaseModel):
    """An ordered utterance sequence from one video."""
    video_id: str = Field(..., min_length=1)
    utterances: List[Utterance] = Field(..., min_length=1)

    @property
    def num_utterances(self) -> int:
        return len(self.utterances)

    @property
    def dims(self) -> Tuple[int, int, int]:
        first = self.utterances[0]
        return (len(first.text), len(first.acoustic), len(first.visual))

    def features(self, modality: Modality) -> np.ndarray:
        """u x d matrix of one modality."""
        return np.array([utt.vector(modality) for utt in self.utterances], dtype=np.float64)

    def sentiment_labels(self) -> np.ndarray:
        return np.array([utt.sentiment for utt in self.utterances], dtype=np.int64)

    def emotion_labels(self) -> np.ndarray:
        """u x 7 matrix of 0/1 flags."""
        return np.array([utt.emotions for utt in self.utterances], dtype=np.int64)


def check_video_dims(video: VideoSample, dims: Tuple[int, int, int]):
    """Raise DatasetDimensionError naming the first utterance that disagrees with ``dims``."""
    for utt in video.utterances:
        actual = (len(utt.text), len(utt.acoustic), len(utt.visual))
        for name, got, want in zip(('text', 'acoustic', 'visual'), actual, dims):
            if got != want:
                raise DatasetDimensionError(
                    f"{name} vector has {got} values, expected {want}",
                    locus=f"utterance {utt.utterance_id}"
                )


@dataclass
class Dataset:
    """Videos sharing one set of feature dimensions."""
    videos: List[VideoSample]
    dims: Tuple[int, int, int]
    split: Split = Split.TRAIN
    _index: Dict[str, int] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 3 or any(d < 1 for d in self.dims):
            raise DatasetError(f"dims must be three positive sizes, got {self.dims}")
        for position, video in enumerate(self.videos):
            if video.video_id in self._index:
                raise DatasetError("duplicate video_id", locus=f"video {video.video_id}")
            self._index[video.video_id] = position
            check_video_dims(video, self.dims)

    def __len__(self) -> int:
        return len(self.videos)

    def __iter__(self):
        return iter(self.videos)

    @property
    def num_utterances(self) -> int:
        return sum(video.num_utterances for video in self.videos)

    def get(self, video_id: str) -> Optional[VideoSample]:
        position = self._index.get(video_id)
        return None if position is None else self.videos[position]
