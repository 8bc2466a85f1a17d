"""Deterministic synthetic datasets with learnable labels.

Every label owns a latent prototype vector per modality: one per sentiment
class and one per emotion class (no_emotion included). An utterance's
features are the sum of the prototypes of its labels plus Gaussian noise
scaled by ``noise_scale``, so labels are a learnable function of features.

Emotions are drawn conditionally on sentiment. With correlation ``c`` and
positive rate ``q``, an emotion of base rate ``b`` that leans positive is
drawn with probability ``b(1 + c(1-q))`` for positive utterances and
``b(1 - cq)`` for negative ones (mirrored for emotions leaning negative),
which keeps its marginal rate at ``b``. Utterances with no drawn emotion get the exclusive
no_emotion flag.
"""

from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.config import Modality
from ..core.errors import ConfigError
from ..core.logger import get_logger
from ..persistence.models import (
    EMOTION_LABELS,
    NO_EMOTION_INDEX,
    SIX_EMOTIONS,
    Dataset,
    Split,
    Utterance,
    VideoSample,
)

logger = get_logger(__name__)

# Training-split label counts of the reference corpus, out of 16216 utterances
_REFERENCE_UTTERANCES = 16216
DEFAULT_CLASS_PROPORTIONS: Dict[str, float] = {
    'positive': 11499 / _REFERENCE_UTTERANCES,
    'anger': 3506 / _REFERENCE_UTTERANCES,
    'disgust': 2946 / _REFERENCE_UTTERANCES,
    'fear': 1306 / _REFERENCE_UTTERANCES,
    'happy': 8673 / _REFERENCE_UTTERANCES,
    'sad': 4233 / _REFERENCE_UTTERANCES,
    'surprise': 1631 / _REFERENCE_UTTERANCES,
}

# +1 leans positive, -1 leans negative
EMOTION_VALENCE: Dict[str, int] = {
    'anger': -1,
    'disgust': -1,
    'fear': -1,
    'happy': 1,
    'sad': -1,
    'surprise': 1,
}

_SPLIT_STREAM = {Split.TRAIN: 1, Split.DEV: 2, Split.TEST: 3}


class SynthSpec(BaseModel):
    """Shape and label distribution of a synthetic dataset."""
    model_config = ConfigDict(frozen=True)

    n_videos: int = Field(8, ge=1)
    u_range: Tuple[int, int] = (3, 8)
    dims: Tuple[int, int, int] = (20, 12, 12)
    class_proportions: Dict[str, float] = Field(
        default_factory=lambda: dict(DEFAULT_CLASS_PROPORTIONS)
    )
    noise_scale: float = Field(0.05, ge=0.0)
    correlation: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator('dims')
    @classmethod
    def _positive_dims(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(d < 1 for d in v):
            raise ValueError(f"dims must be positive, got {v}")
        return v

    @field_validator('class_proportions')
    @classmethod
    def _complete_proportions(cls, v: Dict[str, float]) -> Dict[str, float]:
        merged = dict(DEFAULT_CLASS_PROPORTIONS)
        for key, value in v.items():
            if key not in merged:
                raise ValueError(f"unknown class {key!r}; expected one of {sorted(merged)}")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"proportion of {key!r} must be in [0, 1], got {value}")
            merged[key] = float(value)
        return merged

    @model_validator(mode='after')
    def _valid_u_range(self) -> "SynthSpec":
        low, high = self.u_range
        if low < 1 or high < low:
            raise ValueError(f"u_range must satisfy 1 <= low <= high, got {self.u_range}")
        return self


def make_synth_spec(**fields) -> SynthSpec:
    """Validate synthetic-dataset fields, raising ConfigError."""
    try:
        return SynthSpec(**fields)
    except ValidationError as e:
        raise ConfigError(f"Invalid synthetic dataset spec: {e}")


def emotion_rates(spec: SynthSpec, sentiment: int) -> np.ndarray:
    """Per-emotion draw probabilities given a sentiment (six emotions)."""
    q = spec.class_proportions['positive']
    c = spec.correlation
    rates = []
    for name in SIX_EMOTIONS:
        base = spec.class_proportions[name]
        agrees = (EMOTION_VALENCE[name] > 0) == (sentiment == 1)
        if EMOTION_VALENCE[name] > 0:
            rate = base * (1 + c * (1 - q)) if agrees else base * (1 - c * q)
        else:
            rate = base * (1 + c * q) if agrees else base * (1 - c * (1 - q))
        rates.append(min(max(rate, 0.0), 1.0))
    return np.array(rates)


def _prototypes(dims: Tuple[int, int, int], seed: int) -> Dict[Modality, np.ndarray]:
    """Per modality: rows 0-1 sentiment classes, rows 2-8 emotion classes."""
    rng = np.random.default_rng([seed, 0])
    n_labels = 2 + len(EMOTION_LABELS)
    return {
        modality: rng.standard_normal((n_labels, dim))
        for modality, dim in zip((Modality.TEXT, Modality.ACOUSTIC, Modality.VISUAL), dims)
    }


def _label_rows(sentiment: int, emotions: List[int]) -> List[int]:
    return [sentiment] + [2 + i for i, bit in enumerate(emotions) if bit]


def synthesize_dataset(spec: SynthSpec, seed: int, split: Split = Split.TRAIN) -> Dataset:
    """
    Generate a dataset deterministically from ``(spec, seed, split)``.

    Splits generated with the same seed share prototypes and differ only in
    the sampled utterances.

    Args:
        spec: Dataset shape and label distribution
        seed: Seed of prototypes and sampling
        split: Split tag, also selects the sampling stream

    Returns:
        Dataset with ``spec.n_videos`` videos
    """
    split = Split(split)
    prototypes = _prototypes(spec.dims, seed)
    rng = np.random.default_rng([seed, _SPLIT_STREAM[split]])
    low, high = spec.u_range
    q = spec.class_proportions['positive']
    rates = {s: emotion_rates(spec, s) for s in (0, 1)}

    videos: List[VideoSample] = []
    for v in range(spec.n_videos):
        video_id = f"{split.value}_{v:05d}"
        u = int(rng.integers(low, high + 1))
        utterances = []
        for j in range(u):
            sentiment = int(rng.random() < q)
            drawn = (rng.random(len(SIX_EMOTIONS)) < rates[sentiment]).astype(int).tolist()
            emotions = drawn + [0]
            if not any(drawn):
                emotions[NO_EMOTION_INDEX] = 1

            rows = _label_rows(sentiment, emotions)
            vectors = {}
            for modality in (Modality.TEXT, Modality.ACOUSTIC, Modality.VISUAL):
                proto = prototypes[modality][rows].sum(axis=0)
                noise = rng.standard_normal(proto.shape) * spec.noise_scale
                vectors[modality] = (proto + noise).tolist()

            utterances.append(Utterance(
                utterance_id=f"{video_id}_u{j:03d}",
                text=vectors[Modality.TEXT],
                acoustic=vectors[Modality.ACOUSTIC],
                visual=vectors[Modality.VISUAL],
                sentiment=sentiment,
                emotions=emotions,
            ))
        videos.append(VideoSample(video_id=video_id, utterances=utterances))

    dataset = Dataset(videos=videos, dims=spec.dims, split=split)
    logger.debug(
        'Synthetic dataset generated',
        seed=seed,
        details={'videos': len(dataset), 'utterances': dataset.num_utterances, 'split': split.value}
    )
    return dataset


def prototype_features(
    spec: SynthSpec,
    seed: int,
    sentiment: int,
    emotions: List[int]
) -> Dict[Modality, np.ndarray]:
    """Noise-free features of a label combination."""
    prototypes = _prototypes(spec.dims, seed)
    rows = _label_rows(sentiment, emotions)
    return {modality: table[rows].sum(axis=0) for modality, table in prototypes.items()}
