"""Multi-task network: encoders, pairwise attention, shared trunk, task heads.

Shared representation layout (columns, left to right):

    tri-modal: [Atn_TV, Atn_AV, Atn_TA, T, V, A]         u x 18d
    bi-modal:  [Atn_XY, X, Y]                            u x 8d
    uni-modal: [A1 of self-attention(X), X]              u x 4d

The representation goes through dropout, a shared dense ReLU layer (plus
dropout) and then the sentiment softmax head and/or the emotion sigmoid head.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.config import (
    ATTENTION_PAIRS,
    REPRESENTATION_ORDER,
    Modality,
    ModelConfig,
    TaskMode,
    validate_model_config,
)
from ..core.errors import CheckpointError, ConfigError, DimensionError, LabelError
from ..core.logger import get_logger
from ..engine.tensor import (
    Tensor,
    add_row,
    affine,
    clip,
    concat_cols,
    dropout,
    elementwise,
    ElementwiseKind,
    log,
    matmul,
    relu,
    row_softmax,
    sigmoid,
    sum_all,
)
from ..persistence.models import NUM_EMOTIONS, VideoSample
from .attention import AttentionPair, cim_attention, self_attention_pair
from .encoders import GATE_NAMES, BiGruParams, GruParams, bigru

logger = get_logger(__name__)

PROB_CLIP = 1e-7
NUM_SENTIMENTS = 2


@dataclass
class ModelParams:
    """Trainable weights addressed by stable registry names."""
    tensors: Dict[str, Tensor]

    def registry(self) -> Dict[str, Tensor]:
        return self.tensors

    def names(self) -> List[str]:
        return list(self.tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def trainable(self) -> List[Tensor]:
        return list(self.tensors.values())

    def zero_grad(self):
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def encoder(self, modality: Modality) -> BiGruParams:
        prefix = f"encoder.{modality.value}"
        directions = []
        for direction in ('fwd', 'bwd'):
            directions.append(GruParams(**{
                name: self.tensors[f"{prefix}.{direction}.{name}"]
                for name in GATE_NAMES
            }))
        return BiGruParams(forward=directions[0], backward=directions[1])

    def snapshot(self) -> Dict[str, np.ndarray]:
        """Copies of every parameter value."""
        return {name: tensor.data.copy() for name, tensor in self.tensors.items()}

    def copy(self) -> "ModelParams":
        return ModelParams.from_arrays(self.snapshot())

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "ModelParams":
        return cls({
            name: Tensor(value, requires_grad=True, name=name)
            for name, value in arrays.items()
        })


@dataclass
class ForwardOutput:
    """Head outputs plus the attention blocks that produced them."""
    rep: Tensor
    sentiment_probs: Optional[Tensor] = None
    emotion_probs: Optional[Tensor] = None
    attention: Dict[str, AttentionPair] = field(default_factory=dict)

    @property
    def num_utterances(self) -> int:
        return self.rep.rows


@dataclass
class GoldLabels:
    """Gold sentiment indices (u,) and emotion flags (u x 7)."""
    sentiment: np.ndarray
    emotions: np.ndarray

    @classmethod
    def from_video(cls, video: VideoSample) -> "GoldLabels":
        return cls(sentiment=video.sentiment_labels(), emotions=video.emotion_labels())


@dataclass
class Prediction:
    """Thresholded model decisions for one video."""
    sentiment: Optional[np.ndarray] = None
    emotions: Optional[np.ndarray] = None  # u x 7 binary
    threshold: float = 0.4

    @property
    def emotion_sets(self) -> Optional[List[Tuple[int, ...]]]:
        if self.emotions is None:
            return None
        return [tuple(int(c) for c in np.flatnonzero(row)) for row in self.emotions]


def expected_parameter_names(config: ModelConfig) -> List[str]:
    """Registry names in initialization order."""
    names = []
    for modality in config.modalities:
        for direction in ('fwd', 'bwd'):
            for gate in GATE_NAMES:
                names.append(f"encoder.{modality.value}.{direction}.{gate}")
    names += ['dense.W', 'dense.b']
    if config.mode.has_sentiment:
        names += ['sentiment.W', 'sentiment.b']
    if config.mode.has_emotion:
        names += ['emotion.W', 'emotion.b']
    return names


def representation_width(config: ModelConfig) -> int:
    """Columns of the shared representation for a modality subset."""
    k = len(config.modalities)
    encoded = 2 * config.d
    if k == 1:
        return 2 * encoded
    pairs = sum(1 for a, b in ATTENTION_PAIRS if a in config.modalities and b in config.modalities)
    return pairs * 2 * encoded + k * encoded


def _dense_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def build_model(config: ModelConfig, seed: int) -> ModelParams:
    """
    Initialize parameters deterministically for ``(config, seed)``.

    Args:
        config: Model configuration with resolved feature dims
        seed: Seed of the initialization stream

    Returns:
        ModelParams whose registry follows ``expected_parameter_names``
    """
    config = validate_model_config(config.model_dump())
    if config.dims is None:
        raise ConfigError("Feature dims (d_text, d_acoustic, d_visual) must be set to build a model")

    rng = np.random.default_rng(seed)
    arrays: Dict[str, np.ndarray] = {}
    for modality in config.modalities:
        encoder = BiGruParams.initialize(config.input_dim(modality), config.d, rng)
        for name, tensor in encoder.named().items():
            arrays[f"encoder.{modality.value}.{name}"] = tensor.data

    width = representation_width(config)
    arrays['dense.W'] = _dense_init(rng, width, config.dense_units)
    arrays['dense.b'] = np.zeros((1, config.dense_units))
    if config.mode.has_sentiment:
        arrays['sentiment.W'] = _dense_init(rng, config.dense_units, NUM_SENTIMENTS)
        arrays['sentiment.b'] = np.zeros((1, NUM_SENTIMENTS))
    if config.mode.has_emotion:
        arrays['emotion.W'] = _dense_init(rng, config.dense_units, NUM_EMOTIONS)
        arrays['emotion.b'] = np.zeros((1, NUM_EMOTIONS))

    params = ModelParams.from_arrays(arrays)
    logger.debug(
        'Model built',
        seed=seed,
        mode=config.mode.value,
        details={'parameters': len(arrays), 'rep_width': width}
    )
    return params


def _check_video(video: VideoSample, config: ModelConfig):
    if video.num_utterances < 1:
        raise DimensionError(f"video {video.video_id} has no utterances")
    for modality in config.modalities:
        expected = config.input_dim(modality)
        actual = len(video.utterances[0].vector(modality))
        if actual != expected:
            raise DimensionError(
                f"video {video.video_id}: modality {modality.value!r} has {actual} "
                f"features, model expects {expected}"
            )


def forward(
    video: VideoSample,
    params: ModelParams,
    config: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None
) -> ForwardOutput:
    """
    Run the network on one video.

    Args:
        video: Utterance sequence
        params: Model weights
        config: Model configuration matching ``params``
        training: Enables dropout
        rng: Source of dropout masks; a fixed-seed generator when omitted

    Returns:
        ForwardOutput with per-utterance head probabilities
    """
    _check_video(video, config)
    if rng is None:
        rng = np.random.default_rng(0)

    encoded: Dict[Modality, Tensor] = {}
    for modality in config.modalities:
        x = Tensor(video.features(modality))
        encoded[modality] = dropout(
            bigru(x, params.encoder(modality)), config.encoder_dropout, rng, training
        )

    attention: Dict[str, AttentionPair] = {}
    parts: List[Tensor] = []
    if len(config.modalities) == 1:
        modality = config.modalities[0]
        pair = self_attention_pair(encoded[modality])
        attention[modality.value * 2] = pair
        # Both halves are identical; one is kept
        parts.append(pair.A1)
    else:
        for first, second in ATTENTION_PAIRS:
            if first in encoded and second in encoded:
                pair = cim_attention(encoded[first], encoded[second])
                attention[first.value + second.value] = pair
                parts.append(pair.output)
    parts.extend(encoded[m] for m in REPRESENTATION_ORDER if m in encoded)

    rep = concat_cols(parts)
    hidden = dropout(rep, config.dropout_rate, rng, training)
    hidden = relu(add_row(matmul(hidden, params['dense.W']), params['dense.b']))
    hidden = dropout(hidden, config.dense_dropout, rng, training)

    out = ForwardOutput(rep=rep, attention=attention)
    if config.mode.has_sentiment:
        out.sentiment_probs = row_softmax(
            add_row(matmul(hidden, params['sentiment.W']), params['sentiment.b'])
        )
    if config.mode.has_emotion:
        out.emotion_probs = sigmoid(
            add_row(matmul(hidden, params['emotion.W']), params['emotion.b'])
        )
    return out


def _check_gold(gold: GoldLabels, u: int):
    sentiment = np.asarray(gold.sentiment)
    emotions = np.asarray(gold.emotions)
    if sentiment.shape != (u,):
        raise DimensionError(f"sentiment gold has shape {sentiment.shape}, expected ({u},)")
    if emotions.shape != (u, NUM_EMOTIONS):
        raise DimensionError(
            f"emotion gold has shape {emotions.shape}, expected ({u}, {NUM_EMOTIONS})"
        )
    if np.any((sentiment != 0) & (sentiment != 1)):
        raise LabelError(f"sentiment labels must be 0 or 1, got {sorted(set(sentiment.tolist()))}")
    if np.any((emotions != 0) & (emotions != 1)):
        raise LabelError("emotion labels must be 0 or 1")


def sentiment_loss(probs: Tensor, gold_sentiment: np.ndarray) -> Tensor:
    """Mean categorical cross-entropy over utterances."""
    u = probs.rows
    one_hot = np.zeros((u, NUM_SENTIMENTS))
    one_hot[np.arange(u), np.asarray(gold_sentiment, dtype=np.int64)] = 1.0
    log_probs = log(clip(probs, PROB_CLIP, 1.0 - PROB_CLIP))
    picked = elementwise(ElementwiseKind.MUL, log_probs, Tensor(one_hot))
    return affine(sum_all(picked), -1.0 / u)


def emotion_loss(probs: Tensor, gold_emotions: np.ndarray) -> Tensor:
    """Mean binary cross-entropy over utterances and the 7 classes."""
    gold = np.asarray(gold_emotions, dtype=np.float64)
    log_p = log(clip(probs, PROB_CLIP, 1.0 - PROB_CLIP))
    log_not_p = log(clip(affine(probs, -1.0, 1.0), PROB_CLIP, 1.0 - PROB_CLIP))
    positive = sum_all(elementwise(ElementwiseKind.MUL, log_p, Tensor(gold)))
    negative = sum_all(elementwise(ElementwiseKind.MUL, log_not_p, Tensor(1.0 - gold)))
    return affine(positive + negative, -1.0 / gold.size)


def loss(out: ForwardOutput, gold: GoldLabels, config: ModelConfig) -> Tensor:
    """
    Task loss for the configured regime.

    STL sentiment and STL emotion use their own loss; MTL mixes them as
    ``lambda * L_sent + (1 - lambda) * L_emo``.
    """
    _check_gold(gold, out.num_utterances)
    mode = config.mode
    if mode is TaskMode.STL_SENTIMENT:
        return sentiment_loss(out.sentiment_probs, gold.sentiment)
    if mode is TaskMode.STL_EMOTION:
        return emotion_loss(out.emotion_probs, gold.emotions)

    weight = config.loss_weight_lambda
    return (
        affine(sentiment_loss(out.sentiment_probs, gold.sentiment), weight)
        + affine(emotion_loss(out.emotion_probs, gold.emotions), 1.0 - weight)
    )


def predict_sentiment(probs: np.ndarray) -> np.ndarray:
    """Argmax over [negative, positive]; ties go to positive."""
    return (probs[:, 1] >= probs[:, 0]).astype(np.int64)


def threshold_emotions(probs: np.ndarray, threshold: float) -> np.ndarray:
    """u x 7 binary matrix of classes strictly above ``threshold``."""
    return (probs > threshold).astype(np.int64)


def predict(out: ForwardOutput, threshold: float = 0.4) -> Prediction:
    """Sentiment labels and thresholded emotion label sets."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    prediction = Prediction(threshold=threshold)
    if out.sentiment_probs is not None:
        prediction.sentiment = predict_sentiment(out.sentiment_probs.data)
    if out.emotion_probs is not None:
        prediction.emotions = threshold_emotions(out.emotion_probs.data, threshold)
    return prediction


def restore_params(config: ModelConfig, arrays: Dict[str, np.ndarray]) -> ModelParams:
    """Rebuild ModelParams from saved arrays, checking names and shapes against ``config``."""
    reference = build_model(config, seed=0)
    expected = reference.names()
    if list(arrays) != expected:
        missing = sorted(set(expected) - set(arrays))
        unexpected = sorted(set(arrays) - set(expected))
        raise CheckpointError(
            f"parameter registry mismatch (missing={missing}, unexpected={unexpected})"
        )
    for name in expected:
        if arrays[name].shape != reference[name].shape:
            raise CheckpointError(
                f"parameter {name} has shape {arrays[name].shape}, "
                f"model expects {reference[name].shape}"
            )
    return ModelParams.from_arrays({name: np.array(arrays[name]) for name in expected})
