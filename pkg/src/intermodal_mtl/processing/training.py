"""Adam optimizer, epoch loop and evaluation.

A batch holds whole videos. Each video runs its own forward/backward pass;
per-video losses are scaled by ``1 / len(batch)`` so the accumulated leaf
gradients are those of the batch mean, and one Adam step follows per batch.
Videos inside a batch are processed in video-id order, which fixes the
floating-point reduction order.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..core.config import ModelConfig, Thresholds, TrainConfig, modality_tag
from ..core.errors import ConfigError, DatasetError, DimensionError, MissingGradientError, NumericError
from ..core.logger import get_logger
from ..engine.tensor import affine, backward
from ..ingestion.batching import batch_videos
from ..persistence.models import Dataset
from .metrics import MetricsReport, multilabel_report, sentiment_report
from .model import GoldLabels, ModelParams, build_model, forward, loss, predict_sentiment

logger = get_logger(__name__)

# Seed-sequence streams derived from the run seed
_SHUFFLE_STREAM = 1
_DROPOUT_STREAM = 2


@dataclass
class AdamState:
    """First/second moment accumulators keyed by parameter name."""
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def fresh(cls, params: ModelParams, options: Optional[TrainConfig] = None) -> "AdamState":
        options = options or TrainConfig()
        return cls(
            lr=options.learning_rate,
            beta1=options.beta1,
            beta2=options.beta2,
            epsilon=options.epsilon,
            m={name: np.zeros_like(t.data) for name, t in params.registry().items()},
            v={name: np.zeros_like(t.data) for name, t in params.registry().items()},
        )


def collect_grads(params: ModelParams) -> Dict[str, Optional[np.ndarray]]:
    """Current leaf gradients by registry name (None where nothing flowed)."""
    return {name: tensor.grad for name, tensor in params.registry().items()}


def clip_by_global_norm(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """Rescale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return norm


def adam_step(
    params: ModelParams,
    grads: Dict[str, Optional[np.ndarray]],
    state: AdamState
) -> AdamState:
    """
    Apply one bias-corrected Adam update to every parameter.

    Args:
        params: Parameters, updated in place
        grads: Gradient per registry name
        state: Moment accumulators, updated in place

    Returns:
        The advanced state

    Raises:
        MissingGradientError: a parameter has no gradient
    """
    missing = [name for name in params.names() if grads.get(name) is None]
    if missing:
        raise MissingGradientError(f"no gradient for parameters: {missing}")

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for name, tensor in params.registry().items():
        g = grads[name]
        if g.shape != tensor.shape:
            raise DimensionError(f"gradient of {name} has shape {g.shape}, expected {tensor.shape}")
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(tensor.data)
            v = np.zeros_like(tensor.data)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.data = tensor.data - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return state


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    steps: int
    dev_loss: Optional[float] = None
    dev_score: Optional[float] = None
    dev_metrics: Optional[Dict[str, Any]] = None


@dataclass
class TrainHistory:
    """Per-epoch records plus the step accounting of a run."""
    num_videos: int
    batch_size: int
    epochs: List[EpochRecord] = field(default_factory=list)
    steps: int = 0
    best_epoch: Optional[int] = None
    best_score: Optional[float] = None

    @property
    def steps_per_epoch(self) -> int:
        return math.ceil(self.num_videos / self.batch_size)

    @property
    def expected_steps(self) -> int:
        return len(self.epochs) * self.steps_per_epoch

    def train_losses(self) -> List[float]:
        return [record.train_loss for record in self.epochs]

    def record(self, entry: EpochRecord):
        if self.epochs and entry.epoch != self.epochs[-1].epoch + 1:
            raise ValueError(f"epoch {entry.epoch} does not follow {self.epochs[-1].epoch}")
        self.epochs.append(entry)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['steps_per_epoch'] = self.steps_per_epoch
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def bind_dataset_dims(config: ModelConfig, dataset: Dataset) -> ModelConfig:
    """Fill the config's feature dims from ``dataset``; conflicts are dimension errors."""
    try:
        return config.with_dims(dataset.dims)
    except ConfigError as e:
        raise DimensionError(f"dataset does not match model config: {e}")


def _check_finite(value: float, what: str, **context):
    if not math.isfinite(value):
        logger.numeric_failure(what, details={'value': str(value), **context})
        raise NumericError(f"{what} is not finite ({value})")


def _require_videos(dataset: Dataset, role: str):
    if len(dataset) == 0:
        raise DatasetError(f"{role} dataset has no videos")


def dataset_loss(params: ModelParams, config: ModelConfig, dataset: Dataset) -> float:
    """Mean per-video loss in inference mode."""
    _require_videos(dataset, "scored")
    losses = []
    for video in dataset:
        out = forward(video, params, config, training=False)
        losses.append(loss(out, GoldLabels.from_video(video), config).item())
    value = float(np.mean(losses))
    _check_finite(value, 'dataset loss')
    return value


def evaluate(
    params: ModelParams,
    config: ModelConfig,
    dataset: Dataset,
    thresholds: Optional[Thresholds] = None
) -> MetricsReport:
    """
    Score a model on a dataset in inference mode.

    Emotion probabilities are binarized twice, once at ``thresholds.f1`` for
    F1 and once at ``thresholds.wacc`` for weighted accuracy. The mean
    per-video loss is kept in ``extras['loss']``.

    Args:
        params: Model weights
        config: Model configuration with feature dims set
        dataset: Videos to score
        thresholds: Emotion thresholds (0.4 / 0.2 by default)

    Returns:
        MetricsReport covering the tasks the model has
    """
    _require_videos(dataset, "scored")
    thresholds = thresholds or Thresholds()
    sentiment_probs, emotion_probs = [], []
    sentiment_gold, emotion_gold = [], []
    losses = []
    for video in dataset:
        out = forward(video, params, config, training=False)
        gold = GoldLabels.from_video(video)
        losses.append(loss(out, gold, config).item())
        if out.sentiment_probs is not None:
            sentiment_probs.append(out.sentiment_probs.data)
            sentiment_gold.append(gold.sentiment)
        if out.emotion_probs is not None:
            emotion_probs.append(out.emotion_probs.data)
            emotion_gold.append(gold.emotions)

    report = MetricsReport(num_utterances=dataset.num_utterances)
    if sentiment_probs:
        report.sentiment = sentiment_report(
            predict_sentiment(np.vstack(sentiment_probs)),
            np.concatenate(sentiment_gold),
        )
    if emotion_probs:
        report.emotion = multilabel_report(
            np.vstack(emotion_probs), np.vstack(emotion_gold), thresholds
        )
    report.extras['loss'] = float(np.mean(losses))
    return report


def train(
    config: ModelConfig,
    dataset: Dataset,
    seed: int,
    epochs: Optional[int] = None,
    dev: Optional[Dataset] = None,
    options: Optional[TrainConfig] = None,
    thresholds: Optional[Thresholds] = None
) -> Tuple[ModelParams, TrainHistory]:
    """
    Train a model from a seeded initialization.

    With a dev set, the parameters of the epoch with the best dev selection
    score are returned (earliest epoch wins ties); otherwise the final ones.

    Args:
        config: Model configuration; unset feature dims are taken from ``dataset``
        dataset: Training videos
        seed: Seeds initialization, shuffling and dropout
        epochs: Number of epochs (``options.epochs`` when omitted)
        dev: Optional dev split for loss, metrics and model selection
        options: Optimizer and batch settings (defaults when omitted)
        thresholds: Emotion thresholds used for dev metrics

    Returns:
        Tuple of (parameters, history)

    Raises:
        DatasetError: the training or dev set has no videos
        DimensionError: dataset and config disagree on feature dims
        NumericError: a batch loss became non-finite
    """
    options = options or TrainConfig()
    epochs = options.epochs if epochs is None else epochs
    if epochs < 0:
        raise ConfigError(f"epochs must be >= 0, got {epochs}")
    _require_videos(dataset, "training")
    config = bind_dataset_dims(config, dataset)
    if dev is not None:
        _require_videos(dev, "dev")
        bind_dataset_dims(config, dev)

    params = build_model(config, seed)
    state = AdamState.fresh(params, options)
    dropout_rng = np.random.default_rng([seed, _DROPOUT_STREAM])
    history = TrainHistory(num_videos=len(dataset), batch_size=options.batch_size)
    best: Optional[Dict[str, np.ndarray]] = None

    logger.set_context(mode=config.mode.value, modalities=modality_tag(config.modalities), seed=seed)
    try:
        for epoch in range(1, epochs + 1):
            video_losses: List[float] = []
            for batch in batch_videos(dataset, options.batch_size, (seed, _SHUFFLE_STREAM, epoch)):
                params.zero_grad()
                scale = 1.0 / len(batch)
                for video in sorted(batch, key=lambda v: v.video_id):
                    out = forward(video, params, config, training=True, rng=dropout_rng)
                    video_loss = loss(out, GoldLabels.from_video(video), config)
                    value = video_loss.item()
                    _check_finite(value, 'training loss', epoch=epoch, video_id=video.video_id)
                    video_losses.append(value)
                    backward(affine(video_loss, scale))

                grads = collect_grads(params)
                if options.grad_clip is not None:
                    clip_by_global_norm(grads, options.grad_clip)
                adam_step(params, grads, state)
                history.steps += 1

            entry = EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(video_losses)),
                steps=history.steps,
            )
            if dev is not None:
                report = evaluate(params, config, dev, thresholds)
                entry.dev_loss = report.extras['loss']
                _check_finite(entry.dev_loss, 'dev loss', epoch=epoch)
                entry.dev_score = report.selection_score()
                entry.dev_metrics = report.flat()
                if history.best_score is None or entry.dev_score > history.best_score:
                    history.best_score = entry.dev_score
                    history.best_epoch = epoch
                    best = params.snapshot()
                    logger.info(
                        'Best dev score improved',
                        event='best_checkpoint_updated',
                        epoch=epoch,
                        details={'dev_score': entry.dev_score}
                    )
            history.record(entry)
            logger.epoch_completed(
                epoch,
                entry.train_loss,
                dev_loss=entry.dev_loss,
                dev_score=entry.dev_score,
                step=history.steps,
            )
    finally:
        logger.clear_context()

    if history.steps != history.expected_steps:
        raise RuntimeError(
            f"optimizer took {history.steps} steps, expected {history.expected_steps}"
        )
    if best is not None:
        params = ModelParams.from_arrays(best)
    return params, history
