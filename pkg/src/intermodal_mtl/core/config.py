"""Configuration models and layered run-config resolution.

Precedence is built-in defaults < config file (YAML or JSON) < command-line
overrides. Every model is validated with pydantic; validation failures surface
as ``ConfigError`` so the CLI can map them to the usage exit code.
"""

import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

OUTPUT_DIR_ENV = "INTERMODAL_MTL_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"


class Modality(str, Enum):
    """Feature streams of an utterance."""
    TEXT = "t"
    ACOUSTIC = "a"
    VISUAL = "v"


# Order of encodings in the shared representation: T, V, A
REPRESENTATION_ORDER: Tuple[Modality, ...] = (Modality.TEXT, Modality.VISUAL, Modality.ACOUSTIC)

# Attention pairs in representation order: TV, AV, TA
ATTENTION_PAIRS: Tuple[Tuple[Modality, Modality], ...] = (
    (Modality.TEXT, Modality.VISUAL),
    (Modality.ACOUSTIC, Modality.VISUAL),
    (Modality.TEXT, Modality.ACOUSTIC),
)


class TaskMode(str, Enum):
    """Single-task or multi-task regime."""
    STL_SENTIMENT = "stl-sent"
    STL_EMOTION = "stl-emo"
    MTL = "mtl"

    @property
    def has_sentiment(self) -> bool:
        return self in (TaskMode.STL_SENTIMENT, TaskMode.MTL)

    @property
    def has_emotion(self) -> bool:
        return self in (TaskMode.STL_EMOTION, TaskMode.MTL)


def parse_modalities(value: Any) -> Tuple[Modality, ...]:
    """Parse ``"t,a,v"``, ``"tav"`` or a list into canonical (T, A, V) order."""
    if isinstance(value, str):
        tokens: Iterable[str] = [tok for tok in value.replace(",", "").replace("+", "").lower()]
    else:
        tokens = [Modality(v).value if isinstance(v, Modality) else str(v).lower() for v in value]

    chosen = set()
    for token in tokens:
        try:
            chosen.add(Modality(token))
        except ValueError:
            raise ValueError(f"Unknown modality: {token!r}")
    if not chosen:
        raise ValueError("At least one modality is required")
    return tuple(m for m in Modality if m in chosen)


def modality_tag(modalities: Iterable[Modality]) -> str:
    """Column label for a modality subset in T, A, V order, e.g. ``A+V``."""
    chosen = set(modalities)
    return "+".join(m.value.upper() for m in Modality if m in chosen)


# Column order of the STL/MTL comparison table
TABLE_MODALITY_SUBSETS: Tuple[Tuple[Modality, ...], ...] = (
    (Modality.TEXT,),
    (Modality.ACOUSTIC,),
    (Modality.VISUAL,),
    (Modality.TEXT, Modality.VISUAL),
    (Modality.TEXT, Modality.ACOUSTIC),
    (Modality.ACOUSTIC, Modality.VISUAL),
    (Modality.TEXT, Modality.ACOUSTIC, Modality.VISUAL),
)


class ModelConfig(BaseModel):
    """Architecture and loss configuration."""
    model_config = ConfigDict(frozen=True)

    d: int = Field(100, ge=1)
    d_text: Optional[int] = Field(None, ge=1)
    d_acoustic: Optional[int] = Field(None, ge=1)
    d_visual: Optional[int] = Field(None, ge=1)
    dense_units: int = Field(100, ge=1)
    dropout_rate: float = Field(0.3, ge=0.0, lt=1.0)
    encoder_dropout: float = Field(0.0, ge=0.0, lt=1.0)
    dense_dropout: float = Field(0.0, ge=0.0, lt=1.0)
    mode: TaskMode = TaskMode.MTL
    modalities: Tuple[Modality, ...] = (Modality.TEXT, Modality.ACOUSTIC, Modality.VISUAL)
    loss_weight_lambda: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator('modalities', mode='before')
    @classmethod
    def _parse_modalities(cls, value: Any) -> Tuple[Modality, ...]:
        return parse_modalities(value)

    @property
    def dims(self) -> Optional[Tuple[int, int, int]]:
        if None in (self.d_text, self.d_acoustic, self.d_visual):
            return None
        return (self.d_text, self.d_acoustic, self.d_visual)

    def input_dim(self, modality: Modality) -> int:
        """Feature size of one modality; requires resolved dims."""
        value = {
            Modality.TEXT: self.d_text,
            Modality.ACOUSTIC: self.d_acoustic,
            Modality.VISUAL: self.d_visual,
        }[modality]
        if value is None:
            raise ConfigError(f"Input dimension for modality {modality.value!r} is not set")
        return value

    def with_dims(self, dims: Tuple[int, int, int]) -> "ModelConfig":
        """Fill unset feature dims from a dataset, rejecting conflicts."""
        names = ('d_text', 'd_acoustic', 'd_visual')
        update = {}
        for name, value in zip(names, dims):
            current = getattr(self, name)
            if current is not None and current != value:
                raise ConfigError(
                    f"{name}={current} in config but dataset declares {value}"
                )
            update[name] = value
        return self.model_copy(update=update)


class Thresholds(BaseModel):
    """Emotion binarization thresholds per metric family."""
    model_config = ConfigDict(frozen=True)

    f1: float = Field(0.4, gt=0.0, lt=1.0)
    wacc: float = Field(0.2, gt=0.0, lt=1.0)


class TrainConfig(BaseModel):
    """Optimizer and loop settings."""
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(50, ge=0)
    batch_size: int = Field(16, ge=1)
    learning_rate: float = Field(0.001, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    grad_clip: Optional[float] = Field(None, gt=0.0)
    seed: int = 0


class DataConfig(BaseModel):
    """Dataset locations."""
    train: Optional[str] = None
    dev: Optional[str] = None
    test: Optional[str] = None


class ExportConfig(BaseModel):
    """Optional artifacts written after training."""
    attention: bool = False
    svg: bool = False


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


class RunConfig(BaseModel):
    """Fully resolved configuration of one command invocation."""
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    data: DataConfig = Field(default_factory=DataConfig)
    export: ExportConfig = Field(default_factory=ExportConfig)
    output_dir: str = Field(default_factory=default_output_dir)

    def to_json(self) -> str:
        """Deterministic JSON rendering for the echoed config file."""
        return json.dumps(self.model_dump(mode='json'), indent=2, sort_keys=True) + "\n"


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict):
            current = merged.get(key)
            merged[key] = _deep_merge(current if isinstance(current, dict) else {}, value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str) -> Dict[str, Any]:
    """Read a YAML or JSON config file into a plain dict."""
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        content = yaml.safe_load(config_path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML/JSON: {e}")
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"Config file {path} must contain a mapping at top level")
    return content


def load_run_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    Resolve a RunConfig from defaults, an optional file and flag overrides.

    Args:
        path: YAML/JSON config file, or None for defaults only
        overrides: Nested dict of flag values; ``None`` leaves are ignored

    Returns:
        Validated RunConfig with every default materialized
    """
    layered: Dict[str, Any] = {}
    if path:
        layered = _deep_merge(layered, read_config_file(path))
    if overrides:
        layered = _deep_merge(layered, overrides)
    try:
        return RunConfig.model_validate(layered)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")


def validate_model_config(data: Dict[str, Any]) -> ModelConfig:
    """Validate a raw mapping into a ModelConfig, raising ConfigError."""
    try:
        return ModelConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid model configuration: {e}")
