"""Shared pytest fixtures."""

import numpy as np
import pytest

from intermodal_mtl.ingestion.synthetic import make_synth_spec, synthesize_dataset
from intermodal_mtl.persistence.dataset_store import save_dataset
from intermodal_mtl.persistence.models import Split
from tests.fixtures.sample_videos import make_dataset, make_video, tiny_model_config


@pytest.fixture
def rng():
    """Seeded generator for random test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """Tri-modal MTL config small enough for finite differences."""
    return tiny_model_config()


@pytest.fixture
def tiny_video():
    """Three-utterance video with TINY_DIMS features."""
    return make_video("vid_tiny", 3, seed=5)


@pytest.fixture
def tiny_dataset():
    """Four short videos with TINY_DIMS features."""
    return make_dataset(n_videos=4, seed=3)


@pytest.fixture
def synth_files(tmp_path):
    """Small synthetic train/dev files sharing prototypes."""
    spec = make_synth_spec(n_videos=6, u_range=(2, 4), dims=(6, 4, 4))
    train_path = save_dataset(synthesize_dataset(spec, seed=11, split=Split.TRAIN), tmp_path / "train.jsonl")
    dev_path = save_dataset(synthesize_dataset(spec, seed=11, split=Split.DEV), tmp_path / "dev.jsonl")
    return train_path, dev_path
