"""Memorization of a tiny synthetic dataset with the default architecture."""

from pathlib import Path

import pytest

from intermodal_mtl.core.config import load_run_config
from intermodal_mtl.ingestion.synthetic import make_synth_spec, synthesize_dataset
from intermodal_mtl.processing.model import build_model
from intermodal_mtl.processing.training import bind_dataset_dims, dataset_loss, evaluate, train

OVERFIT_CONFIG = Path(__file__).resolve().parents[2] / "config" / "overfit.yaml"


@pytest.mark.slow
class TestOverfit:

    def test_tiny_dataset_is_memorized(self):
        run_config = load_run_config(str(OVERFIT_CONFIG))
        dataset = synthesize_dataset(make_synth_spec(n_videos=8, noise_scale=0.05), seed=7)
        config = bind_dataset_dims(run_config.model, dataset)
        seed = run_config.training.seed

        initial_loss = dataset_loss(build_model(config, seed), config, dataset)
        params, history = train(config, dataset, seed=seed, options=run_config.training)
        final_loss = dataset_loss(params, config, dataset)
        report = evaluate(params, config, dataset, run_config.thresholds)

        assert len(history.epochs) == 200
        assert final_loss <= 0.1 * initial_loss
        assert report.sentiment.accuracy >= 0.95
        assert report.emotion.average_f1 >= 0.95
