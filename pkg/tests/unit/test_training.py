"""Unit tests for the optimizer, training loop and evaluation."""

import math

import numpy as np
import pytest

from intermodal_mtl.core.config import Thresholds, TrainConfig
from intermodal_mtl.core.errors import DatasetError, DimensionError, MissingGradientError
from intermodal_mtl.engine.tensor import Tensor
from intermodal_mtl.persistence.models import Dataset
from intermodal_mtl.processing.model import ModelParams, build_model
from intermodal_mtl.processing.training import (
    AdamState,
    EpochRecord,
    TrainHistory,
    adam_step,
    bind_dataset_dims,
    clip_by_global_norm,
    dataset_loss,
    evaluate,
    train,
)
from tests.fixtures.sample_videos import make_dataset, tiny_model_config


def _scalar_params(value):
    return ModelParams({'w': Tensor([[value]], requires_grad=True, name='w')})


class TestAdam:
    """Bias-corrected Adam updates."""

    def test_first_step_moves_by_learning_rate(self):
        params = _scalar_params(1.0)
        state = AdamState(lr=0.1)
        adam_step(params, {'w': np.array([[0.5]])}, state)
        # m_hat = g and v_hat = g^2 after bias correction
        expected = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8)
        assert params['w'].item() == pytest.approx(expected, abs=1e-12)
        assert state.t == 1

    def test_two_steps_match_hand_computation(self):
        params = _scalar_params(0.0)
        state = AdamState(lr=0.01)
        grads = [0.2, -0.4]
        m = v = 0.0
        w = 0.0
        for t, g in enumerate(grads, start=1):
            adam_step(params, {'w': np.array([[g]])}, state)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            w -= 0.01 * (m / (1 - 0.9 ** t)) / (math.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        assert params['w'].item() == pytest.approx(w, abs=1e-12)

    def test_zero_gradient_leaves_weights(self):
        params = _scalar_params(2.0)
        adam_step(params, {'w': np.zeros((1, 1))}, AdamState())
        assert params['w'].item() == 2.0

    def test_missing_gradient(self):
        params = _scalar_params(1.0)
        with pytest.raises(MissingGradientError, match="w"):
            adam_step(params, {'w': None}, AdamState())

    def test_gradient_shape_checked(self):
        params = _scalar_params(1.0)
        with pytest.raises(DimensionError):
            adam_step(params, {'w': np.zeros((2, 1))}, AdamState())

    def test_fresh_state_uses_options(self, tiny_config):
        params = build_model(tiny_config, 0)
        state = AdamState.fresh(params, TrainConfig(learning_rate=0.05))
        assert state.lr == 0.05
        assert set(state.m) == set(params.names())


class TestClipping:

    def test_large_norm_rescaled(self):
        grads = {'a': np.array([[3.0]]), 'b': np.array([[4.0]])}
        norm = clip_by_global_norm(grads, 1.0)
        assert norm == pytest.approx(5.0)
        assert grads['a'].item() == pytest.approx(0.6)
        assert grads['b'].item() == pytest.approx(0.8)

    def test_small_norm_untouched(self):
        grads = {'a': np.array([[0.3]])}
        clip_by_global_norm(grads, 1.0)
        assert grads['a'].item() == 0.3


class TestTrainHistory:

    def test_step_accounting(self):
        history = TrainHistory(num_videos=10, batch_size=4)
        history.record(EpochRecord(epoch=1, train_loss=1.0, steps=3))
        history.record(EpochRecord(epoch=2, train_loss=0.5, steps=6))
        assert history.steps_per_epoch == 3
        assert history.expected_steps == 6
        assert history.train_losses() == [1.0, 0.5]
        assert history.to_dict()['steps_per_epoch'] == 3

    def test_epochs_must_be_consecutive(self):
        history = TrainHistory(num_videos=1, batch_size=1)
        history.record(EpochRecord(epoch=1, train_loss=1.0, steps=1))
        with pytest.raises(ValueError):
            history.record(EpochRecord(epoch=3, train_loss=1.0, steps=2))


class TestTrain:
    """The epoch loop."""

    def test_deterministic(self, tiny_config, tiny_dataset):
        options = TrainConfig(batch_size=2, learning_rate=0.01)
        a, history_a = train(tiny_config, tiny_dataset, seed=3, epochs=2, options=options)
        b, history_b = train(tiny_config, tiny_dataset, seed=3, epochs=2, options=options)
        assert history_a.train_losses() == history_b.train_losses()
        assert all(np.array_equal(a[name].data, b[name].data) for name in a.names())

    def test_deterministic_with_dropout(self, tiny_dataset):
        config = tiny_model_config(dropout_rate=0.3)
        options = TrainConfig(batch_size=3)
        a, _ = train(config, tiny_dataset, seed=1, epochs=2, options=options)
        b, _ = train(config, tiny_dataset, seed=1, epochs=2, options=options)
        assert all(np.array_equal(a[name].data, b[name].data) for name in a.names())

    def test_zero_epochs_returns_initialization(self, tiny_config, tiny_dataset):
        params, history = train(tiny_config, tiny_dataset, seed=4, epochs=0)
        initial = build_model(bind_dataset_dims(tiny_config, tiny_dataset), 4)
        assert history.steps == 0
        assert history.epochs == []
        assert all(np.array_equal(params[n].data, initial[n].data) for n in initial.names())

    def test_step_count(self, tiny_config):
        dataset = make_dataset(n_videos=5, seed=2)
        _, history = train(tiny_config, dataset, seed=0, epochs=3, options=TrainConfig(batch_size=2))
        assert history.steps == 3 * 3
        assert [r.steps for r in history.epochs] == [3, 6, 9]

    def test_loss_decreases(self, tiny_config, tiny_dataset):
        options = TrainConfig(batch_size=4, learning_rate=0.02)
        _, history = train(tiny_config, tiny_dataset, seed=0, epochs=30, options=options)
        losses = history.train_losses()
        assert losses[-1] < losses[0]

    def test_dev_selection_records_best_epoch(self, tiny_config, tiny_dataset):
        dev = make_dataset(n_videos=3, seed=9)
        params, history = train(tiny_config, tiny_dataset, seed=0, epochs=4, dev=dev)
        scores = [r.dev_score for r in history.epochs]
        assert history.best_score == max(scores)
        assert history.best_epoch == scores.index(max(scores)) + 1
        assert all(r.dev_loss is not None for r in history.epochs)
        report = evaluate(params, bind_dataset_dims(tiny_config, tiny_dataset), dev)
        assert report.selection_score() == pytest.approx(history.best_score)

    def test_dims_conflict(self, tiny_dataset):
        config = tiny_model_config(d_text=9)
        with pytest.raises(DimensionError):
            train(config, tiny_dataset, seed=0, epochs=1)

    def test_unset_dims_taken_from_data(self, tiny_dataset):
        config = tiny_model_config(d_text=None, d_acoustic=None, d_visual=None)
        params, _ = train(config, tiny_dataset, seed=0, epochs=1)
        assert params['encoder.t.fwd.W_z'].shape == (4, 3)

    def test_gradient_clipping_runs(self, tiny_config, tiny_dataset):
        _, history = train(
            tiny_config, tiny_dataset, seed=0, epochs=1, options=TrainConfig(grad_clip=0.01)
        )
        assert history.steps == 1


class TestEvaluate:

    def test_report_covers_model_tasks(self, tiny_config, tiny_dataset):
        config = bind_dataset_dims(tiny_config, tiny_dataset)
        params = build_model(config, 0)
        report = evaluate(params, config, tiny_dataset, Thresholds(f1=0.5, wacc=0.3))
        assert report.num_utterances == tiny_dataset.num_utterances
        assert report.sentiment is not None
        assert report.emotion.thresholds == {'f1': 0.5, 'wacc': 0.3}
        assert report.extras['loss'] == pytest.approx(dataset_loss(params, config, tiny_dataset))

    def test_repeatable(self, tiny_config, tiny_dataset):
        config = bind_dataset_dims(tiny_config, tiny_dataset)
        params = build_model(config, 0)
        assert evaluate(params, config, tiny_dataset).to_json() == evaluate(params, config, tiny_dataset).to_json()

    def test_empty_dataset_rejected(self, tiny_config, tiny_dataset):
        config = bind_dataset_dims(tiny_config, tiny_dataset)
        params = build_model(config, 0)
        empty = Dataset(videos=[], dims=tiny_dataset.dims)
        with pytest.raises(DatasetError, match="no videos"):
            evaluate(params, config, empty)
        with pytest.raises(DatasetError, match="no videos"):
            dataset_loss(params, config, empty)
        with pytest.raises(DatasetError, match="no videos"):
            train(config, tiny_dataset, seed=0, dev=empty, epochs=1)
        with pytest.raises(DatasetError, match="no videos"):
            train(config, empty, seed=0, epochs=1)
