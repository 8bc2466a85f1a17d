"""Unit tests for the inter-modal attention block."""

import numpy as np
import pytest

from intermodal_mtl.core.errors import DimensionError
from intermodal_mtl.engine.gradcheck import grad_check_many
from intermodal_mtl.engine.tensor import Tensor, sum_all, tanh
from intermodal_mtl.processing.attention import cim_attention, self_attention, self_attention_pair


def _softmax(m):
    e = np.exp(m - m.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class TestCimAttention:
    """Forward values and structural laws."""

    def test_two_utterance_oracle(self):
        x = np.array([[1.0], [2.0]])
        y = np.array([[3.0], [4.0]])
        pair = cim_attention(Tensor(x), Tensor(y))

        m1 = np.array([[3.0, 4.0], [6.0, 8.0]])
        n1 = _softmax(m1)
        n2 = _softmax(m1.T)
        assert np.array_equal(pair.M1.data, m1)
        assert np.allclose(pair.N1.data, n1, atol=1e-12)
        assert np.allclose(pair.N2.data, n2, atol=1e-12)
        assert np.allclose(pair.A1.data, (n1 @ y) * x, atol=1e-12)
        assert np.allclose(pair.A2.data, (n2 @ x) * y, atol=1e-12)
        assert pair.output.shape == (2, 2)

    def test_hand_values_of_first_row(self):
        pair = cim_attention(Tensor([[1.0], [2.0]]), Tensor([[3.0], [4.0]]))
        e = np.e
        assert pair.N1.data[0, 1] == pytest.approx(e / (1 + e), abs=1e-12)
        assert pair.A1.data[0, 0] == pytest.approx(3.0 / (1 + e) + 4.0 * e / (1 + e), abs=1e-12)

    def test_attention_rows_are_distributions(self, rng):
        pair = cim_attention(Tensor(rng.normal(size=(5, 3))), Tensor(rng.normal(size=(5, 3))))
        for matrix in (pair.N1.data, pair.N2.data):
            assert np.allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(matrix > 0.0)

    def test_m2_is_transpose_of_m1(self):
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            u, d = rng.integers(1, 6, size=2)
            x = Tensor(rng.normal(size=(u, d)))
            y = Tensor(rng.normal(size=(u, d)))
            pair = cim_attention(x, y)
            assert np.array_equal(pair.M2.data, pair.M1.data.T)

    def test_argument_swap_exchanges_halves(self):
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            u, d = rng.integers(1, 6, size=2)
            x = Tensor(rng.normal(size=(u, d)))
            y = Tensor(rng.normal(size=(u, d)))
            forward = cim_attention(x, y)
            swapped = cim_attention(y, x)
            assert np.array_equal(swapped.A1.data, forward.A2.data)
            assert np.array_equal(swapped.A2.data, forward.A1.data)
            assert np.array_equal(swapped.N1.data, forward.N2.data)

    def test_single_utterance_attends_to_itself(self, rng):
        x = rng.normal(size=(1, 4))
        y = rng.normal(size=(1, 4))
        pair = cim_attention(Tensor(x), Tensor(y))
        assert pair.N1.data.tolist() == [[1.0]]
        assert np.allclose(pair.A1.data, x * y, atol=1e-15)
        assert np.allclose(pair.A2.data, x * y, atol=1e-15)

    def test_identical_inputs_give_equal_halves(self, rng):
        x = rng.normal(size=(4, 3))
        pair = cim_attention(Tensor(x), Tensor(x.copy()))
        assert np.array_equal(pair.A1.data, pair.A2.data)
        assert np.array_equal(pair.M1.data, pair.M1.data.T)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            cim_attention(Tensor(np.zeros((3, 2))), Tensor(np.zeros((2, 2))))

    def test_arrays_export_every_stage(self, rng):
        pair = cim_attention(Tensor(rng.normal(size=(3, 2))), Tensor(rng.normal(size=(3, 2))))
        assert sorted(pair.arrays()) == ['A1', 'A2', 'M1', 'M2', 'N1', 'N2', 'O1', 'O2']

    def test_gradients_match_finite_differences(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = Tensor(rng.uniform(-1, 1, size=(4, 3)))
            y = Tensor(rng.uniform(-1, 1, size=(4, 3)))
            errors = grad_check_many(lambda: sum_all(tanh(cim_attention(x, y).output)), [x, y])
            assert max(errors.values()) < 1e-5


class TestSelfAttention:
    """Uni-modal variant."""

    def test_equals_block_with_repeated_argument(self, rng):
        x = Tensor(rng.normal(size=(3, 2)))
        assert np.array_equal(self_attention(x).data, cim_attention(x, x).output.data)

    def test_halves_identical(self, rng):
        pair = self_attention_pair(Tensor(rng.normal(size=(5, 3))))
        assert np.array_equal(pair.A1.data, pair.A2.data)
        assert pair.output.shape == (5, 6)
