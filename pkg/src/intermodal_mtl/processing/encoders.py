"""GRU cell and bidirectional GRU over an utterance sequence.

Cell equations (reset gate applied inside the candidate):

    z  = sigmoid(x W_z + h U_z + b_z)
    r  = sigmoid(x W_r + h U_r + b_r)
    h~ = tanh(x W_h + (r * h) U_h + b_h)
    h' = (1 - z) * h + z * h~
"""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..core.errors import DimensionError
from ..engine.tensor import (
    Tensor,
    add_row,
    affine,
    concat_cols,
    concat_rows,
    matmul,
    sigmoid,
    slice_rows,
    tanh,
    zeros,
)

GATE_NAMES = ('W_z', 'W_r', 'W_h', 'U_z', 'U_r', 'U_h', 'b_z', 'b_r', 'b_h')


@dataclass
class GruParams:
    """Weights of one GRU direction."""
    W_z: Tensor
    W_r: Tensor
    W_h: Tensor
    U_z: Tensor
    U_r: Tensor
    U_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor

    def __post_init__(self):
        d_in, d = self.W_z.shape
        expected = {
            'W_z': (d_in, d), 'W_r': (d_in, d), 'W_h': (d_in, d),
            'U_z': (d, d), 'U_r': (d, d), 'U_h': (d, d),
            'b_z': (1, d), 'b_r': (1, d), 'b_h': (1, d),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(f"GRU {name} has shape {actual}, expected {shape}")

    @property
    def input_size(self) -> int:
        return self.W_z.rows

    @property
    def hidden_size(self) -> int:
        return self.W_z.cols

    def named(self) -> Dict[str, Tensor]:
        return {name: getattr(self, name) for name in GATE_NAMES}

    @classmethod
    def initialize(
        cls,
        input_size: int,
        hidden_size: int,
        rng: np.random.Generator,
        prefix: str = ""
    ) -> "GruParams":
        """Uniform init: +-1/sqrt(d_in) for input matrices, +-1/sqrt(d) recurrent, zero biases."""
        k_in = 1.0 / np.sqrt(input_size)
        k_rec = 1.0 / np.sqrt(hidden_size)
        tensors = {}
        for name in ('W_z', 'W_r', 'W_h'):
            tensors[name] = rng.uniform(-k_in, k_in, size=(input_size, hidden_size))
        for name in ('U_z', 'U_r', 'U_h'):
            tensors[name] = rng.uniform(-k_rec, k_rec, size=(hidden_size, hidden_size))
        for name in ('b_z', 'b_r', 'b_h'):
            tensors[name] = np.zeros((1, hidden_size))
        return cls(**{
            name: Tensor(value, requires_grad=True, name=f"{prefix}{name}")
            for name, value in tensors.items()
        })


@dataclass
class BiGruParams:
    """Forward and backward direction weights."""
    forward: GruParams
    backward: GruParams

    def __post_init__(self):
        if (self.forward.input_size, self.forward.hidden_size) != \
                (self.backward.input_size, self.backward.hidden_size):
            raise DimensionError("bi-GRU directions must share (d_in, d)")

    @property
    def hidden_size(self) -> int:
        return self.forward.hidden_size

    def named(self) -> Dict[str, Tensor]:
        out = {f"fwd.{k}": v for k, v in self.forward.named().items()}
        out.update({f"bwd.{k}": v for k, v in self.backward.named().items()})
        return out

    @classmethod
    def initialize(
        cls,
        input_size: int,
        hidden_size: int,
        rng: np.random.Generator,
        prefix: str = ""
    ) -> "BiGruParams":
        return cls(
            forward=GruParams.initialize(input_size, hidden_size, rng, f"{prefix}fwd."),
            backward=GruParams.initialize(input_size, hidden_size, rng, f"{prefix}bwd."),
        )


def gru_cell(x_t: Tensor, h_prev: Tensor, p: GruParams) -> Tensor:
    """One GRU step for a 1 x d_in input row."""
    if x_t.shape != (1, p.input_size):
        raise DimensionError(f"gru_cell input {x_t.shape} does not match d_in={p.input_size}")
    if h_prev.shape != (1, p.hidden_size):
        raise DimensionError(f"gru_cell state {h_prev.shape} does not match d={p.hidden_size}")

    z = sigmoid(add_row(matmul(x_t, p.W_z) + matmul(h_prev, p.U_z), p.b_z))
    r = sigmoid(add_row(matmul(x_t, p.W_r) + matmul(h_prev, p.U_r), p.b_r))
    candidate = tanh(add_row(matmul(x_t, p.W_h) + matmul(r * h_prev, p.U_h), p.b_h))
    return affine(z, -1.0, 1.0) * h_prev + z * candidate


def _run_direction(x: Tensor, p: GruParams, order: List[int]) -> List[Tensor]:
    states: List[Tensor] = [None] * x.rows
    h = zeros(1, p.hidden_size)
    for i in order:
        h = gru_cell(slice_rows(x, i, i + 1), h, p)
        states[i] = h
    return states


def bigru(x: Tensor, p: BiGruParams) -> Tensor:
    """
    Encode a u x d_in sequence into u x 2d.

    Row i is the forward state after utterances 1..i next to the backward
    state after utterances u..i; both directions start from zero.
    """
    if x.rows < 1:
        raise DimensionError("bigru needs at least one utterance")
    if x.cols != p.forward.input_size:
        raise DimensionError(
            f"bigru input has {x.cols} features, encoder expects {p.forward.input_size}"
        )

    u = x.rows
    forward_states = _run_direction(x, p.forward, list(range(u)))
    backward_states = _run_direction(x, p.backward, list(reversed(range(u))))
    return concat_cols([concat_rows(forward_states), concat_rows(backward_states)])
