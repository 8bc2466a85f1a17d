"""Contextual inter-modal attention over the utterances of one video.

For two encoded modalities X, Y (both u x d):

    M1 = X Y^T          M2 = Y X^T = M1^T
    N1 = softmax_rows(M1)   N2 = softmax_rows(M2)
    O1 = N1 Y           O2 = N2 X
    A1 = O1 * X         A2 = O2 * Y
    output = [A1 ; A2]  (u x 2d)

No scaling inside M1 and no masking of the target utterance.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..core.errors import DimensionError
from ..engine.tensor import (
    Tensor,
    concat_cols,
    elementwise,
    ElementwiseKind,
    matmul,
    outer_dot,
    row_softmax,
    transpose,
)


@dataclass
class AttentionPair:
    """Intermediate and output tensors of one attention block."""
    M1: Tensor
    M2: Tensor
    N1: Tensor
    N2: Tensor
    O1: Tensor
    O2: Tensor
    A1: Tensor
    A2: Tensor
    output: Tensor

    def arrays(self) -> Dict[str, np.ndarray]:
        """Plain arrays of every field, for export."""
        return {
            name: getattr(self, name).data
            for name in ('M1', 'M2', 'N1', 'N2', 'O1', 'O2', 'A1', 'A2')
        }


def cim_attention(x: Tensor, y: Tensor) -> AttentionPair:
    """Attention block between two encoded modalities of the same video."""
    if x.shape != y.shape:
        raise DimensionError(f"cim_attention shape mismatch: {x.shape} vs {y.shape}")
    if x.rows < 1:
        raise DimensionError("cim_attention needs at least one utterance")

    m1 = outer_dot(x, y)
    m2 = transpose(m1)
    n1 = row_softmax(m1)
    n2 = row_softmax(m2)
    o1 = matmul(n1, y)
    o2 = matmul(n2, x)
    a1 = elementwise(ElementwiseKind.MUL, o1, x)
    a2 = elementwise(ElementwiseKind.MUL, o2, y)
    return AttentionPair(
        M1=m1, M2=m2, N1=n1, N2=n2, O1=o1, O2=o2, A1=a1, A2=a2,
        output=concat_cols([a1, a2]),
    )


def self_attention_pair(x: Tensor) -> AttentionPair:
    """Uni-modal variant: the attention block with both arguments equal."""
    return cim_attention(x, x)


def self_attention(x: Tensor) -> Tensor:
    """u x 2d self-attended representation of a single modality."""
    return self_attention_pair(x).output
